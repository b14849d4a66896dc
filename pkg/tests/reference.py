"""Independent reference evaluations used only by the tests.

Nothing here imports the package's numerics: the field is rebuilt from its
defining double sum in mpmath, and the measure functional is integrated
exactly by Gaussian algebra.
"""

import mpmath as mp

mp.mp.dps = 40


def wigner_mp(n, gamma, nbar, d, x1, y1, x2, y2):
    """Unnormalized two-mirror Wigner function, term by term, in mpmath."""
    s = 2 * mp.mpf(nbar) + 1
    g = mp.mpf(gamma)
    total = mp.mpf(0)
    for r in range(n + 1):
        for rp in range(n + 1):
            c1 = g * (2 * n - r - rp) / 2
            c2 = g * (r + rp) / 2
            quad = x1**2 + x2**2 + (y1 - c1) ** 2 + (y2 - c2) ** 2
            w = mp.binomial(n, r) * mp.binomial(n, rp) * mp.exp(-((d * (r - rp)) ** 2))
            total += w * mp.exp(-2 * quad / s) * mp.cos(2 * g * (r - rp) * (mp.mpf(x1) - x2))
    return 4 / (mp.pi**2 * s**2 * mp.binomial(2 * n, n)) * total


def _gaussians(n, gamma, nbar, d):
    """Field as sum of exp(-A|z|^2 + v.z + kappa) with complex v, kappa; z = (x1, y1, x2, y2)."""
    s = 2 * mp.mpf(nbar) + 1
    A = 2 / s
    g = mp.mpf(gamma)
    pref = 4 / (mp.pi**2 * s**2 * mp.binomial(2 * n, n))
    out = []
    for r in range(n + 1):
        for rp in range(n + 1):
            c1 = g * (2 * n - r - rp) / 2
            c2 = g * (r + rp) / 2
            k = 2 * g * (r - rp)
            w = pref * mp.binomial(n, r) * mp.binomial(n, rp) * mp.exp(-((d * (r - rp)) ** 2))
            for sign in (1, -1):
                v = (sign * 1j * k, 2 * A * c1, -sign * 1j * k, 2 * A * c2)
                out.append((v, mp.log(w / 2) - A * (c1**2 + c2**2)))
    return A, out


def exact_functional(n, gamma, nbar, d):
    """Exact unclamped measure -(pi^2/2) int W~ (Lap/4 + 2) W~ and phonon number.

    For g_p = exp(-A|z|^2 + v_p.z + k_p) in four dimensions:
      int g_p         = (pi/A)^2 exp(v_p.v_p/(4A) + k_p)
      int g_p g_q     = (pi/(2A))^2 exp(V.V/(8A) + k_p + k_q),  V = v_p + v_q
      int g_p Lap g_q = int g_p g_q * (sum_j ((v_q - v_p)_j / 2)^2 - 4A)
    """
    A, gs = _gaussians(n, gamma, nbar, d)
    dot = lambda a, b: sum(x * y for x, y in zip(a, b))
    norm = sum((mp.pi / A) ** 2 * mp.exp(dot(v, v) / (4 * A) + k) for v, k in gs)
    overlap = 0
    lap = 0
    for vp, kp in gs:
        for vq, kq in gs:
            V = [a + b for a, b in zip(vp, vq)]
            ipq = (mp.pi / (2 * A)) ** 2 * mp.exp(dot(V, V) / (8 * A) + kp + kq)
            overlap += ipq
            dv = [(b - a) / 2 for a, b in zip(vp, vq)]
            lap += ipq * (dot(dv, dv) - 4 * A)
    measure = -(mp.pi**2 / 2) * (lap / 4 + 2 * overlap) / norm**2
    # second moment: mean of z_j under exp(-A z^2 + v z) is v/(2A), variance 1/(2A)
    second = sum(
        (mp.pi / A) ** 2 * mp.exp(dot(v, v) / (4 * A) + k) * (dot(v, v) / (4 * A * A) + 4 / (2 * A)) for v, k in gs
    )
    return float(mp.re(measure)), float(mp.re(second / norm)) - 1, float(mp.re(norm))


def pure_state_measure(n, gamma):
    """For the pure state at nbar = d = 0 the measure is sum_m (<a_m^+ a_m> - |<a_m>|^2).

    The state is sum_r C(N,r) |i gamma (N-r), i gamma r>; inner products are
    exp(-|beta_r - beta_r'|^2 / 2) for these purely imaginary amplitudes.
    """
    g = mp.mpf(gamma)
    beta = [(g * (n - r), g * r) for r in range(n + 1)]
    c = [mp.binomial(n, r) for r in range(n + 1)]
    ov = lambda p, q: mp.exp(-((beta[p][0] - beta[q][0]) ** 2 + (beta[p][1] - beta[q][1]) ** 2) / 2)
    idx = range(n + 1)
    norm = sum(c[p] * c[q] * ov(p, q) for p in idx for q in idx)
    mean_n = sum(c[p] * c[q] * ov(p, q) * (beta[p][0] * beta[q][0] + beta[p][1] * beta[q][1]) for p in idx for q in idx) / norm
    mean_a1 = sum(c[p] * c[q] * ov(p, q) * beta[q][0] for p in idx for q in idx) / norm
    mean_a2 = sum(c[p] * c[q] * ov(p, q) * beta[q][1] for p in idx for q in idx) / norm
    return float(mean_n - mean_a1**2 - mean_a2**2), float(mean_n)


def pascal(n):
    row = [1]
    for _ in range(n):
        row = [a + b for a, b in zip([0] + row, row + [0])]
    return row


def n_term_literal(n, gamma, nbar, d, r, rp, R, Rp):
    """Numerator term in unfactored form, with the growing exponential formed explicitly."""
    s = 2 * mp.mpf(nbar) + 1
    g2 = mp.mpf(gamma) ** 2
    a, b = r - rp, R - Rp
    k = -8 * mp.mpf(nbar) / s
    binoms = mp.binomial(n, r) * mp.binomial(n, rp) * mp.binomial(n, R) * mp.binomial(n, Rp)
    body = (k + g2 * (a + b) ** 2) * mp.exp(2 * s * g2 * a * b) + k + g2 * (a - b) ** 2
    phis = mp.exp(-((d * a) ** 2)) * mp.exp(-((d * b) ** 2))
    return binoms * mp.exp(-s * g2 * (a + b) ** 2 / 2) * body * phis


def macroscopicity_literal(n, gamma, nbar, d):
    """Unclamped closed form in unfactored form, evaluated at 40 digits."""
    s = 2 * mp.mpf(nbar) + 1
    idx = range(n + 1)
    num = mp.fsum(n_term_literal(n, gamma, nbar, d, r, rp, R, Rp) for r in idx for rp in idx for R in idx for Rp in idx)
    den = mp.fsum(
        mp.binomial(n, r) * mp.binomial(n, rp) * mp.exp(-s * mp.mpf(gamma) ** 2 * (r - rp) ** 2 - (d * (r - rp)) ** 2)
        for r in idx
        for rp in idx
    )
    return num / (8 * s**2 * den**2)


def n1_curve(gamma):
    """Hand reduction of the closed form at N = 1, nbar = d = 0."""
    g2 = mp.mpf(gamma) ** 2
    return g2 * (1 + mp.exp(-g2 / 2)) / (2 * (1 + mp.exp(-g2)) ** 2)
