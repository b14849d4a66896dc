"""The two-mirror Wigner function, its normalization and its phonon number.

The field is a double sum over path indices ``(r, r')``.  Each term is a
Gaussian of variance ``s/4`` per quadrature, centred at
``(0, gamma*(2N - r - r')/2)`` for mirror 1 and ``(0, gamma*(r + r')/2)``
for mirror 2, modulated by ``cos(2*gamma*(r - r')*(x1 - x2))``.  Off-diagonal
terms carry the dephasing weight ``phi(r - r')``.  The field as written
integrates to :func:`normalization`, not to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from optomacro.core import ModelParams, exp_sum_partial, log_binomial, merge_partials

DEPHASING_NOTE = (
    "dephasing weight exp(-(d*(r-r'))**2) applied to every (r, r') term of the "
    "two-mirror Wigner function, so normalization, phonon number and measure "
    "all refer to the same dephased state"
)


@dataclass(frozen=True)
class PhasePoint:
    a1_re: float
    a1_im: float
    a2_re: float
    a2_im: float

    def __post_init__(self):
        for name in ("a1_re", "a1_im", "a2_re", "a2_im"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


class TermTable(NamedTuple):
    """Per-term data for all (N+1)**2 index pairs, flattened row-major in (r, r')."""

    r: np.ndarray
    r_prime: np.ndarray
    log_weight: np.ndarray  # log[C(N,r) C(N,r') / C(2N,N)] - (d*(r-r'))**2
    c1: np.ndarray
    c2: np.ndarray
    freq: np.ndarray  # 2*gamma*(r - r')


def term_table(params: ModelParams) -> TermTable:
    n = params.n_particles
    idx = np.arange(n + 1)
    log_c = np.array([log_binomial(n, k) for k in idx])
    r, rp = (a.ravel() for a in np.meshgrid(idx, idx, indexing="ij"))
    diff = (r - rp).astype(float)
    g = params.gamma
    return TermTable(
        r=r,
        r_prime=rp,
        log_weight=log_c[r] + log_c[rp] - log_binomial(2 * n, n) - (params.d_factor * diff) ** 2,
        c1=g * (2 * n - r - rp) / 2.0,
        c2=g * (r + rp) / 2.0,
        freq=2.0 * g * diff,
    )


def peak_centers(params: ModelParams) -> list[tuple[float, float]]:
    """Momentum-quadrature centres ``(c1_im, c2_im)`` of every (r, r') term."""
    t = term_table(params)
    return [(float(a), float(b)) for a, b in zip(t.c1, t.c2)]


def _term_values(params, x1, y1, x2, y2):
    """Stack of individual term values, leading axis over (r, r')."""
    t = term_table(params)
    s = params.s
    shape = (-1,) + (1,) * np.broadcast(x1, y1, x2, y2).ndim
    x1, y1, x2, y2 = (np.asarray(v, dtype=float) for v in (x1, y1, x2, y2))
    quad = x1**2 + x2**2 + (y1 - t.c1.reshape(shape)) ** 2 + (y2 - t.c2.reshape(shape)) ** 2
    expo = t.log_weight.reshape(shape) - (2.0 / s) * quad
    prefactor = 4.0 / (math.pi**2 * s**2)
    return prefactor * np.exp(expo) * np.cos(t.freq.reshape(shape) * (x1 - x2))


def wigner_raw_grid(params: ModelParams, x1, y1, x2, y2) -> np.ndarray:
    """Vectorised field; arguments broadcast against each other.

    ``x`` are the real and ``y`` the imaginary quadratures of each mirror.
    """
    return _term_values(params, x1, y1, x2, y2).sum(axis=0)


def wigner_raw(params: ModelParams, point: PhasePoint) -> float:
    vals = _term_values(params, point.a1_re, point.a1_im, point.a2_re, point.a2_im)
    return math.fsum(vals.tolist())


def normalization(params: ModelParams) -> float:
    """Integral of the unnormalized field over all four quadratures.

    Each term integrates to its binomial weight times
    ``exp(-s*gamma**2*(r-r')**2)``; the sum is divided by C(2N, N).
    """
    t = term_table(params)
    diff2 = (t.r - t.r_prime).astype(float) ** 2
    return merge_partials([exp_sum_partial(np.ones_like(diff2), t.log_weight - params.s * params.gamma**2 * diff2)])


def wigner_normalized(params: ModelParams, point: PhasePoint) -> float:
    return wigner_raw(params, point) / normalization(params)


def phonon_number(params: ModelParams) -> float:
    """Mean total phonon number of the normalized state.

    Uses <|a1|^2 + |a2|^2> - 1 of the normalized field.  Per term, relative to
    its own integral, the second moment is
    ``s - s**2*gamma**2*(r-r')**2/2 + c1**2 + c2**2``: the quadrature
    variances, the peak offsets, and the cosine's negative curvature along
    ``x1 - x2``.
    """
    t = term_table(params)
    s, g = params.s, params.gamma
    diff2 = (t.r - t.r_prime).astype(float) ** 2
    expo = t.log_weight - s * g**2 * diff2
    moment = s - 0.5 * s**2 * g**2 * diff2 + t.c1**2 + t.c2**2
    num_s, num_m = exp_sum_partial(moment, expo)
    den_s, den_m = exp_sum_partial(np.ones_like(expo), expo)
    return num_s / den_s * math.exp(num_m - den_m) - 1.0


class Factor1D(NamedTuple):
    """``exp(-2 (t - center)**2 / s) * trig(freq * t)`` with trig cos or sin."""

    center: float
    s: float
    freq: float
    sine: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        env = np.exp(-2.0 / self.s * (t - self.center) ** 2)
        if self.freq == 0.0:
            return env if not self.sine else np.zeros_like(env)
        trig = np.sin if self.sine else np.cos
        return env * trig(self.freq * t)

    def envelope_mass(self) -> float:
        return math.sqrt(math.pi * self.s / 2.0)

    def tail_fraction(self, lo: float, hi: float) -> float:
        """Fraction of the envelope's mass lying outside ``[lo, hi]``."""
        k = math.sqrt(2.0 / self.s)
        return 0.5 * (math.erfc((hi - self.center) * k) + math.erfc((self.center - lo) * k))


def separable_terms(params: ModelParams) -> list[tuple[float, tuple[Factor1D, ...]]]:
    """Write the unnormalized field as a sum of products of 1-D factors.

    Axis order is ``(x1, y1, x2, y2)``.  ``cos(k(x1 - x2))`` splits into
    ``cos kx1 cos kx2 + sin kx1 sin kx2``, so each (r, r') term yields one or
    two rank-one products.
    """
    t = term_table(params)
    s = params.s
    prefactor = 4.0 / (math.pi**2 * s**2)
    out = []
    for w, c1, c2, k in zip(t.log_weight, t.c1, t.c2, t.freq):
        weight = prefactor * math.exp(w)
        y1, y2 = Factor1D(float(c1), s, 0.0), Factor1D(float(c2), s, 0.0)
        out.append((weight, (Factor1D(0.0, s, float(k)), y1, Factor1D(0.0, s, float(k)), y2)))
        if k != 0.0:
            out.append((weight, (Factor1D(0.0, s, float(k), True), y1, Factor1D(0.0, s, float(k), True), y2)))
    return out
