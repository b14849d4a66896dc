"""Closed-form macroscopicity from the quadruple index sum.

With ``a = r - r'``, ``b = R - R'`` and ``s = 2*nbar + 1`` each numerator
term is

    C(N,r) C(N,r') C(N,R) C(N,R') phi(a) phi(b) * (
        (k + gamma**2 (a+b)**2) * exp(-s gamma**2 (a-b)**2 / 2)
      + (k + gamma**2 (a-b)**2) * exp(-s gamma**2 (a+b)**2 / 2))

with ``k = -8 nbar / s``.  Both exponents are non-positive; the growing
factor ``exp(2 s gamma**2 a b)`` is never formed on its own, since it reaches
exp(5000) at gamma = 10, N = 5.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from optomacro.core import (
    MAX_PARTICLES,
    DomainError,
    ModelParams,
    exp_sum_partial,
    log_binomial,
    merge_partials,
    stable_weighted_exp_sum,
)


@dataclass(frozen=True)
class MacroResult:
    raw_value: float
    value: float
    numerator: float
    denominator: float
    n_terms: int


@dataclass(frozen=True)
class DeltaPair:
    """Class of index tuples sharing ``a = r - r'`` and ``b = R - R'``.

    ``weight`` is the exact aggregated binomial weight of the class,
    ``sum C(N,r)C(N,r')C(N,R)C(N,R')`` over its ``multiplicity`` tuples.
    """

    a: int
    b: int
    multiplicity: int
    weight: int


def phi(r: float, d_factor: float) -> float:
    return math.exp(-((d_factor * r) ** 2))


def d_term(params: ModelParams, r: int, r_prime: int) -> float:
    _check_indices(params, r, r_prime)
    n = params.n_particles
    a = r - r_prime
    expo = -(params.s * params.gamma**2 + params.d_factor**2) * a * a
    if abs(expo) > 700.0:
        return math.exp(log_binomial(n, r) + log_binomial(n, r_prime) + expo)
    return math.comb(n, r) * math.comb(n, r_prime) * math.exp(expo)


def _bracket_terms(params: ModelParams, a, b):
    """Coefficients and exponents of the two addends for difference pairs (a, b)."""
    s, g2 = params.s, params.gamma**2
    k = -8.0 * params.nbar / s
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    plus2, minus2 = (a + b) ** 2, (a - b) ** 2
    damp = -(params.d_factor**2) * (a * a + b * b)
    return (
        (k + g2 * plus2, -0.5 * s * g2 * minus2 + damp),
        (k + g2 * minus2, -0.5 * s * g2 * plus2 + damp),
    )


def n_term(params: ModelParams, r: int, r_prime: int, R: int, R_prime: int) -> float:
    _check_indices(params, r, r_prime, R, R_prime)
    n = params.n_particles
    log_w = math.log(math.comb(n, r) * math.comb(n, r_prime) * math.comb(n, R) * math.comb(n, R_prime))
    (c1, e1), (c2, e2) = _bracket_terms(params, r - r_prime, R - R_prime)
    return stable_weighted_exp_sum([(float(c1), log_w + float(e1)), (float(c2), log_w + float(e2))])


def delta_pairs(n_particles: int) -> Iterator[DeltaPair]:
    """Aggregate the (N+1)**4 index tuples into (2N+1)**2 difference classes.

    Classes are yielded by descending dominant exponent, i.e. ascending
    ``(|a+b|, |a-b|)``.
    """
    n = n_particles
    single: dict[int, tuple[int, int]] = {}
    for r in range(n + 1):
        for rp in range(n + 1):
            m, w = single.get(r - rp, (0, 0))
            single[r - rp] = (m + 1, w + math.comb(n, r) * math.comb(n, rp))
    keys = sorted(((a, b) for a in single for b in single), key=lambda ab: (abs(ab[0] + ab[1]), abs(ab[0] - ab[1]), ab))
    for a, b in keys:
        yield DeltaPair(a, b, single[a][0] * single[b][0], single[a][1] * single[b][1])


def _denominator_log_sum(params: ModelParams) -> tuple[float, float]:
    """Scaled partial of sum_{r,r'} D(r,r') phi(r-r') / C(2N,N)."""
    n = params.n_particles
    idx = np.arange(n + 1)
    log_c = np.array([log_binomial(n, k) for k in idx]) - 0.5 * log_binomial(2 * n, n)
    a = (idx[:, None] - idx[None, :]).astype(float)
    expo = log_c[:, None] + log_c[None, :] - (params.s * params.gamma**2 + params.d_factor**2) * a * a
    return exp_sum_partial(np.ones(expo.size), expo)


def _numerator_grouped(params: ModelParams) -> tuple[float, int]:
    scale = 2.0 * log_binomial(2 * params.n_particles, params.n_particles)
    pairs = list(delta_pairs(params.n_particles))
    a = np.array([p.a for p in pairs])
    b = np.array([p.b for p in pairs])
    log_w = np.array([math.log(p.weight) for p in pairs]) - scale
    (c1, e1), (c2, e2) = _bracket_terms(params, a, b)
    partial = exp_sum_partial(np.concatenate([c1, c2]), np.concatenate([e1 + log_w, e2 + log_w]))
    return merge_partials([partial]), len(pairs)


def _numerator_slab(params: ModelParams, r: int, log_c: np.ndarray) -> tuple[float, float]:
    n = params.n_particles
    idx = np.arange(n + 1)
    rp, R, Rp = np.meshgrid(idx, idx, idx, indexing="ij")
    log_w = log_c[r] + log_c[rp] + log_c[R] + log_c[Rp]
    (c1, e1), (c2, e2) = _bracket_terms(params, r - rp, R - Rp)
    return exp_sum_partial(np.concatenate([c1.ravel(), c2.ravel()]), np.concatenate([(e1 + log_w).ravel(), (e2 + log_w).ravel()]))


def _numerator_naive(params: ModelParams, workers: int = 1) -> tuple[float, int]:
    n = params.n_particles
    log_c = np.array([log_binomial(n, k) for k in range(n + 1)]) - 0.5 * log_binomial(2 * n, n)
    rows = range(n + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda r: _numerator_slab(params, r, log_c), rows))
    else:
        partials = [_numerator_slab(params, r, log_c) for r in rows]
    return merge_partials(partials), (n + 1) ** 4


def macroscopicity(params: ModelParams, method: str = "grouped", workers: int = 1) -> MacroResult:
    """Evaluate the measure and its unclamped value.

    ``method="naive"`` runs the full quadruple loop, partitioned by ``r``
    (optionally over ``workers`` threads, reduced in ascending ``r``);
    ``"grouped"`` sums over :class:`DeltaPair` classes.  Both scale all
    binomial weights by C(2N, N) internally.
    """
    n = params.n_particles
    if n > MAX_PARTICLES:
        raise DomainError(f"n_particles must be <= {MAX_PARTICLES}, got {n}", "n_particles")
    if method == "grouped":
        num_scaled, n_terms = _numerator_grouped(params)
    elif method == "naive":
        num_scaled, n_terms = _numerator_naive(params, workers)
    else:
        raise ValueError(f"unknown summation method {method!r}")
    den_s, den_m = _denominator_log_sum(params)
    s = params.s
    # num_scaled / (8 s^2 (den_s e^den_m)^2), staying in log space for the scale
    raw = num_scaled / (8.0 * s * s * den_s * den_s) * math.exp(-2.0 * den_m)
    log_c2n = log_binomial(2 * n, n)
    numerator = num_scaled * math.exp(2.0 * log_c2n)
    denominator = 8.0 * s * s * (den_s * math.exp(den_m + log_c2n)) ** 2
    return MacroResult(raw_value=raw, value=max(0.0, raw), numerator=numerator, denominator=denominator, n_terms=n_terms)


def _check_indices(params: ModelParams, *indices: int) -> None:
    for i in indices:
        if not 0 <= i <= params.n_particles:
            raise DomainError(f"index {i} outside [0, {params.n_particles}]", "index")
