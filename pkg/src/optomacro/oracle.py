"""Brute-force tensor-grid evaluation of the defining phase-space functional.

The measure is

    I = max(0, -(pi**M / 2) * integral W (sum_m d^2/(da_m da_m*) + M) W)

on the normalized field, with ``d^2/(da da*) = (d^2/dx^2 + d^2/dy^2) / 4``.
Second derivatives are central finite differences of field *values*; the
integral is the trapezoid rule on a uniform tensor grid.  Nothing here uses
the closed-form sums of :mod:`optomacro.measure`.

Two engines evaluate the same discrete sums.  ``"separable"`` writes the
field as a sum of products of 1-D factors (see
:func:`optomacro.wigner.separable_terms`), so the 4-D trapezoid of a product
becomes a product of 1-D trapezoids; this is exact algebra on the discrete
rule, not an approximation.  ``"dense"`` evaluates the field on the full
grid, slab by slab, and is only practical for small grids.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from optomacro.core import DomainError, ModelParams
from optomacro.measure import macroscopicity
from optomacro.wigner import Factor1D, normalization, phonon_number, separable_terms, wigner_raw_grid

FEASIBLE_N = 3
FEASIBLE_GAMMA = 3.0
FEASIBLE_NBAR = 2.0
NORM_GAMMA_CAP = 10.0
MASS_TOLERANCE = 1e-8
RATIO_CV_TOLERANCE = 1e-4
_ZERO = 1e-9

_STENCILS = {
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
}


class QuadratureError(RuntimeError):
    """The grid cannot resolve the field (truncated mass or too coarse a step)."""


@dataclass(frozen=True)
class QuadratureSpec:
    points_per_axis: int = 121
    extent_sigma: float = 8.0
    fd_step: float = 1e-3
    fd_order: int = 4

    def __post_init__(self):
        if self.points_per_axis < 41 or self.points_per_axis % 2 == 0:
            raise DomainError("points_per_axis must be an odd integer >= 41", "points_per_axis")
        if not self.extent_sigma >= 4:
            raise DomainError("extent_sigma must be >= 4", "extent_sigma")
        if not self.fd_step > 0:
            raise DomainError("fd_step must be > 0", "fd_step")
        if self.fd_order not in _STENCILS:
            raise DomainError("fd_order must be 2 or 4", "fd_order")


def check_feasible(params: ModelParams, gamma_cap: float = FEASIBLE_GAMMA) -> None:
    for name, value, cap in (
        ("n_particles", params.n_particles, FEASIBLE_N),
        ("gamma", params.gamma, gamma_cap),
        ("nbar", params.nbar, FEASIBLE_NBAR),
    ):
        if value > cap:
            raise DomainError(f"{name}={value} outside the quadrature-feasible regime (<= {cap})", name)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    h = grid[1] - grid[0]
    w = np.full(grid.size, h)
    w[0] = w[-1] = h / 2
    return w


def second_difference(f: Callable[[np.ndarray], np.ndarray], t: np.ndarray, h: float, order: int) -> np.ndarray:
    offsets, coeffs = _STENCILS[order]
    return sum(c * f(t + o * h) for o, c in zip(offsets, coeffs)) / (h * h)


@dataclass
class FieldIntegrals:
    """Trapezoid integrals of an unnormalized field ``W`` on one grid.

    ``laplacian_overlap`` is the integral of ``W * Laplacian(W)`` over all
    axes; ``second_moment`` integrates ``W * |z|**2``.
    """

    n_modes: int
    norm: float
    second_moment: float
    overlap: float
    laplacian_overlap: float

    @property
    def measure_raw(self) -> float:
        bracket = 0.25 * self.laplacian_overlap + self.n_modes * self.overlap
        return -(math.pi**self.n_modes / 2.0) * bracket / self.norm**2

    @property
    def excitations(self) -> float:
        return self.second_moment / self.norm - self.n_modes / 2.0


class SeparableField:
    """``sum_k weight_k * prod_j factor_kj(z_j)`` on a tensor grid."""

    def __init__(self, terms: Sequence[tuple[float, Sequence[Factor1D]]], grids: Sequence[np.ndarray]):
        self.weights = np.array([w for w, _ in terms])
        self.factors = [fs for _, fs in terms]
        self.grids = [np.asarray(g, dtype=float) for g in grids]
        self.quad = [trapezoid_weights(g) for g in self.grids]

    def missing_mass(self) -> float:
        """Upper bound on the envelope mass outside the grid, relative to the field's total."""
        lost = total = 0.0
        for w, fs in zip(self.weights, self.factors):
            mass = abs(w) * math.prod(f.envelope_mass() for f in fs)
            inside = math.prod(1.0 - f.tail_fraction(g[0], g[-1]) for f, g in zip(fs, self.grids))
            lost += mass * (1.0 - inside)
            total += mass
        return lost / total

    def integrals(self, spec: QuadratureSpec) -> FieldIntegrals:
        ndim = len(self.grids)
        vals, d2 = [], []
        for j, g in enumerate(self.grids):
            vals.append(np.array([fs[j](g) for fs in self.factors]))
            d2.append(np.array([second_difference(fs[j], g, spec.fd_step, spec.fd_order) for fs in self.factors]))
        c = self.weights
        sums = [v @ q for v, q in zip(vals, self.quad)]
        moments = [v @ (q * g**2) for v, q, g in zip(vals, self.quad, self.grids)]
        gram = [(v * q) @ v.T for v, q in zip(vals, self.quad)]
        lap = [(v * q) @ d.T for v, q, d in zip(vals, self.quad, d2)]
        norm = float(c @ np.prod(sums, axis=0))
        second = sum(float(c @ (moments[j] * np.prod([sums[i] for i in range(ndim) if i != j], axis=0))) for j in range(ndim))
        overlap = float(c @ np.prod(gram, axis=0) @ c)
        laplacian = sum(
            float(c @ (lap[j] * np.prod([gram[i] for i in range(ndim) if i != j], axis=0)) @ c) for j in range(ndim)
        )
        return FieldIntegrals(ndim // 2, norm, second, overlap, laplacian)


def plan_grid(params: ModelParams, spec: QuadratureSpec) -> list[np.ndarray]:
    """Axes ``(x1, y1, x2, y2)`` covering every peak centre plus the margin."""
    sigma = math.sqrt(params.s) / 2.0
    margin = spec.extent_sigma * sigma
    top = params.n_particles * params.gamma
    x = np.linspace(-margin, margin, spec.points_per_axis)
    y = np.linspace(-margin, top + margin, spec.points_per_axis)
    grids = [x, y, x, y]
    spacing = min(g[1] - g[0] for g in grids)
    if spec.fd_step > spacing / 4:
        raise QuadratureError(f"fd_step {spec.fd_step} exceeds a quarter of the grid spacing {spacing:.4g}")
    return grids


def _dense_integrals(fn, grids, spec: QuadratureSpec, workers: int = 1) -> FieldIntegrals:
    """Evaluate ``fn(*axes)`` on the full tensor grid, partitioned by slabs of axis 0."""
    ndim = len(grids)
    quad = [trapezoid_weights(g) for g in grids]
    offsets, coeffs = _STENCILS[spec.fd_order]
    h = spec.fd_step

    def axes_for(i):
        out = []
        for j, g in enumerate(grids):
            shape = [1] * ndim
            shape[j] = -1
            out.append((g[i : i + 1] if j == 0 else g).reshape(shape))
        return out

    def slab(i):
        axes = axes_for(i)
        wt = np.ones(())
        for j, q in enumerate(quad):
            shape = [1] * ndim
            shape[j] = -1
            wt = wt * (q[i : i + 1] if j == 0 else q).reshape(shape)
        w = fn(*axes)
        lap = np.zeros_like(w)
        for j in range(ndim):
            for o, c in zip(offsets, coeffs):
                if o == 0:
                    lap += c * w
                else:
                    shifted = list(axes)
                    shifted[j] = axes[j] + o * h
                    lap += c * fn(*shifted)
        lap /= h * h
        r2 = sum(a**2 for a in axes)
        return (float((wt * w).sum()), float((wt * w * r2).sum()), float((wt * w * w).sum()), float((wt * w * lap).sum()))

    idx = range(grids[0].size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(slab, idx))
    else:
        parts = [slab(i) for i in idx]
    cols = [math.fsum(p[k] for p in parts) for k in range(4)]
    return FieldIntegrals(ndim // 2, *cols)


def field_integrals(
    params: ModelParams, spec: QuadratureSpec, engine: str = "separable", workers: int = 1, gamma_cap: float = FEASIBLE_GAMMA
) -> FieldIntegrals:
    check_feasible(params, gamma_cap)
    grids = plan_grid(params, spec)
    sep = SeparableField(separable_terms(params), grids)
    lost = sep.missing_mass()
    if lost > MASS_TOLERANCE:
        raise QuadratureError(f"grid misses a fraction {lost:.3g} of the normalization mass; raise extent_sigma")
    if engine == "separable":
        return sep.integrals(spec)
    if engine == "dense":
        # axis order of the grid is (x1, y1, x2, y2)
        return _dense_integrals(lambda x1, y1, x2, y2: wigner_raw_grid(params, x1, y1, x2, y2), grids, spec, workers)
    raise ValueError(f"unknown engine {engine!r}")


def measure_by_quadrature(
    params: ModelParams, spec: QuadratureSpec | None = None, raw: bool = False, engine: str = "separable", workers: int = 1
) -> float:
    """Measure on the grid; ``raw=True`` skips the clamp at zero."""
    value = field_integrals(params, spec or QuadratureSpec(), engine, workers).measure_raw
    return value if raw else max(0.0, value)


def phonons_by_quadrature(params: ModelParams, spec: QuadratureSpec | None = None, engine: str = "separable") -> float:
    return field_integrals(params, spec or QuadratureSpec(), engine).excitations


def norm_by_quadrature(params: ModelParams, spec: QuadratureSpec | None = None, engine: str = "separable") -> float:
    # no derivatives enter the norm, so the kick cap that protects the Laplacian is relaxed
    return field_integrals(params, spec or QuadratureSpec(), engine, gamma_cap=NORM_GAMMA_CAP).norm


# single-mode even cat |alpha> + |-alpha>


def cat_field(alpha: float, spec: QuadratureSpec) -> SeparableField:
    """Normalized Wigner function of the even cat state for real ``alpha``.

    Axes ``(x, y)``; vacuum variance 1/4 per quadrature.
    """
    norm = 1.0 / (2.0 + 2.0 * math.exp(-2.0 * alpha * alpha))
    c = 2.0 / math.pi * norm
    terms = [
        (c, (Factor1D(alpha, 1.0, 0.0), Factor1D(0.0, 1.0, 0.0))),
        (c, (Factor1D(-alpha, 1.0, 0.0), Factor1D(0.0, 1.0, 0.0))),
        (2.0 * c, (Factor1D(0.0, 1.0, 0.0), Factor1D(0.0, 1.0, 4.0 * alpha))),
    ]
    margin = spec.extent_sigma * 0.5
    x = np.linspace(-alpha - margin, alpha + margin, spec.points_per_axis)
    y = np.linspace(-margin, margin, spec.points_per_axis)
    return SeparableField(terms, [x, y])


def cat_mean_excitation(alpha: float, cutoff: int | None = None) -> float:
    """<n> of the normalized even cat from its Fock amplitudes alpha**n / sqrt(n!), n even."""
    if cutoff is None:
        cutoff = int(4 * alpha * alpha + 40)
    n = np.arange(0, cutoff + 1, 2)
    log_p = 2 * n * math.log(alpha) - np.array([math.lgamma(k + 1) for k in n])
    p = np.exp(log_p - log_p.max())
    return float(math.fsum((n * p).tolist()) / math.fsum(p.tolist()))


def single_mode_cat_calibration(alpha: float, spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """``(measure, mean excitation)`` for the even cat; they should agree."""
    if not 0.5 <= alpha <= 3.0:
        raise DomainError(f"alpha must lie in [0.5, 3], got {alpha}", "alpha")
    spec = spec or QuadratureSpec()
    cat = cat_field(alpha, spec)
    if cat.missing_mass() > MASS_TOLERANCE:
        raise QuadratureError("cat grid misses normalization mass; raise extent_sigma")
    ints = cat.integrals(spec)
    return max(0.0, ints.measure_raw), cat_mean_excitation(alpha)


# closed form versus quadrature


@dataclass(frozen=True)
class ConsistencyRow:
    """Closed-form and quadrature values at one parameter point.

    ``i_closed``/``i_quad`` are the clamped measures and ``ratio`` their
    quotient; when the quadrature value is zero (below 1e-9) the ratio is NaN
    and ``indeterminate`` is set.  The unclamped values are kept alongside.
    """

    params: ModelParams
    i_closed: float
    i_quad: float
    ratio: float
    nph_closed: float
    nph_quad: float
    norm_closed: float
    norm_quad: float
    i_closed_raw: float
    i_quad_raw: float
    indeterminate: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {k: getattr(self.params, k) for k in ("n_particles", "gamma", "nbar", "d_factor")}
        return d


@dataclass
class ConsistencyReport:
    rows: list[ConsistencyRow]
    summary: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    @property
    def ratio_cv(self) -> float:
        return self.summary.get("ratio_cv", math.nan)

    def to_dict(self) -> dict:
        return {"summary": self.summary, "rows": [r.to_dict() for r in self.rows]}


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(b), 1e-300)


def consistency_row(params: ModelParams, spec: QuadratureSpec) -> ConsistencyRow:
    try:
        ints = field_integrals(params, spec)
    except (DomainError, QuadratureError) as exc:
        raise type(exc)(f"{exc} [at {params}]") from exc
    closed = macroscopicity(params)
    i_quad_raw = ints.measure_raw
    i_closed, i_quad = closed.value, max(0.0, i_quad_raw)
    if i_quad <= _ZERO:
        ratio, indeterminate = math.nan, True
    else:
        ratio, indeterminate = i_closed / i_quad, False
    return ConsistencyRow(
        params=params,
        i_closed=i_closed,
        i_quad=i_quad,
        ratio=ratio,
        nph_closed=phonon_number(params),
        nph_quad=ints.excitations,
        norm_closed=normalization(params),
        norm_quad=ints.norm,
        i_closed_raw=closed.raw_value,
        i_quad_raw=i_quad_raw,
        indeterminate=indeterminate,
    )


def summarize(rows: Sequence[ConsistencyRow]) -> dict:
    ratios = [r.ratio for r in rows if not r.indeterminate]
    summary = {
        "n_rows": len(rows),
        "n_indeterminate": len(rows) - len(ratios),
        "defined": bool(ratios),
        "mean_ratio": None,
        "ratio_cv": None,
        "ratio_cv_tolerance": RATIO_CV_TOLERANCE,
        "constant_ratio": None,
        "constant_factor_discrepancy": None,
        "max_norm_rel_err": max((_rel(r.norm_closed, r.norm_quad) for r in rows), default=None),
        "max_nph_rel_err": max((_rel(r.nph_closed, r.nph_quad) for r in rows if r.nph_quad > _ZERO), default=None),
        "max_nph_abs_err": max((abs(r.nph_closed - r.nph_quad) for r in rows), default=None),
    }
    if ratios:
        mean = statistics.fmean(ratios)
        cv = statistics.pstdev(ratios) / abs(mean) if len(ratios) > 1 else 0.0
        summary.update(
            mean_ratio=mean,
            ratio_cv=cv,
            constant_ratio=cv < RATIO_CV_TOLERANCE,
            constant_factor_discrepancy=cv < RATIO_CV_TOLERANCE and abs(mean - 1.0) > RATIO_CV_TOLERANCE,
        )
    return summary


def consistency_report(grid: Sequence[ModelParams], spec: QuadratureSpec | None = None, workers: int = 1) -> ConsistencyReport:
    spec = spec or QuadratureSpec()
    for p in grid:
        check_feasible(p)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: consistency_row(p, spec), grid))
    else:
        rows = [consistency_row(p, spec) for p in grid]
    return ConsistencyReport(rows, summarize(rows))
