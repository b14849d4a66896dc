"""Parameter records, the thermal occupation map and overflow-safe scalar helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

#: Largest particle number for which the quadruple sum is supported.
MAX_PARTICLES = 60


class DomainError(ValueError):
    """An input lies outside the range an operation accepts.

    ``field`` names the offending argument so the CLI can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def _check_real(name: str, value: float, minimum: float = 0.0) -> float:
    value = float(value)
    if not math.isfinite(value) or value < minimum:
        raise DomainError(f"{name} must be a finite real >= {minimum:g}, got {value!r}", name)
    return value


@dataclass(frozen=True)
class ModelParams:
    n_particles: int
    gamma: float
    nbar: float
    d_factor: float = 0.0
    s: float = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_particles
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError(f"n_particles must be an integer >= 1, got {n!r}", "n_particles")
        object.__setattr__(self, "n_particles", int(n))
        for name in ("gamma", "nbar", "d_factor"):
            object.__setattr__(self, name, _check_real(name, getattr(self, name)))
        object.__setattr__(self, "s", 2.0 * self.nbar + 1.0)


def make_params(n_particles: int, gamma: float, nbar: float, d_factor: float = 0.0) -> ModelParams:
    return ModelParams(n_particles, gamma, nbar, d_factor)


@dataclass(frozen=True)
class BathSpec:
    """Mechanical frequency (rad/s) and bath temperature (K)."""

    omega_m: float
    temperature: float

    def __post_init__(self):
        if not (math.isfinite(self.omega_m) and self.omega_m > 0):
            raise DomainError(f"omega_m must be > 0, got {self.omega_m!r}", "omega_m")
        _check_real("temperature", self.temperature)

    @property
    def ratio(self) -> float:
        """hbar * omega_m / (k_B T); infinite at T = 0."""
        if self.temperature == 0:
            return math.inf
        return HBAR * self.omega_m / (K_B * self.temperature)


def thermal_occupation_from_ratio(ratio: float) -> float:
    """Bose-Einstein occupation for the dimensionless ratio hbar*omega/(k_B T)."""
    ratio = float(ratio)
    if math.isnan(ratio) or ratio <= 0:
        raise DomainError(f"temperature_ratio must be > 0, got {ratio!r}", "temperature_ratio")
    if ratio > 745.0:
        # expm1 overflows long before the occupation stops being representable
        return math.exp(-ratio)
    return 1.0 / math.expm1(ratio)


def thermal_occupation(bath: BathSpec) -> float:
    if bath.temperature == 0:
        return 0.0
    return thermal_occupation_from_ratio(bath.ratio)


def _check_pair(n: int, k: int) -> None:
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"binomial requires 0 <= k <= n, got n={n}, k={k}", "k")


def binomial_exact(n: int, k: int) -> int:
    _check_pair(n, k)
    return math.comb(n, k)


def log_binomial(n: int, k: int) -> float:
    _check_pair(n, k)
    # math.log of an exact integer is correctly rounded even past 2**1024
    return math.log(math.comb(n, k))


def stable_weighted_exp_sum(terms: Iterable[Sequence[float]] | np.ndarray) -> float:
    """Return sum(c * exp(e)) over ``(c, e)`` pairs without overflow.

    The largest exponent is factored out so every summand is at most
    ``|c|``, and the scaled summands are added with ``math.fsum``.  The
    result is recombined in log space, so it is finite whenever the true
    value is representable.
    """
    arr = np.asarray(terms if isinstance(terms, np.ndarray) else list(terms), dtype=float)
    if arr.size == 0:
        return 0.0
    arr = arr.reshape(-1, 2)
    coeffs, exponents = arr[:, 0], arr[:, 1]
    live = coeffs != 0
    if not live.any():
        return 0.0
    shift = float(exponents[live].max())
    scaled = math.fsum((coeffs[live] * np.exp(exponents[live] - shift)).tolist())
    return _recombine(scaled, shift)


def _recombine(scaled: float, shift: float) -> float:
    if scaled == 0.0:
        return 0.0
    log_mag = shift + math.log(abs(scaled))
    if log_mag > 709.78:
        return math.copysign(math.inf, scaled)
    return math.copysign(math.exp(log_mag), scaled)


def exp_sum_partial(coeffs: np.ndarray, exponents: np.ndarray) -> tuple[float, float]:
    """Scaled partial sum ``(S, m)`` with sum(c*exp(e)) == S*exp(m).

    Partials from disjoint slices are merged with :func:`merge_partials`.
    """
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    exponents = np.asarray(exponents, dtype=float).ravel()
    live = coeffs != 0
    if not live.any():
        return 0.0, -math.inf
    shift = float(exponents[live].max())
    return math.fsum((coeffs[live] * np.exp(exponents[live] - shift)).tolist()), shift


def merge_partials(partials: Iterable[tuple[float, float]]) -> float:
    partials = [(s, m) for s, m in partials if s != 0.0]
    if not partials:
        return 0.0
    shift = max(m for _, m in partials)
    return _recombine(math.fsum(s * math.exp(m - shift) for s, m in partials), shift)
