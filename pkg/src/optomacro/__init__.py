"""Macroscopicity of the two-mirror state produced by a matter-wave/optomechanics interface."""

from optomacro.core import (
    BathSpec,
    DomainError,
    ModelParams,
    binomial_exact,
    log_binomial,
    make_params,
    stable_weighted_exp_sum,
    thermal_occupation,
    thermal_occupation_from_ratio,
)
from optomacro.measure import MacroResult, d_term, macroscopicity, n_term, phi
from optomacro.wigner import (
    PhasePoint,
    normalization,
    peak_centers,
    phonon_number,
    wigner_normalized,
    wigner_raw,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "DomainError",
    "MacroResult",
    "ModelParams",
    "PhasePoint",
    "binomial_exact",
    "d_term",
    "log_binomial",
    "macroscopicity",
    "make_params",
    "n_term",
    "normalization",
    "peak_centers",
    "phi",
    "phonon_number",
    "stable_weighted_exp_sum",
    "thermal_occupation",
    "thermal_occupation_from_ratio",
    "wigner_normalized",
    "wigner_raw",
]
