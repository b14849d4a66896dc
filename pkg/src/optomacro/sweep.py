"""Parameter sweeps and the figure presets."""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from optomacro.core import DomainError, ModelParams, thermal_occupation_from_ratio
from optomacro.measure import macroscopicity
from optomacro.oracle import QuadratureError, QuadratureSpec, check_feasible, field_integrals
from optomacro.wigner import normalization, phonon_number

PARAMETERS = ("n_particles", "gamma", "nbar", "temperature_ratio", "d_factor")
METHODS = ("closed_form", "quadrature", "both")
CSV_COLUMNS = ("row_index", "n_particles", "gamma", "nbar", "d_factor", "i_raw", "i_value", "n_ph", "z_norm", "method")


@dataclass(frozen=True)
class SweepRow:
    row_index: int
    n_particles: int
    gamma: float
    nbar: float
    d_factor: float
    i_raw: float
    i_value: float
    n_ph: float
    z_norm: float
    method: str


@dataclass
class SweepSpec:
    """Cartesian sweep over ``axes`` with the remaining parameters in ``fixed``.

    The thermal parameter is given either as ``nbar`` or as
    ``temperature_ratio`` (hbar*omega/(k_B T)), never both.  Rows are ordered
    with the first axis outermost.
    """

    axes: list[tuple[str, list]]
    fixed: dict[str, float] = field(default_factory=dict)
    method: str = "closed_form"
    out: Path | None = None
    format: str | None = None
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    nph_at_zero_dephasing: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = [(str(name), list(values)) for name, values in self.axes]
        names = [n for n, _ in self.axes] + list(self.fixed)
        for name in names:
            if name not in PARAMETERS:
                raise DomainError(f"unknown sweep parameter {name!r}", name)
        for name in set(names):
            if names.count(name) > 1:
                raise DomainError(f"parameter {name!r} given more than once", name)
        thermal = [n for n in names if n in ("nbar", "temperature_ratio")]
        if len(thermal) != 1:
            raise DomainError("exactly one of nbar or temperature_ratio must be given", "nbar")
        for name in ("n_particles", "gamma", "d_factor"):
            if name not in names:
                raise DomainError(f"parameter {name!r} missing from axes and fixed values", name)
        for name, values in self.axes:
            if not values:
                raise DomainError(f"axis {name!r} has no values", name)
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}", "method")
        points = self.points()  # validates every combination
        if self.method != "closed_form":
            for p in points:
                check_feasible(p)

    @property
    def axis_names(self) -> list[str]:
        return [n for n, _ in self.axes]

    def points(self) -> list[ModelParams]:
        out = []
        names = self.axis_names
        for combo in itertools.product(*(v for _, v in self.axes)):
            values = dict(self.fixed)
            values.update(zip(names, combo))
            out.append(params_from_values(values))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        axes = []
        for item in data.get("axes", []):
            if isinstance(item, dict):
                axes.append((item["name"], item["values"]))
            else:
                axes.append((item[0], item[1]))
        output = data.get("output", {})
        quad = data.get("quadrature")
        return cls(
            axes=axes,
            fixed=dict(data.get("fixed", {})),
            method=data.get("method", "closed_form"),
            out=Path(output["path"]) if output.get("path") else None,
            format=output.get("format"),
            quadrature=QuadratureSpec(**quad) if quad else QuadratureSpec(),
            nph_at_zero_dephasing=bool(data.get("nph_at_zero_dephasing", False)),
            meta=dict(data.get("meta", {})),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "SweepSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def params_from_values(values: dict[str, Any]) -> ModelParams:
    nbar = values.get("nbar")
    if "temperature_ratio" in values:
        nbar = thermal_occupation_from_ratio(values["temperature_ratio"])
    n = values["n_particles"]
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    return ModelParams(n, values["gamma"], nbar, values["d_factor"])


def evaluate_point(params: ModelParams, method: str, quadrature: QuadratureSpec | None = None, nph_at_zero_dephasing: bool = False) -> list[dict]:
    """Unindexed row dicts for one parameter point (two when ``method='both'``)."""
    base = dict(n_particles=params.n_particles, gamma=params.gamma, nbar=params.nbar, d_factor=params.d_factor)
    out = []
    try:
        if method in ("closed_form", "both"):
            res = macroscopicity(params)
            nph_params = ModelParams(params.n_particles, params.gamma, params.nbar, 0.0) if nph_at_zero_dephasing else params
            out.append(dict(base, i_raw=res.raw_value, i_value=res.value, n_ph=phonon_number(nph_params), z_norm=normalization(params), method="closed_form"))
        if method in ("quadrature", "both"):
            ints = field_integrals(params, quadrature or QuadratureSpec())
            raw = ints.measure_raw
            out.append(dict(base, i_raw=raw, i_value=max(0.0, raw), n_ph=ints.excitations, z_norm=ints.norm, method="quadrature"))
    except (DomainError, QuadratureError) as exc:
        raise DomainError(f"sweep point {base} failed: {exc}", getattr(exc, "field", None)) from exc
    for row in out:
        for key in ("i_raw", "i_value", "n_ph", "z_norm"):
            if not np.isfinite(row[key]):
                raise DomainError(f"sweep point {base} produced non-finite {key}", key)
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    points = spec.points()

    def work(p):
        return evaluate_point(p, spec.method, spec.quadrature, spec.nph_at_zero_dephasing)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, points))
    else:
        results = [work(p) for p in points]
    rows = []
    for group in results:
        for d in group:
            rows.append(SweepRow(row_index=len(rows), **d))
    return rows


# figure presets

FIGURES = ("fig2", "fig3", "fig4", "fig5")
_N_RANGE = list(range(1, 9))
_NBAR_GRID = [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0]
_TEMPERATURE_RATIOS = [8.0, 4.0, 2.0, 1.0, 0.7, 0.5, 0.3, 0.2, 0.15, 0.1]
_D_GRID = [round(0.05 * k, 2) for k in range(61)]


def figure_spec(fig_id: str, temperature_axis: bool = False) -> SweepSpec:
    """Preset sweep for one figure; chosen grids are recorded in ``meta``."""
    if fig_id == "fig2":
        spec = SweepSpec([("n_particles", _N_RANGE), ("nbar", [0.0, 10.0])], {"gamma": 10.0, "d_factor": 0.0})
    elif fig_id == "fig3":
        spec = SweepSpec([("n_particles", _N_RANGE), ("gamma", [1.0, 10.0])], {"nbar": 0.0, "d_factor": 0.0})
    elif fig_id == "fig4":
        thermal = ("temperature_ratio", _TEMPERATURE_RATIOS) if temperature_axis else ("nbar", _NBAR_GRID)
        spec = SweepSpec([thermal, ("gamma", [1.0, 10.0])], {"n_particles": 5, "d_factor": 0.0})
    elif fig_id == "fig5":
        # range extends past d = 1.5 so the gamma = 10 / gamma = 1 crossover (d ~ 2.4) is included
        spec = SweepSpec(
            [("d_factor", _D_GRID), ("gamma", [1.0, 2.0, 10.0])],
            {"n_particles": 5, "nbar": 0.0},
            nph_at_zero_dephasing=True,
        )
    else:
        raise DomainError(f"unknown figure id {fig_id!r}; expected one of {FIGURES}", "fig_id")
    spec.meta = {
        "figure": fig_id,
        "axes": {name: values for name, values in spec.axes},
        "fixed": dict(spec.fixed),
        "grid_note": "axis ranges chosen to bracket the plotted trends; not recovered point-for-point",
    }
    if spec.nph_at_zero_dephasing:
        spec.meta["n_ph_note"] = "n_ph evaluated at d_factor = 0 (reference curves)"
    return spec


def figure_dataset(fig_id: str, temperature_axis: bool = False, workers: int = 1) -> list[SweepRow]:
    return run_sweep(figure_spec(fig_id, temperature_axis), workers)


def series(rows: Sequence[SweepRow], x: str, by: str, value: str = "i_value") -> dict[float, list[tuple[float, float]]]:
    """Group ``(x, value)`` pairs by the ``by`` column, preserving row order."""
    out: dict[float, list[tuple[float, float]]] = {}
    for row in rows:
        out.setdefault(getattr(row, by), []).append((getattr(row, x), getattr(row, value)))
    return out
