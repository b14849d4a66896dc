"""Writers and readers for sweep rows (CSV, JSON, single-panel SVG)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

from optomacro.core import DomainError
from optomacro.sweep import CSV_COLUMNS, SweepRow, series
from optomacro.wigner import DEPHASING_NOTE

FORMATS = ("csv", "json", "svg-plot")
_INT_COLUMNS = ("row_index", "n_particles")


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def rows_to_csv(rows: Sequence[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])


def read_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [_row_from_mapping(r) for r in reader]


def _row_from_mapping(m: dict) -> SweepRow:
    kwargs = {}
    for c in CSV_COLUMNS:
        if c == "method":
            kwargs[c] = m[c]
        elif c in _INT_COLUMNS:
            kwargs[c] = int(m[c])
        else:
            kwargs[c] = float(m[c])
    return SweepRow(**kwargs)


def build_meta(extra: dict | None = None) -> dict:
    from optomacro import __version__

    meta = {
        "artifact": "optomacro",
        "version": __version__,
        "dephasing_convention": DEPHASING_NOTE,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(extra or {})
    return meta


def rows_to_json(rows: Sequence[SweepRow], stream: TextIO, meta: dict | None = None) -> None:
    json.dump({"meta": build_meta(meta), "rows": [asdict(r) for r in rows]}, stream, indent=1)
    stream.write("\n")


def read_json(path: str | Path) -> tuple[dict, list[SweepRow]]:
    with open(path) as fh:
        data = json.load(fh)
    return data["meta"], [_row_from_mapping(r) for r in data["rows"]]


def rows_to_svg(rows: Sequence[SweepRow], stream: TextIO, axes: Sequence[str], title: str | None = None) -> None:
    """Plot ``i_value`` (markers) and ``n_ph`` (dashed) against the first axis."""
    if not rows:
        raise DomainError("svg-plot needs at least one row", "rows")
    if len(axes) > 2:
        raise DomainError("svg-plot supports at most two sweep axes", "axes")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    axes = ["nbar" if a == "temperature_ratio" else a for a in axes] or ["n_particles"]
    x = axes[0]
    by = axes[1] if len(axes) > 1 else "method"
    matplotlib.rcParams["svg.hashsalt"] = "optomacro"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    i_series = series(rows, x, by, "i_value")
    n_series = series(rows, x, by, "n_ph")
    for k, key in enumerate(i_series):
        color = colors[k % len(colors)]
        xs, ys = zip(*i_series[key])
        ax.plot(xs, ys, "o", color=color, label=f"I(W), {by}={key:g}" if by != "method" else f"I(W), {key}")
        xs, ns = zip(*n_series[key])
        ax.plot(xs, ns, "--", color=color, label=f"n_ph, {by}={key:g}" if by != "method" else f"n_ph, {key}")
    positive = [r.i_value for r in rows if r.i_value > 0] + [r.n_ph for r in rows if r.n_ph > 0]
    if positive and max(positive) / min(positive) > 1e3:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel("I(W), n_ph")
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    stream.write(buf.getvalue())


def emit(rows: Sequence[SweepRow], fmt: str, path: str | Path | None = None, meta: dict | None = None, axes: Sequence[str] = ()) -> str | None:
    """Write ``rows`` to ``path``; with no path, return the text instead."""
    if fmt not in FORMATS:
        raise DomainError(f"unknown format {fmt!r}; expected one of {FORMATS}", "format")
    buf = io.StringIO()
    if fmt == "csv":
        rows_to_csv(rows, buf)
    elif fmt == "json":
        rows_to_json(rows, buf, meta)
    else:
        rows_to_svg(rows, buf, axes, title=(meta or {}).get("figure"))
    if path is None:
        return buf.getvalue()
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return None
