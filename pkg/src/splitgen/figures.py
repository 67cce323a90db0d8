"""Data behind the 9- and 11-stage comparison plots.

fig1 traces (v1, v2) of the 9-stage velocity family against t2; fig2
traces (t1, t2) of the 9-stage position family against v2.  Both append
overlay rows for published algorithms: the 11-stage points ship with the
package, the 9-stage ones must be supplied by the user.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from importlib import resources

from .extended_linear import (
    FamilySpec,
    NegativeCoefficientWarning,
    make_family,
)

__all__ = ["FIGURES", "load_overlay", "figure_rows", "write_figure_csv"]

FIGURES = ("fig1", "fig2")

_COLUMNS = {
    "fig1": ["kind", "label", "t2", "t3", "v1_predicted", "v2_predicted", "phi",
             "v1_reference", "v2_reference", "v1_residual", "v2_residual"],
    "fig2": ["kind", "label", "v2", "v3", "t1_predicted", "t2_predicted", "phi_prime",
             "t1_reference", "t2_reference", "t1_residual", "t2_residual"],
}


def load_overlay(path: str | None = None) -> dict:
    """Bundled overlay points, with entries from ``path`` (same layout) taking precedence."""
    text = resources.files("splitgen").joinpath("data/omf_points.json").read_text()
    data = json.loads(text)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        for key, block in user.items():
            if isinstance(block, dict) and "points" in block:
                data.setdefault(key, {})["points"] = block["points"]
    return data


def _build(family: str, *params: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeCoefficientWarning)
        return make_family(FamilySpec(family, params))


def _grid(lo: float, hi: float, count: int):
    return [lo + (hi - lo) * k / count for k in range(count + 1)]


def _residual(ref, pred):
    return None if ref is None else ref - pred


def figure_rows(which: str, grid_count: int = 50, lo: float = 0.0, hi: float = 0.5, overlay: dict | None = None):
    """Rows (as dicts keyed by the figure's columns) for ``fig1`` or ``fig2``."""
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; expected one of {FIGURES}")
    overlay = overlay if overlay is not None else load_overlay()
    rows = []
    if which == "fig1":
        for t2 in _grid(lo, hi, grid_count):
            c, _, p = _build("nine_stage_velocity", t2)
            rows.append(dict(kind="grid", label="", t2=t2, t3=c.t[2],
                             v1_predicted=c.v[0], v2_predicted=c.v[1], phi=p.phi))
        for pt in overlay["fig1"]["points"]:
            if pt.get("t2") is None:
                continue
            c, _, p = _build("nine_stage_velocity", pt["t2"])
            rows.append(_overlay_row("omf9", pt, c.v[0], c.v[1], p.phi, t2=pt["t2"], t3=c.t[2], ref=("v1", "v2")))
        for pt in overlay["eleven_stage_velocity"]["points"]:
            c, _, p = _build("eleven_stage_velocity", pt["t2"], pt["t3"])
            rows.append(_overlay_row("omf11", pt, c.v[0], c.v[1], p.phi, t2=pt["t2"], t3=pt["t3"], ref=("v1", "v2")))
    else:
        for v2 in _grid(lo, hi, grid_count):
            c, _, p = _build("nine_stage_position", v2)
            rows.append(dict(kind="grid", label="", v2=v2, v3=c.v[2],
                             t1_predicted=c.t[0], t2_predicted=c.t[1], phi_prime=p.phi))
        for pt in overlay["fig2"]["points"]:
            if pt.get("v2") is None:
                continue
            c, _, p = _build("nine_stage_position", pt["v2"])
            rows.append(_overlay_row("omf9", pt, c.t[0], c.t[1], p.phi, v2=pt["v2"], v3=c.v[2], ref=("t1", "t2")))
        for pt in overlay["eleven_stage_position"]["points"]:
            c, _, p = _build("eleven_stage_position", pt["v2"], pt["v3"])
            rows.append(_overlay_row("omf11", pt, c.t[0], c.t[1], p.phi, v2=pt["v2"], v3=pt["v3"], ref=("t1", "t2")))
    return rows


def _overlay_row(kind, pt, pred_a, pred_b, phi, ref, **coords):
    a, b = ref
    row = dict(kind=kind, label=pt.get("label", ""), **coords)
    row[f"{a}_predicted"] = pred_a
    row[f"{b}_predicted"] = pred_b
    row["phi" if a == "v1" else "phi_prime"] = phi
    row[f"{a}_reference"] = pt.get(a)
    row[f"{b}_reference"] = pt.get(b)
    row[f"{a}_residual"] = _residual(pt.get(a), pred_a)
    row[f"{b}_residual"] = _residual(pt.get(b), pred_b)
    return row


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def write_figure_csv(out: io.TextIOBase, which: str, rows) -> None:
    cols = _COLUMNS[which]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in cols])
