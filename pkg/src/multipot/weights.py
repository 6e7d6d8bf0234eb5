"""Test weights, BMO symbols and reverse-Holder certifiers."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .grid import Grid, GridFunction, integrate
from .orlicz import NormSpec, YoungFunction, luxemburg_norm

__all__ = [
    "gen_power_weight",
    "gen_bmo_log",
    "bmo_norm",
    "BmoNorms",
    "rh_check",
    "rh_inf_check",
    "parse_weight",
]


def _origin_cells(grid: Grid):
    """Indices of cells whose closed cell contains a zero coordinate box
    corner at the origin (i.e. cells touching |x| = 0)."""
    c = grid.centers_1d()
    h = grid.h
    touch_1d = np.flatnonzero(np.abs(c) <= h / 2.0 + 1e-12 * h)
    out = []
    for idx in np.ndindex(*((len(touch_1d),) * grid.n)):
        out.append(tuple(int(touch_1d[i]) for i in idx))
    return out


def _cell_average(grid: Grid, idx, fn, sub: int = 16) -> float:
    """Subsampled average of fn(|x|) over one cell."""
    c = grid.centers_1d()
    h = grid.h
    offs = ((np.arange(sub) + 0.5) / sub - 0.5) * h
    axes = [c[i] + offs for i in idx]
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(x * x for x in mesh))
    return float(np.mean(fn(np.maximum(r, 1e-300))))


def gen_power_weight(beta: float, grid: Grid) -> GridFunction:
    """w(x) = |x|^beta sampled at cell centers, locally integrable on the box.

    Cells touching the origin carry the cell average instead of the
    center value (closed form in one dimension, subsampling otherwise).
    """
    if beta <= -grid.n:
        raise ValueError(f"need beta > -n for local integrability, got {beta}")
    r = grid.radius()
    vals = r**beta
    for idx in _origin_cells(grid):
        if grid.n == 1:
            # cells adjacent to 0: average of x^beta over (0, h)
            vals[idx] = grid.h**beta / (beta + 1.0)
        else:
            vals[idx] = _cell_average(grid, idx, lambda s: s**beta)
    return GridFunction(grid, vals, nonneg=True)


def gen_bmo_log(grid: Grid) -> GridFunction:
    """b(x) = log |x|, the canonical unbounded BMO symbol."""
    r = grid.radius()
    vals = np.log(np.maximum(r, 1e-300))
    for idx in _origin_cells(grid):
        if grid.n == 1:
            vals[idx] = math.log(grid.h) - 1.0  # avg of log over (0, h)
        else:
            vals[idx] = _cell_average(grid, idx, np.log)
    return GridFunction(grid, vals)


class BmoNorms(NamedTuple):
    l1: float
    exp: float


_EXP_YOUNG = NormSpec.orlicz(YoungFunction("exp"))


def bmo_norm(b: GridFunction, family) -> BmoNorms:
    """sup over the family of the mean oscillation, in L^1 and exp L form."""
    family = list(family)
    if not family:
        raise ValueError("empty cube family")
    grid = b.grid
    l1 = 0.0
    expv = 0.0
    for Q in family:
        sub = b.restrict(Q)
        if sub.size == 0:
            continue
        mean = float(sub.mean())
        dev = GridFunction(grid, np.abs(b.values - mean))
        l1 = max(l1, float(np.abs(sub - mean).mean()))
        expv = max(expv, luxemburg_norm(dev, Q, _EXP_YOUNG, tol=1e-8))
    return BmoNorms(l1=l1, exp=expv)


def rh_check(w: GridFunction, s: float, family) -> float:
    """Reverse Holder constant on the family:
    max over Q of (avg w^s)^(1/s) / (avg w)."""
    if s <= 1.0:
        raise ValueError("reverse Holder exponent must exceed 1")
    worst = 0.0
    for Q in family:
        sub = w.restrict(Q)
        if sub.size == 0:
            continue
        den = float(sub.mean())
        if den == 0.0:
            continue
        worst = max(worst, float(np.mean(sub**s)) ** (1.0 / s) / den)
    return worst


def rh_inf_check(w: GridFunction, family) -> float:
    """max over Q of (sup of w on Q) / (avg of w on Q)."""
    worst = 0.0
    for Q in family:
        sub = w.restrict(Q)
        if sub.size == 0:
            continue
        den = float(sub.mean())
        if den == 0.0:
            continue
        worst = max(worst, float(sub.max()) / den)
    return worst


def parse_weight(text: str, grid: Grid) -> GridFunction:
    """Parse the config forms pow{beta}, one, bmolog, file:path.csv."""
    text = text.strip()
    if text == "one":
        return GridFunction.constant(grid, 1.0)
    if text == "bmolog":
        return gen_bmo_log(grid)
    if text.startswith("pow"):
        return gen_power_weight(float(text[3:]), grid)
    if text.startswith("file:"):
        f = GridFunction.from_csv(text.split(":", 1)[1])
        if not f.grid.compatible(grid):
            raise ValueError("weight file grid does not match the run grid")
        return f
    raise ValueError(f"unrecognized weight spec {text!r}")
