"""Dyadic lattice, strong maximal function over triples, CZ selection and
the discretized tail sums they control."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Cube, Grid, GridFunction
from .kernels import Kernel, bar_phi, phi_theta
from .orlicz import NormSpec, luxemburg_norm

__all__ = [
    "DyadicLattice",
    "CZDecomposition",
    "CZLevel",
    "m3d",
    "cz_decompose",
    "discretization_rhs",
    "dyadic_tail_check",
    "default_cz_base",
]


class DyadicLattice:
    """All dyadic subcubes of the box, whole box down to single cells."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.depth = grid.num_levels  # levels 0..depth-1

    def level_width(self, level: int) -> int:
        return self.grid.N >> level

    def cubes_at(self, level: int):
        w = self.level_width(level)
        N = self.grid.N
        for lo in np.ndindex(*((N // w,) * self.grid.n)):
            yield Cube(self.grid, tuple(l * w for l in lo), w)

    def cubes(self):
        for level in range(self.depth):
            yield from self.cubes_at(level)

    def root(self) -> Cube:
        return self.grid.whole_box()


class _BoxSummer:
    """O(1) sums of a sampled function over aligned index boxes."""

    def __init__(self, values: np.ndarray):
        p = values
        for ax in range(values.ndim):
            p = np.cumsum(p, axis=ax)
        self.prefix = np.pad(p, [(1, 0)] * values.ndim)
        self.shape = values.shape

    def box_sum(self, lo, hi) -> float:
        # half-open [lo, hi) per axis, clipped to the array
        lo = [max(l, 0) for l in lo]
        hi = [min(h, s) for h, s in zip(hi, self.shape)]
        if any(h <= l for l, h in zip(lo, hi)):
            return 0.0
        total = 0.0
        ndim = len(lo)
        for corner in np.ndindex(*((2,) * ndim)):
            idx = tuple(h if c else l for c, l, h in zip(corner, lo, hi))
            sign = (-1) ** (ndim - sum(corner))
            total += sign * self.prefix[idx]
        return float(total)


def _triple_average_products(hs, lat: DyadicLattice) -> dict:
    """prod_i (avg of h_i over 3Q) for every dyadic cube, keyed (lo, w).

    Averages use the full |3Q| with h_i extended by zero off the box.
    """
    grid = lat.grid
    summers = [_BoxSummer(h.values) for h in hs]
    cellvol = grid.cell_volume
    out = {}
    for Q in lat.cubes():
        Q3 = Q.dilate3()
        meas = Q3.measure
        lo = Q3.lo
        hi = tuple(l + Q3.w for l in lo)
        prod = 1.0
        for s in summers:
            prod *= s.box_sum(lo, hi) * cellvol / meas
        out[(Q.lo, Q.w)] = prod
    return out


def m3d(hs, lat: DyadicLattice) -> GridFunction:
    """Pointwise sup over dyadic cubes containing x of the product of
    triple-cube averages."""
    hs = list(hs)
    grid = lat.grid
    prods = _triple_average_products(hs, lat)
    out = np.zeros(grid.shape)
    for Q in lat.cubes():
        val = prods[(Q.lo, Q.w)]
        sl = Q.slices()
        np.maximum(out[sl], val, out=out[sl])
    return GridFunction(grid, out, nonneg=True)


def default_cz_base(n: int, m: int) -> float:
    return 2.0 * 4.0 ** (n * m)


@dataclass
class CZLevel:
    k: int
    cubes: list
    prod_norms: list
    e_masks: list  # boolean arrays, one per cube


@dataclass
class CZDecomposition:
    a: float
    grid: Grid
    levels: list  # of CZLevel
    maximal_values: GridFunction = None

    def all_cubes(self):
        for lev in self.levels:
            for Q, p, E in zip(lev.cubes, lev.prod_norms, lev.e_masks):
                yield lev.k, Q, p, E

    def to_json(self) -> str:
        payload = {
            "a": self.a,
            "levels": [
                {
                    "k": lev.k,
                    "cubes": [
                        {
                            "corner": list(Q.corner),
                            "side": Q.side,
                            "prod_norm": p,
                        }
                        for Q, p in zip(lev.cubes, lev.prod_norms)
                    ],
                    "E_masks": [_rle(E) for E in lev.e_masks],
                }
                for lev in self.levels
            ],
        }
        return json.dumps(payload, sort_keys=True)


def _rle(mask: np.ndarray) -> list:
    """Run-length encoding of a flattened boolean mask: [start, length] runs."""
    flat = np.asarray(mask).ravel()
    runs = []
    idx = np.flatnonzero(np.diff(np.concatenate([[0], flat.view(np.int8), [0]])))
    for start, stop in zip(idx[::2], idx[1::2]):
        runs.append([int(start), int(stop - start)])
    return runs


def cz_decompose(hs, a: float, lat: DyadicLattice, max_levels: int = 64) -> CZDecomposition:
    """Maximal dyadic cubes whose triple-average product exceeds a^k.

    Selection is top-down, so chosen cubes are maximal and pairwise
    disjoint; their union is exactly the super-level set of the dyadic
    maximal function.  k runs over the band where a^k sits between the
    smallest positive and the largest maximal-function value.
    """
    if a <= 1.0:
        raise ValueError("CZ base a must exceed 1")
    hs = list(hs)
    if all(not h.values.any() for h in hs):
        raise ValueError("CZ decomposition of identically zero data")
    grid = lat.grid
    prods = _triple_average_products(hs, lat)
    mx = m3d(hs, lat)
    vals = mx.values
    pos = vals[vals > 0]
    if pos.size == 0:
        return CZDecomposition(a, grid, [], mx)
    vmin, vmax = float(pos.min()), float(vals.max())
    k_lo = math.ceil(math.log(vmin) / math.log(a) - 1e-12)
    k_hi = math.floor(math.log(vmax) / math.log(a) + 1e-12)
    if a**k_hi >= vmax:
        k_hi -= 1
    ks = [k for k in range(k_lo, k_hi + 1)]
    if len(ks) > max_levels:
        ks = ks[-max_levels:]
    levels = []
    for k in ks:
        thr = a**k
        selected = []
        stack = [lat.root()]
        while stack:
            Q = stack.pop()
            if prods[(Q.lo, Q.w)] > thr:
                selected.append(Q)
            elif Q.w > 1:
                stack.extend(Q.children())
        if not selected:
            continue
        selected.sort(key=lambda Q: (-Q.w, Q.lo))
        next_mask = vals > a ** (k + 1)
        e_masks = []
        for Q in selected:
            mask = np.zeros(grid.shape, dtype=bool)
            mask[Q.slices()] = True
            e_masks.append(mask & ~next_mask)
        levels.append(
            CZLevel(
                k,
                selected,
                [prods[(Q.lo, Q.w)] for Q in selected],
                e_masks,
            )
        )
    return CZDecomposition(a, grid, levels, mx)


def _log_l1(power: float) -> NormSpec:
    """L(log L)^power as a NormSpec, with the plain-L fast path at 0."""
    return NormSpec.power_log(1.0, power)


def discretization_rhs(
    K: Kernel,
    fs,
    u: GridFunction,
    q: float,
    ell: int,
    cz0: CZDecomposition,
    czj: CZDecomposition = None,
    j: int = None,
    delta: float = 1.0,
    eps: float = 0.5,
) -> float:
    """Right side of the discretization bound for int [|T_{b_j^ell} f| u]^q.

    First sum over the cubes selected from f itself; for the commutator a
    second sum over the cubes selected with u in slot j.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("need q in (0, 1]")
    if ell not in (0, 1):
        raise ValueError("ell must be 0 or 1")
    fs = list(fs)
    if not cz0.levels:
        mx = cz0.maximal_values
        if mx is not None and not mx.values.any():
            # a zero slot kills every triple-average product, so both sides vanish
            return 0.0
        raise ValueError("empty decomposition")
    grid = cz0.grid
    cellvol = grid.cell_volume
    uq = GridFunction(grid, u.values**q)
    total = 0.0
    spec0 = _log_l1(ell * q)
    for _, Q, _, E in cz0.all_cubes():
        esize = float(E.sum()) * cellvol
        if esize == 0.0:
            continue
        Q3 = Q.dilate3()
        term = phi_theta(K, q, Q.side, delta, eps) ** q
        term *= luxemburg_norm(uq, Q3, spec0)
        for f in fs:
            term *= luxemburg_norm(f, Q3, NormSpec.lebesgue(1.0)) ** q
        total += term * esize
    if ell == 1:
        if czj is None or j is None:
            raise ValueError("commutator sum needs the j-th decomposition")
        for _, Q, _, E in czj.all_cubes():
            esize = float(E.sum()) * cellvol
            if esize == 0.0:
                continue
            Q3 = Q.dilate3()
            term = phi_theta(K, q, Q.side, delta, eps) ** q
            term *= luxemburg_norm(u, Q3, NormSpec.lebesgue(1.0)) ** q
            for i, f in enumerate(fs):
                spec = _log_l1(1.0 if i == j else 0.0)
                term *= luxemburg_norm(f, Q3, spec) ** q
            total += term * esize
    return total


def dyadic_tail_check(
    K: Kernel,
    Q0: Cube,
    psi: NormSpec,
    f: GridFunction,
    q: float,
    delta: float = 1.0,
    eps: float = 0.5,
    samples: int = 10_000,
) -> float:
    """LHS/RHS of the dyadic tail-sum bound below Q0.

    LHS sums sampled-sup kernel weights over all dyadic subcubes of Q0
    down to cell level; RHS is the aggregated annulus mass at the top
    scale times the top triple-cube norm.
    """
    rhs_norm = luxemburg_norm(f, Q0.dilate3(), psi)
    if rhs_norm == 0.0:
        return 0.0
    mq = K.m * q
    lhs = 0.0
    stack = [Q0]
    while stack:
        Q = stack.pop()
        Q3 = Q.dilate3()
        lhs += (
            bar_phi(K, Q.side / 2.0, samples) ** q
            * Q3.measure ** (mq + 1.0)
            * luxemburg_norm(f, Q3, psi)
        )
        if Q.w > 1:
            stack.extend(Q.children())
    rhs = (
        phi_theta(K, q, Q0.side, delta, eps) ** q
        * Q0.dilate3().measure
        * rhs_norm
    )
    return lhs / rhs
