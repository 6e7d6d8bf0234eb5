"""Kernels on (R^n)^m, annulus geometry and the growth-condition certifier.

All supported kernel families are radial in s = sum_i |y_i|, which gives
every integral here a one-dimensional reduction against the surface
measure of the level set {sum_i |y_i| = s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Grid

__all__ = [
    "Kernel",
    "AnnulusSpec",
    "eval_kernel",
    "kernel_cell_value",
    "annulus_integral",
    "tilde_phi",
    "phi_theta",
    "bar_phi",
    "condition_d_check",
    "h_alpha",
    "unit_l1ball_volume",
    "parse_kernel",
    "SingularKernelError",
    "DivergentSeriesError",
]


class SingularKernelError(ValueError):
    """Kernel evaluated at its singular point."""


class DivergentSeriesError(ArithmeticError):
    """A kernel integral or annulus series failed to converge."""


def unit_l1ball_volume(n: int, m: int) -> float:
    """Volume of {(y_1..y_m): sum_i |y_i| <= 1}, y_i in R^n.

    Splitting each slot into radial coordinates gives a Dirichlet
    integral: (area of S^(n-1))^m * Gamma(n)^m / Gamma(nm+1).
    """
    area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
    return area**m * math.gamma(n) ** m / math.gamma(n * m + 1)


def _slice_measure_coeff(n: int, m: int) -> float:
    """sigma(s) = coeff * s^(nm-1), surface measure of {sum |y_i| = s}."""
    return unit_l1ball_volume(n, m) * n * m


@lru_cache(maxsize=None)
def _bessel_nodes(T: float, Mt: int):
    """Log-spaced midpoint nodes for the Bessel subordination integral."""
    lo, hi = math.log(1.0 / T), math.log(T)
    du = (hi - lo) / Mt
    u = lo + (np.arange(Mt) + 0.5) * du
    t = np.exp(u)
    return t, du


@dataclass(frozen=True)
class Kernel:
    """Nonnegative kernel phi on (R^n)^m, radial in s = sum_i |y_i|.

    Families: 'fractional' s^(alpha-nm) with 0 < alpha < nm, 'bessel'
    (subordination quadrature, truncation T and Mt nodes), 'profile'
    (callable monotone profile), 'tabulated' (sampled profile).
    """

    family: str
    n: int
    m: int
    alpha: float = 0.0
    profile_fn: object = None
    table_s: tuple = ()
    table_v: tuple = ()
    T: float = 1e3
    Mt: int = 4096

    def __post_init__(self):
        nm = self.n * self.m
        if self.family == "fractional":
            if not 0.0 < self.alpha < nm:
                raise ValueError(
                    f"fractional kernel needs alpha in (0, nm)=(0, {nm}), got {self.alpha}"
                )
        elif self.family == "bessel":
            if self.alpha <= 0:
                raise ValueError("bessel kernel needs alpha > 0")
        elif self.family == "profile":
            if self.profile_fn is None:
                raise ValueError("profile kernel needs a profile callable")
            self._check_monotone(self.profile_fn)
        elif self.family == "tabulated":
            if len(self.table_s) < 2 or len(self.table_s) != len(self.table_v):
                raise ValueError("tabulated kernel needs matching s/value tables")
            if any(b <= a for a, b in zip(self.table_s, self.table_s[1:])):
                raise ValueError("tabulated s values must be strictly increasing")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @staticmethod
    def _check_monotone(fn):
        s = np.logspace(-4, 2, 200)
        v = np.asarray([fn(x) for x in s], dtype=float)
        if np.any(v < 0):
            raise ValueError("kernel profile must be nonnegative")
        up = np.all(np.diff(v) >= -1e-12 * np.maximum(v[:-1], 1e-300))
        down = np.all(np.diff(v) <= 1e-12 * np.maximum(v[:-1], 1e-300))
        if not (up or down):
            raise ValueError("kernel profile must be monotone")

    @property
    def nm(self) -> int:
        return self.n * self.m

    def radial(self, s):
        """Profile value at s = sum_i |y_i| (vectorized)."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        if self.family == "fractional":
            if np.any(s == 0):
                raise SingularKernelError("fractional kernel is singular at 0")
            out = s ** (self.alpha - self.nm)
        elif self.family == "profile":
            out = np.asarray([self.profile_fn(x) for x in s], dtype=float)
        elif self.family == "tabulated":
            out = np.interp(s, np.asarray(self.table_s), np.asarray(self.table_v))
        else:  # bessel
            t, du = _bessel_nodes(self.T, self.Mt)
            beta = (self.alpha - self.nm) / 2.0
            base = np.exp(-t) * t**beta * du
            const = 1.0 / (
                2.0**self.nm * math.gamma(self.alpha / 2.0) * math.pi ** (self.nm / 2.0)
            )
            flat = s.ravel()
            out = np.empty_like(flat)
            step = max(1, 2**22 // self.Mt)  # cap the outer-product workspace
            for i in range(0, flat.size, step):
                chunk = flat[i : i + step]
                out[i : i + step] = np.exp(
                    -np.square(chunk)[:, None] / (4.0 * t[None, :])
                ).dot(base)
            out = const * out.reshape(s.shape)
        return float(out[0]) if scalar else out

    def with_quadrature(self, T: float, Mt: int) -> "Kernel":
        return Kernel(
            self.family, self.n, self.m, self.alpha, self.profile_fn,
            self.table_s, self.table_v, T, Mt,
        )


@dataclass(frozen=True)
class AnnulusSpec:
    """The annulus delta(1-eps) t < sum_i |y_i| <= delta(1+eps) 2t."""

    t: float
    delta: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if self.t <= 0 or self.delta <= 0 or not 0.0 <= self.eps < 1.0:
            raise ValueError("need t > 0, delta > 0, eps in [0, 1)")

    @property
    def inner(self) -> float:
        return self.delta * (1.0 - self.eps) * self.t

    @property
    def outer(self) -> float:
        return self.delta * (1.0 + self.eps) * 2.0 * self.t


def _slot_norms(K: Kernel, y) -> float:
    y = np.asarray(y, dtype=float).reshape(K.m, K.n)
    return float(np.sqrt(np.sum(y * y, axis=1)).sum())


def eval_kernel(K: Kernel, y) -> float:
    """phi at a point of (R^n)^m, given as shape (m, n) or a flat nm vector."""
    return K.radial(_slot_norms(K, y))


def kernel_cell_value(K: Kernel, center, width: float) -> float:
    """Center value of phi on a product cell, or a singularity-aware average.

    A cell touching {sum |y_i| = 0} is averaged by 4-per-axis subsampling
    with recursion into the origin-carrying subcell, which resolves the
    homogeneous singularity to ~1% instead of the O(1/sqrt(k)) error of a
    flat subsample.
    """
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.size != K.nm:
        raise ValueError("cell center arity does not match the kernel")
    touches = np.all(np.abs(center) <= width / 2.0 + 1e-15 * width)
    if not touches:
        return eval_kernel(K, center)
    return _singular_cell_average(K, center, width)


def _dense_cell_average(K: Kernel, center, width, sub: int) -> float:
    """Midpoint-subsampled average of the kernel over one product cell."""
    nm = K.nm
    offs = ((np.arange(sub) + 0.5) / sub - 0.5) * width
    grids = np.meshgrid(*([offs] * nm), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1) + center
    s = np.sqrt(np.sum(pts.reshape(-1, K.m, K.n) ** 2, axis=2)).sum(axis=1)
    return float(np.mean(K.radial(np.maximum(s, 1e-300))))


def _singular_cell_average(K: Kernel, center, width, depth: int = 0) -> float:
    nm = K.nm
    # 4 subcells per axis; recurse on the one whose closed subcell holds 0;
    # subcells close enough to feel the singularity's steepness get a dense
    # subsample instead of a single midpoint value.
    qw = width / 4.0
    offs = np.array([-1.5, -0.5, 0.5, 1.5]) * qw
    grids = np.meshgrid(*([offs] * nm), indexing="ij")
    subcenters = np.stack([g.ravel() for g in grids], axis=1) + center
    holds0 = np.all(np.abs(subcenters) <= qw / 2.0 + 1e-15 * width, axis=1)
    k_origin = int(np.argmax(holds0)) if holds0.any() else -1
    s = np.sqrt(
        np.sum(subcenters.reshape(-1, K.m, K.n) ** 2, axis=2)
    ).sum(axis=1)
    near = s < 3.0 * nm * qw
    sub = 8 if nm <= 2 else 4
    total = 0.0
    far_mask = ~near
    if k_origin >= 0:
        far_mask[k_origin] = False
        near[k_origin] = False
    if far_mask.any():
        total += float(np.sum(K.radial(np.maximum(s[far_mask], 1e-300))))
    for i in np.flatnonzero(near):
        total += _dense_cell_average(K, subcenters[i], qw, sub)
    if k_origin >= 0:
        if depth >= 50 or qw < 1e-14:
            # bottom out at the last midpoint value
            total += float(K.radial(max(s[k_origin], qw / 2.0)))
        else:
            total += _singular_cell_average(K, subcenters[k_origin], qw, depth + 1)
    return total / 4.0**nm


def annulus_integral(K: Kernel, A: AnnulusSpec, grid: Grid = None, nodes: int = 4096) -> float:
    """Integral of phi over the annulus A.

    Default path: exact 1-D reduction against the slice measure of the
    l1-of-norms sphere.  With a grid, a brute product-lattice quadrature
    with subsampled boundary cells is used instead (cross-check path).
    """
    if grid is not None:
        return _annulus_integral_grid(K, A, grid)
    if K.family == "fractional":
        c = _slice_measure_coeff(K.n, K.m)
        return c * (A.outer**K.alpha - A.inner**K.alpha) / K.alpha
    return _radial_integral(K, A.inner, A.outer, nodes)


def _radial_integral(K: Kernel, lo: float, hi: float, nodes: int) -> float:
    """integral_lo^hi profile(s) sigma(s) ds by log-spaced midpoints."""
    if hi <= lo:
        return 0.0
    c = _slice_measure_coeff(K.n, K.m)
    floor = max(lo, hi * 1e-14)
    ulo, uhi = math.log(floor), math.log(hi)
    du = (uhi - ulo) / nodes
    s = np.exp(ulo + (np.arange(nodes) + 0.5) * du)
    vals = K.radial(s)
    return float(np.sum(vals * c * s**K.nm) * du)


def _annulus_integral_grid(K: Kernel, A: AnnulusSpec, grid: Grid, sub: int = 4) -> float:
    if K.nm > 3:
        raise ValueError("grid quadrature limited to nm <= 3")
    h = grid.h
    c1 = grid.centers_1d()
    mesh = np.meshgrid(*([c1] * K.nm), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    s = np.sqrt(np.sum(pts.reshape(-1, K.m, K.n) ** 2, axis=2)).sum(axis=1)
    # conservative per-cell s-range from the slot-wise intervals
    absr = np.abs(pts.reshape(-1, K.m, K.n))
    lo_slot = np.sqrt(np.sum(np.maximum(absr - h / 2.0, 0.0) ** 2, axis=2))
    hi_slot = np.sqrt(np.sum((absr + h / 2.0) ** 2, axis=2))
    s_lo, s_hi = lo_slot.sum(axis=1), hi_slot.sum(axis=1)
    inside = (s_lo > A.inner) & (s_hi <= A.outer)
    outside = (s_hi <= A.inner) | (s_lo > A.outer)
    border = ~(inside | outside)
    total = 0.0
    if inside.any():
        total += float(np.sum(K.radial(np.maximum(s[inside], 1e-300)))) * h**K.nm
    if border.any():
        offs = (np.arange(sub) + 0.5) / sub - 0.5
        sub_mesh = np.meshgrid(*([offs * h] * K.nm), indexing="ij")
        sub_offs = np.stack([g.ravel() for g in sub_mesh], axis=1)
        for p in pts[border]:
            sp = (p[None, :] + sub_offs).reshape(-1, K.m, K.n)
            ss = np.sqrt(np.sum(sp**2, axis=2)).sum(axis=1)
            hit = (ss > A.inner) & (ss <= A.outer)
            if not hit.any():
                continue
            frac = hit.mean()
            sc = float(np.sqrt(np.sum(p.reshape(K.m, K.n) ** 2, axis=1)).sum())
            total += K.radial(max(sc, 1e-300)) * frac * h**K.nm
    return total


def tilde_phi(K: Kernel, t: float, shell_nodes: int = 64, max_shells: int = 2000) -> float:
    """Cumulative kernel mass over {sum |y_i| <= t}.

    Closed form for the fractional family; dyadic-shell quadrature with a
    geometric convergence test otherwise.
    """
    if t <= 0:
        raise ValueError("need t > 0")
    if K.family == "fractional":
        c = _slice_measure_coeff(K.n, K.m)
        return c * t**K.alpha / K.alpha
    total = 0.0
    growing = 0
    prev = None
    for j in range(max_shells):
        shell = _radial_integral(K, t * 2.0 ** (-j - 1), t * 2.0**-j, shell_nodes)
        total += shell
        if prev is not None and shell >= prev * (1.0 - 1e-12) and shell > 0:
            growing += 1
            if growing >= 10:
                raise DivergentSeriesError(
                    "cumulative kernel mass is not converging near 0"
                )
        else:
            growing = 0
        prev = shell
        if total > 0 and shell < 1e-14 * total:
            break
    return total


@lru_cache(maxsize=65536)
def bar_phi(K: Kernel, t: float, samples: int = 10_000) -> float:
    """Sampled sup of phi over the annulus A_(t,1,0).

    The kernel is radial in s, so the sup over the annulus equals the sup
    of the profile over s in (t, 2t]; sampled on a deterministic
    Kronecker lattice (plus both endpoints' neighborhoods).
    """
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    u = np.modf(np.arange(1, samples + 1) * golden)[0]
    s = t * (1.0 + u)
    s = np.concatenate([s, [t * (1.0 + 1e-9), 2.0 * t]])
    return float(np.max(K.radial(s)))


def condition_d_check(
    K: Kernel,
    delta: float = 1.0,
    eps: float = 0.5,
    k_range=range(-5, 1),
    samples: int = 10_000,
) -> dict:
    """Per-scale certification of the kernel growth condition.

    For each k: ratio_k = sup_{A_(2^k,1,0)} phi / (2^-knm * integral of
    phi over A_(2^k,delta,eps)).  Boundedness of ratio_k over k is the
    growth condition; monotone growth across the whole range is flagged.
    """
    ks = list(k_range)
    if not ks:
        raise ValueError("empty k range")
    ratios = {}
    for k in ks:
        t = 2.0**k
        sup = bar_phi(K, t, samples)
        den = annulus_integral(K, AnnulusSpec(t, delta, eps)) / (2.0 ** (k * K.nm))
        if den == 0.0:
            raise ZeroDivisionError(f"empty annulus integral at k={k}")
        ratios[k] = sup / den
    vals = [ratios[k] for k in ks]
    unbounded = all(b > a * (1.0 + 1e-12) for a, b in zip(vals, vals[1:]))
    return {
        "per_k": ratios,
        "C_max": max(vals),
        "unbounded_growth_flag": unbounded and len(vals) >= 3,
    }


@lru_cache(maxsize=65536)
def phi_theta(
    K: Kernel,
    theta: float,
    t: float,
    delta: float = 1.0,
    eps: float = 0.5,
    max_terms: int = 400,
) -> float:
    """l^theta aggregation of annulus masses at scales 2^-nu below t."""
    if not 0.0 < theta <= 1.0:
        raise ValueError("need theta in (0, 1]")
    if t <= 0:
        raise ValueError("need t > 0")
    nu0 = math.ceil(-math.log2(t) - 1e-12)
    terms = []
    total = 0.0
    growing = 0
    truncated = True
    for i in range(max_terms):
        nu = nu0 + i
        a = annulus_integral(K, AnnulusSpec(2.0**-nu, delta, eps))
        term = a**theta
        total += term
        if terms and term >= terms[-1] * (1.0 - 1e-12) and term > 0:
            growing += 1
            if growing >= 10:
                raise DivergentSeriesError("annulus series terms stopped decreasing")
        else:
            growing = 0
        terms.append(term)
        if total > 0 and term < 1e-14 * total:
            truncated = False
            break
    tail = 0.0
    if truncated and len(terms) >= 2 and terms[-1] < terms[-2]:
        # geometric tail estimate from the last observed ratio
        r = terms[-1] / terms[-2]
        tail = terms[-1] * r / (1.0 - r)
    return (total + tail) ** (1.0 / theta)


def h_alpha(alpha: float, n: int, m: int, x) -> float:
    """Leading-order profile of the Bessel kernel near the origin."""
    x = np.asarray(x, dtype=float).reshape(-1)
    r = float(np.sqrt(np.sum(x * x)))
    if not 0.0 < r < 2.0:
        raise ValueError("h_alpha is the near-zero profile: need 0 < |x| < 2")
    nm = n * m
    if alpha < nm:
        return r ** (alpha - nm) + 1.0
    if alpha == nm:
        return math.log(1.0 / r) + 1.0
    return 1.0


def bessel_fourier_probe(alpha: float, R: float = 60.0, samples: int = 2**14,
                         xis=(0.25, 0.5, 1.0, 2.0)) -> dict:
    """Diagnostic: numerically Fourier-transform the n=m=1 Bessel kernel
    and compare against the two candidate closed forms
    (1+4 pi^2 xi^2)^(-a/2) and (1+4 pi^2 |xi|)^(-a/2).

    Neither candidate is asserted anywhere in the library; this reports
    which one the numerics match.
    """
    K = Kernel("bessel", 1, 1, alpha=alpha, T=1e9, Mt=2**14)
    dx = R / samples
    x = (np.arange(samples) + 0.5) * dx
    g = K.radial(x)
    out = {"alpha": alpha, "xis": list(xis), "err_quadratic": [], "err_linear": []}
    for xi in xis:
        ghat = 2.0 * float(np.sum(g * np.cos(2.0 * math.pi * xi * x))) * dx
        cand_sq = (1.0 + 4.0 * math.pi**2 * xi**2) ** (-alpha / 2.0)
        cand_lin = (1.0 + 4.0 * math.pi**2 * abs(xi)) ** (-alpha / 2.0)
        out["err_quadratic"].append(abs(ghat - cand_sq) / cand_sq)
        out["err_linear"].append(abs(ghat - cand_lin) / cand_lin)
    mean_sq = float(np.mean(out["err_quadratic"]))
    mean_lin = float(np.mean(out["err_linear"]))
    out["winner"] = "quadratic" if mean_sq < mean_lin else "linear"
    return out


def parse_kernel(text: str, n: int, m: int) -> Kernel:
    """Parse the config forms frac{alpha}, bessel{alpha}, profile:file.csv."""
    text = text.strip()
    if text.startswith("frac"):
        return Kernel("fractional", n, m, alpha=float(text[4:]))
    if text.startswith("bessel"):
        return Kernel("bessel", n, m, alpha=float(text[6:]))
    if text.startswith("profile:"):
        path = text.split(":", 1)[1]
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        return Kernel(
            "tabulated", n, m,
            table_s=tuple(rows[:, 0]), table_v=tuple(rows[:, 1]),
        )
    raise ValueError(f"unrecognized kernel spec {text!r}")
