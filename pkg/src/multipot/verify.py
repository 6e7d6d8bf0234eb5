"""Per-theorem harnesses: compute both sides of each weighted inequality
on a corpus, report ratios and empirical constants.

Empirical constants are reported, never asserted against any a-priori
value; the inequalities only promise that some finite constant exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction, Cube, cube_family, integrate
from .kernels import Kernel, phi_theta
from .operators import (
    PhiScaling,
    apply_commutator,
    apply_potential,
    maximal,
    maximal_single,
)
from .orlicz import NormSpec, YoungFunction, luxemburg_norm
from .weights import gen_bmo_log, rh_check

__all__ = [
    "HypothesisUnmet",
    "InequalityReport",
    "TestingCondition",
    "make_corpus",
    "testing_condition_W",
    "remark_bundle",
    "verify_strong",
    "verify_fefferman_stein",
    "verify_coifman",
    "verify_ftd",
    "verify_weak_maximal",
    "verify_control",
    "lorentz_weak_quasinorm",
]


class HypothesisUnmet(RuntimeError):
    """A harness precondition (weight class, testing condition) failed."""


@dataclass
class InequalityReport:
    theorem: str
    params: dict
    instances: list = field(default_factory=list)  # dicts: lhs, rhs, ratio
    notes: list = field(default_factory=list)
    stable: bool = None

    def add(self, lhs: float, rhs: float, tag: str = "") -> float:
        if lhs > 0.0 and not rhs > 0.0:
            raise ArithmeticError(
                f"vanishing right side against positive left side ({tag})"
            )
        ratio = lhs / rhs if rhs > 0.0 else 0.0
        if not math.isfinite(ratio):
            raise ArithmeticError(f"non-finite ratio ({tag})")
        self.instances.append({"lhs": lhs, "rhs": rhs, "ratio": ratio, "tag": tag})
        return ratio

    @property
    def max_ratio(self) -> float:
        return max((i["ratio"] for i in self.instances), default=0.0)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "params": self.params,
            "instances": self.instances,
            "max_ratio": self.max_ratio,
            "stable": self.stable,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# corpus

def _indicator(grid: Grid, rng) -> np.ndarray:
    level = int(rng.integers(1, grid.num_levels))
    w = grid.N >> level
    lo = tuple(int(rng.integers(0, grid.N // w)) * w for _ in range(grid.n))
    out = np.zeros(grid.shape)
    out[tuple(slice(l, l + w) for l in lo)] = 1.0
    return out


def _tent(grid: Grid, rng) -> np.ndarray:
    center = [float(rng.uniform(-grid.L / 2, grid.L / 2)) for _ in range(grid.n)]
    radius = float(rng.uniform(grid.L / 8, grid.L / 2))
    mesh = grid.center_mesh()
    dist = np.sqrt(sum((x - c) ** 2 for x, c in zip(mesh, center)))
    return np.maximum(0.0, 1.0 - dist / radius)


def _trig_bump(grid: Grid, rng) -> np.ndarray:
    freq = int(rng.integers(1, 4))
    phase = float(rng.uniform(0, 2 * math.pi))
    mesh = grid.center_mesh()
    wave = sum(np.sin(freq * math.pi * x / grid.L + phase) for x in mesh)
    bump = 0.5 * (1.0 + wave / grid.n)
    return bump * _indicator(grid, rng)


def make_corpus(grid: Grid, m: int, count: int = 20, seed: int = 0) -> list:
    """Deterministic tuples of nonnegative test functions: dyadic-box
    indicators, tents and positive trigonometric bumps."""
    rng = np.random.default_rng(seed)
    kinds = [_indicator, _tent, _trig_bump]
    out = []
    for _ in range(count):
        fs = []
        for _ in range(m):
            kind = kinds[int(rng.integers(0, len(kinds)))]
            fs.append(GridFunction(grid, kind(grid, rng), nonneg=True))
        out.append(tuple(fs))
    return out


# ---------------------------------------------------------------------------
# operator dispatch and discrete norms

def _apply_T(K: Kernel, fs, ell: int, bs=None) -> GridFunction:
    if ell == 0:
        return apply_potential(K, fs)
    if bs is None:
        bs = [gen_bmo_log(fs[0].grid)] * K.m
    return apply_commutator(K, bs, fs)


def _lq_norm(g: GridFunction, q: float) -> float:
    return integrate(g.map(lambda v: np.abs(v) ** q)) ** (1.0 / q)


def lorentz_weak_quasinorm(g: GridFunction, u: GridFunction, p: float) -> float:
    """sup over lambda of lambda * u({|g| > lambda})^(1/p).

    On a grid the sup is attained as lambda approaches a sample value
    from below, so it equals max over distinct values v of
    v * u({|g| >= v})^(1/p).
    """
    if p <= 0:
        raise ValueError("need p > 0")
    av = np.abs(g.values)
    vals = np.unique(av[av > 0])
    if vals.size == 0:
        return 0.0
    cellvol = g.grid.cell_volume
    best = 0.0
    for v in vals:
        mass = float(u.values[av >= v].sum()) * cellvol
        best = max(best, float(v) * mass ** (1.0 / p))
    return best


# ---------------------------------------------------------------------------
# testing condition (B)

@dataclass
class TestingCondition:
    theta: float
    gamma: float
    X: NormSpec
    Y: list  # m x m nested list of NormSpec; Y[i][j]
    u: GridFunction
    vs: list
    kernel: Kernel
    p: float
    q: float
    family: list
    delta: float = 1.0
    eps: float = 0.5

    def __post_init__(self):
        m = self.kernel.m
        if len(self.Y) != m or any(len(row) != m for row in self.Y):
            raise ValueError("Y must be an m x m matrix of norm specs")
        if self.gamma <= 0:
            raise ValueError("need gamma > 0")


def testing_condition_W(tc: TestingCondition) -> float:
    """max over j, sup over the cube family, of the weighted product that
    tests the two-weight hypothesis."""
    for i, v in enumerate(tc.vs):
        if np.any(v.values <= 0):
            raise ValueError(f"weight v_{i + 1} vanishes on a cell")
    K = tc.kernel
    m = K.m
    grid = tc.u.grid
    ug = GridFunction(grid, tc.u.values**tc.gamma)
    invs = [GridFunction(grid, 1.0 / v.values) for v in tc.vs]
    expo = 1.0 / tc.q - 1.0 / tc.p
    best = 0.0
    for Q in tc.family:
        base = phi_theta(K, tc.theta, Q.side, tc.delta, tc.eps)
        base *= Q.measure**expo
        base *= luxemburg_norm(ug, Q, tc.X) ** (1.0 / tc.gamma)
        if base == 0.0:
            continue
        for j in range(m):
            term = base
            for i in range(m):
                term *= luxemburg_norm(invs[i], Q, tc.Y[i][j])
            best = max(best, term)
    return best


def remark_bundle(ell: int, q: float, p_list, delta: float = 0.5) -> dict:
    """Orlicz bundle from the worked examples after the two-weight theorem.

    Returns X^k and Y^k (m x m) for k <= ell, in the form the testing
    condition consumes.
    """
    m = len(p_list)
    pprime = [p / (p - 1.0) for p in p_list]
    y0 = [
        [NormSpec.power_log(pprime[i], pprime[i] - 1.0 + delta) for _ in range(m)]
        for i in range(m)
    ]
    out = {"Y0": y0}
    if q > 1:
        out["X0"] = NormSpec.power_log(q, q - 1.0 + delta)
        if ell == 1:
            out["X1"] = NormSpec.power_log(q, 2.0 * q - 1.0 + delta)
    if ell == 1:
        y1 = [
            [
                NormSpec.power_log(
                    pprime[i],
                    (2.0 if i == j else 1.0) * pprime[i] - 1.0 + delta,
                )
                for j in range(m)
            ]
            for i in range(m)
        ]
        out["Y1"] = y1
    return out


# ---------------------------------------------------------------------------
# harnesses

def verify_strong(
    ell: int,
    p_list,
    q: float,
    kernel: Kernel,
    u: GridFunction,
    vs,
    corpus,
    family,
    bs=None,
    delta_rem: float = 0.5,
    delta: float = 1.0,
    eps: float = 0.5,
) -> InequalityReport:
    """Two-weight strong bound: weighted L^q norm of the operator against
    the product of weighted L^{p_i} norms."""
    m = kernel.m
    if len(p_list) != m:
        raise ValueError("one exponent per linear slot")
    p = 1.0 / sum(1.0 / pi for pi in p_list)
    if not (1.0 / m < p <= q):
        raise HypothesisUnmet(f"exponents must satisfy 1/m < p <= q, got p={p}, q={q}")
    grid = u.grid
    bundle = remark_bundle(ell, q, p_list, delta_rem)
    wvals = {}
    if q > 1:
        Xl = bundle["X1"] if ell == 1 else bundle["X0"]
        wvals["W(1,1,X^l,Y0)"] = testing_condition_W(
            TestingCondition(1.0, 1.0, Xl, bundle["Y0"], u, list(vs), kernel, p, q, family, delta, eps)
        )
        if ell == 1:
            wvals["W(1,1,X0,Y1)"] = testing_condition_W(
                TestingCondition(1.0, 1.0, bundle["X0"], bundle["Y1"], u, list(vs), kernel, p, q, family, delta, eps)
            )
    else:
        wvals["W(q,q,LlogL^lq,Y0)"] = testing_condition_W(
            TestingCondition(q, q, NormSpec.power_log(1.0, ell * q), bundle["Y0"], u, list(vs), kernel, p, q, family, delta, eps)
        )
        if ell == 1:
            wvals["W(q,1,L,Y1)"] = testing_condition_W(
                TestingCondition(q, 1.0, NormSpec.lebesgue(1.0), bundle["Y1"], u, list(vs), kernel, p, q, family, delta, eps)
            )
    for name, val in wvals.items():
        if not math.isfinite(val):
            raise HypothesisUnmet(f"testing condition {name} is not finite")
    report = InequalityReport(
        "strong",
        {
            "ell": ell,
            "p": p_list,
            "q": q,
            "m": m,
            "n": grid.n,
            "N": grid.N,
            "testing": wvals,
            "delta_rem": delta_rem,
        },
    )
    for i, fs in enumerate(corpus):
        T = _apply_T(kernel, fs, ell, bs)
        lhs = _lq_norm(GridFunction(grid, np.abs(T.values) * u.values), q)
        rhs = 1.0
        for f, v, pi in zip(fs, vs, p_list):
            rhs *= _lq_norm(GridFunction(grid, f.values * v.values), pi)
        report.add(lhs, rhs, f"tuple{i}")
    return report


def verify_fefferman_stein(
    case: str,
    ell: int,
    p_list,
    delta: float,
    kernel: Kernel,
    us,
    corpus,
    family,
    bs=None,
) -> InequalityReport:
    """Two-weight bound with a maximal function of the weights on the right."""
    m = kernel.m
    p = 1.0 / sum(1.0 / pi for pi in p_list)
    if case == "i":
        if not (p > 1 and 0 < delta < 1):
            raise ValueError("case i needs p > 1 and delta in (0, 1)")
        phis = PhiScaling.from_kernel(kernel, theta=1.0, power=p)
        wspec = NormSpec.power_log(1.0, p * (1 + ell) - 1.0 + delta)
    elif case == "ii":
        if not (p <= 1 and ell == 0):
            raise ValueError("case ii needs p <= 1 and ell = 0")
        phis = PhiScaling.from_kernel(kernel, theta=p, power=p)
        wspec = NormSpec.lebesgue(1.0)
    elif case == "iii":
        if not (p <= 1 and ell == 1):
            raise ValueError("case iii needs p <= 1 and ell = 1")
        phis = PhiScaling.from_kernel(kernel, theta=p, power=p)
        wspec = NormSpec.lebesgue(1.0 / p)
    else:
        raise ValueError(f"unknown case {case!r}")
    grid = us[0].grid
    mweights = [
        maximal_single(phis, wspec, ui, grid, family) for ui in us
    ]
    report = InequalityReport(
        "fefferman-stein",
        {"case": case, "ell": ell, "p": p_list, "delta": delta, "m": m,
         "n": grid.n, "N": grid.N},
    )
    for i, fs in enumerate(corpus):
        T = _apply_T(kernel, fs, ell, bs)
        uprod = np.ones(grid.shape)
        for ui, pi in zip(us, p_list):
            uprod *= ui.values ** (p / pi)
        lhs = integrate(GridFunction(grid, np.abs(T.values) ** p * uprod)) ** (1.0 / p)
        rhs = 1.0
        for f, pi, mw in zip(fs, p_list, mweights):
            rhs *= integrate(
                GridFunction(grid, np.abs(f.values) ** pi * mw.values)
            ) ** (1.0 / pi)
        report.add(lhs, rhs, f"tuple{i}")
    return report


def verify_coifman(
    case: str,
    ell: int,
    p: float,
    kernel: Kernel,
    w: GridFunction,
    corpus,
    family,
    bs=None,
    rh_exponent: float = 2.0,
) -> InequalityReport:
    """Weighted L^p control of the operator by its maximal operator."""
    grid = w.grid
    if case == "i":
        if not (0 < p <= 1 and ell == 0):
            raise ValueError("case i needs 0 < p <= 1 and ell = 0")
        phis = PhiScaling.from_kernel(kernel, theta=p)
        specs = [NormSpec.lebesgue(1.0)] * kernel.m
        s = rh_exponent
    elif case == "ii":
        if not (0 < p <= 1 and ell == 1):
            raise ValueError("case ii needs 0 < p <= 1 and ell = 1")
        phis = PhiScaling.from_kernel(kernel, theta=p)
        specs = [NormSpec.power_log(1.0, 1.0)] * kernel.m
        s = max(rh_exponent, 1.0 / p) if p < 1 else rh_exponent
    elif case == "iii":
        if not p > 1:
            raise ValueError("case iii needs p > 1")
        phis = PhiScaling.from_kernel(kernel, theta=1.0)
        specs = [NormSpec.power_log(1.0, float(ell))] * kernel.m
        s = rh_exponent
    else:
        raise ValueError(f"unknown case {case!r}")
    rh = rh_check(w, s, family)
    if not math.isfinite(rh) or rh == 0.0:
        raise HypothesisUnmet(f"weight failed RH({s}) certification")
    report = InequalityReport(
        "coifman",
        {"case": case, "ell": ell, "p": p, "m": kernel.m, "n": grid.n,
         "N": grid.N, "rh_exponent": s, "rh_constant": rh},
    )
    for i, fs in enumerate(corpus):
        T = _apply_T(kernel, fs, ell, bs)
        M = maximal(phis, specs, fs, grid, family)
        lhs = integrate(GridFunction(grid, np.abs(T.values) ** p * w.values))
        rhs = integrate(GridFunction(grid, M.values**p * w.values))
        report.add(lhs, rhs, f"tuple{i}")
    return report


def verify_ftd(
    case: str,
    ell: int,
    p: float,
    kernel: Kernel,
    u: GridFunction,
    corpus,
    family,
    bs=None,
) -> InequalityReport:
    """Weighted bound against the maximal operator with a maximal function
    of the weight on the right."""
    if case == "i":
        if not 0 < p <= 1:
            raise ValueError("case i needs 0 < p <= 1")
        gamma = float(ell)
    elif case == "ii":
        if not p > 1:
            raise ValueError("case ii needs p > 1")
        gamma = float(int(ell * p + p))
    else:
        raise ValueError(f"unknown case {case!r}")
    grid = u.grid
    phis = PhiScaling.from_kernel(kernel, theta=1.0)
    specs = [NormSpec.power_log(1.0, float(ell))] * kernel.m
    Mu = maximal_single(
        PhiScaling.constant(1.0), NormSpec.power_log(1.0, gamma), u, grid, family
    )
    report = InequalityReport(
        "for-t-d",
        {"case": case, "ell": ell, "p": p, "gamma": gamma, "m": kernel.m,
         "n": grid.n, "N": grid.N},
    )
    for i, fs in enumerate(corpus):
        T = _apply_T(kernel, fs, ell, bs)
        M = maximal(phis, specs, fs, grid, family)
        lhs = integrate(GridFunction(grid, np.abs(T.values) ** p * u.values))
        rhs = integrate(GridFunction(grid, M.values**p * Mu.values))
        report.add(lhs, rhs, f"tuple{i}")
    return report


def _check_submultiplicative(B: YoungFunction, tol: float = 0.01) -> None:
    ss = np.logspace(-2, 2, 12)
    for s in ss:
        lhs = B(s * ss)
        rhs = B(s) * B(ss)
        if np.any(lhs > rhs * (1.0 + tol) + 1e-300):
            raise HypothesisUnmet("Young function is not submultiplicative")


def verify_weak_maximal(
    phis: PhiScaling,
    B: YoungFunction,
    us,
    corpus,
    family,
    lam_points: int = 64,
) -> InequalityReport:
    """Weighted endpoint bound for the multilinear Orlicz maximal operator."""
    _check_submultiplicative(B)
    m = len(us)
    grid = us[0].grid
    Bm = B.iterate(m)
    psi = PhiScaling.from_profile(lambda t: float(Bm(phis(t) ** (1.0 / m))))
    u = GridFunction(
        grid, np.prod([ui.values for ui in us], axis=0) ** (1.0 / m)
    )
    mw = [
        maximal_single(psi, NormSpec.lebesgue(1.0), ui, grid, family) for ui in us
    ]
    spec = NormSpec.orlicz(B)
    report = InequalityReport(
        "weak-maximal",
        {"m": m, "n": grid.n, "N": grid.N, "lam_points": lam_points},
    )
    cellvol = grid.cell_volume
    for i, fs in enumerate(corpus):
        M = maximal(phis, [spec] * m, fs, grid, family)
        pos = M.values[M.values > 0]
        lhs = 0.0
        if pos.size:
            lam_m = np.logspace(
                math.log10(float(pos.min()) * 0.999),
                math.log10(float(pos.max()) * 1.001),
                lam_points,
            )
            for lm in lam_m:
                lam = lm ** (1.0 / m)
                mass = float(u.values[M.values > lm].sum()) * cellvol
                denom = float(Bm(1.0 / lam))
                if denom > 0:
                    lhs = max(lhs, mass**m / denom)
        rhs = 1.0
        for f, w in zip(fs, mw):
            rhs *= integrate(GridFunction(grid, np.asarray(Bm(np.abs(f.values))) * w.values))
        report.add(lhs, rhs, f"tuple{i}")
    return report


def verify_control(
    ell: int,
    delta_l: float,
    kernel: Kernel,
    u: GridFunction,
    corpus,
    family,
    bs=None,
    us=None,
    corollary_delta: float = 0.5,
) -> InequalityReport:
    """Weak-quasinorm control of the operator by the maximal operator."""
    if delta_l <= 0:
        raise ValueError("need delta_l > 0")
    grid = u.grid
    m = kernel.m
    phis = PhiScaling.from_kernel(kernel, theta=1.0)
    specs = [NormSpec.power_log(1.0, float(ell))] * m
    weight = maximal_single(
        PhiScaling.constant(1.0),
        NormSpec.power_log(1.0, ell + delta_l),
        u,
        grid,
        family,
    )
    report = InequalityReport(
        "control",
        {"ell": ell, "delta_l": delta_l, "m": m, "n": grid.n, "N": grid.N},
    )
    cor_weights = None
    if us is not None:
        inner = [
            maximal_single(
                PhiScaling.constant(1.0),
                NormSpec.power_log(1.0, corollary_delta),
                ui,
                grid,
                family,
            )
            for ui in us
        ]
        cor_weights = [
            maximal_single(
                PhiScaling.from_kernel(kernel, theta=1.0, power=1.0 / m),
                NormSpec.lebesgue(1.0),
                w,
                grid,
                family,
            )
            for w in inner
        ]
    for i, fs in enumerate(corpus):
        T = _apply_T(kernel, fs, ell, bs)
        M = maximal(phis, specs, fs, grid, family)
        lhs = lorentz_weak_quasinorm(T, u, 1.0 / m)
        rhs = lorentz_weak_quasinorm(M, weight, 1.0 / m)
        report.add(lhs, rhs, f"tuple{i}")
        if cor_weights is not None and ell == 0:
            rhs2 = 1.0
            for f, w in zip(fs, cor_weights):
                rhs2 *= integrate(GridFunction(grid, np.abs(f.values) * w.values))
            report.add(lhs, rhs2, f"tuple{i}-corollary")
    return report
