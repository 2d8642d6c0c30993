"""Searcher payoff under strategic signaling, robustness checks and tight instances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dist import Dist, discrete, point_mass, two_point
from .prophet import (
    Instance,
    _as_instance,
    expected_max,
    nonstrategic_payoff,
    product_cdf,
    spectrum,
)
from .signaling import (
    ALWAYS_REJECTED,
    NO_INFORMATION,
    best_response,
    induce_threshold_by_product,
)

KW_BOUND = (1.0 - 1.0 / math.e) / 2.0
IID_DEVIATION_BOUND = 1.0 - 1.0 / math.e
CHECK_TOL = 1e-9


def strategic_payoff(inst, T: float, reject_probs: Optional[Sequence[float]] = None) -> float:
    """Expected searcher reward when every box best-responds to threshold T.

    `reject_probs` overrides the players' rejection probabilities (used when
    a target product forces partial atom pooling at a jump).
    """
    inst = _as_instance(inst)
    reach, total = 1.0, 0.0
    for i, d in enumerate(inst):
        s = best_response(d, T)
        if s.kind == NO_INFORMATION:
            return total + reach * s.mean
        p = s.reject_prob if reject_probs is None else reject_probs[i]
        total += reach * (1.0 - p) * T
        reach *= p
    return total


def strategic_payoff_closed_form(inst, T: float) -> float:
    """T * (1 - prod p_i); valid only when T exceeds every mean."""
    inst = _as_instance(inst)
    if T <= max(inst.means):
        raise ValueError("closed form needs T above every box mean")
    return T * (1.0 - float(np.prod([best_response(d, T).reject_prob for d in inst])))


@dataclass
class RobustnessReport:
    T: float
    u_strategic: float
    u_nonstrategic: float
    opt: float
    ratio_strategic: float
    ratio_nonstrategic: float
    bound_strategic: Optional[float] = None
    bound_nonstrategic: Optional[float] = None
    passed: bool = True
    extra: dict = field(default_factory=dict)

    def rows(self, case_id: str = "report") -> list[tuple]:
        out = [
            (case_id, "T", self.T, "", ""),
            (case_id, "opt", self.opt, "", ""),
            (case_id, "u_strategic", self.u_strategic, "", ""),
            (case_id, "u_nonstrategic", self.u_nonstrategic, "", ""),
        ]
        verdict = "pass" if self.passed else "FAIL"
        out.append((case_id, "ratio_strategic", self.ratio_strategic,
                    "" if self.bound_strategic is None else f">= {self.bound_strategic:.6g}", verdict))
        out.append((case_id, "ratio_nonstrategic", self.ratio_nonstrategic,
                    "" if self.bound_nonstrategic is None else f">= {self.bound_nonstrategic:.6g}", verdict))
        return out


def _ratio(u: float, opt: float) -> float:
    return u / opt if opt > 0 else 1.0


def robustness_report(
    inst,
    T: float,
    bound_s: Optional[float] = None,
    bound_ns: Optional[float] = None,
    reject_probs: Optional[Sequence[float]] = None,
    opt: Optional[float] = None,
) -> RobustnessReport:
    inst = _as_instance(inst)
    opt = expected_max(inst) if opt is None else opt
    us = strategic_payoff(inst, T, reject_probs)
    uns = nonstrategic_payoff(inst, T)
    rs, rns = _ratio(us, opt), _ratio(uns, opt)
    ok = True
    if bound_s is not None:
        ok &= rs >= bound_s - CHECK_TOL
    if bound_ns is not None:
        ok &= rns >= bound_ns - CHECK_TOL
    return RobustnessReport(T, us, uns, opt, rs, rns, bound_s, bound_ns, bool(ok))


def check_kw_robustness(inst) -> RobustnessReport:
    """Evaluate T = OPT/2 against the (1 - 1/e)/2 strategic and 1/2 classic bounds."""
    inst = _as_instance(inst)
    opt = expected_max(inst)
    return robustness_report(inst, opt / 2.0, KW_BOUND, 0.5, opt=opt)


def opt_upper_bound_cutoffs(inst, T: float) -> float:
    """p_I t_I + sum_i T (1 - p_i) with I the box holding the largest cutoff."""
    inst = _as_instance(inst)
    if T <= max(inst.means):
        raise ValueError("bound needs T above every box mean")
    cut, rej = [], []
    for d in inst:
        s = best_response(d, T)
        if s.kind == ALWAYS_REJECTED:
            cut.append(d.upper)
            rej.append(1.0)
        else:
            cut.append(s.cutoff)
            rej.append(s.reject_prob)
    I = int(np.argmax(cut))
    return rej[I] * cut[I] + sum(T * (1.0 - p) for p in rej)


def check_iid_robustness(d: Dist, N: int) -> RobustnessReport:
    """IID boxes at T = T*: both ratios at least 1/2, and p <= 1 - 1/N."""
    if N < 1:
        raise ValueError("need at least one box")
    inst = Instance([d] * N)
    T = spectrum(inst).t_star
    rep = robustness_report(inst, T, 0.5, 0.5)
    p = best_response(d, T).reject_prob
    rep.extra["reject_prob"] = p
    rep.extra["p_bound_ok"] = bool(p <= 1.0 - 1.0 / N + CHECK_TOL)
    rep.passed = rep.passed and rep.extra["p_bound_ok"]
    return rep


def check_iid_deviation_guarantee(d: Dist, N: int) -> RobustnessReport:
    """IID boxes at the threshold inducing prod p_i = (1 - 1/N)^N."""
    if N < 2:
        raise ValueError("need at least two boxes")
    inst = Instance([d] * N)
    P = (1.0 - 1.0 / N) ** N
    if d.is_point_mass:
        # rejection jumps 0 -> 1 at v; accepting v outright is optimal
        T, ps = d.mean(), [0.0] * N
    else:
        T, ps = induce_threshold_by_product(inst, P)
    rep = robustness_report(inst, T, IID_DEVIATION_BOUND, None, reject_probs=ps)
    rep.extra["target_product"] = P
    rep.extra["reject_probs"] = ps
    return rep


# instance families ----------------------------------------------------------


def make_general_tightness_instance(N: int, eps: float, s: float) -> Instance:
    """A point mass at N - 1 - eps followed by N - 1 boxes {0, s} with mean 1."""
    if N < 3 or not 0 < eps < 1 or s <= N:
        raise ValueError("need N >= 3, 0 < eps < 1 and s > N")
    risky = two_point(0.0, s, 1.0 / s)
    return Instance([point_mass(N - 1 - eps)] + [risky] * (N - 1))


def make_iid_tightness_instance(N: int, a1: float, a2: float) -> Instance:
    """N IID boxes on {N - a1, N + a2}, each with mean exactly N."""
    if N < 1 or not 0 < a1 < 1 or a2 <= 0:
        raise ValueError("need N >= 1, 0 < a1 < 1 and a2 > 0")
    low_mass = a2 / (a1 + a2)
    return Instance([two_point(N - a1, N + a2, 1.0 - low_mass)] * N)


def make_percentage_instance(n: int) -> Instance:
    """n^2 IID boxes on {0, 1, n/(e-2)} with masses {rest, 1/n, 1/n^3}."""
    if n < 2:
        raise ValueError("need n >= 2")
    top, p_top, p_one = n / (math.e - 2.0), n**-3.0, 1.0 / n
    d = discrete([(0.0, 1.0 - p_top - p_one), (1.0, p_one), (top, p_top)])
    return Instance([d] * (n * n))


def percentage_threshold(n: int) -> float:
    return (math.e - 1.0) * n / ((math.e - 2.0) * (n + 1))


def iid_helper_f(x, N: int):
    """(1 - x^N) / (2 - x)."""
    x = np.asarray(x, dtype=float)
    return (1.0 - x**N) / (2.0 - x)


def kw_helper_g(x, N: int):
    """(1 - x) / (N + 1 - N x^(1/N))."""
    x = np.asarray(x, dtype=float)
    return (1.0 - x) / (N + 1.0 - N * x ** (1.0 / N))


# log-concave densities ------------------------------------------------------


@dataclass(frozen=True)
class TabulatedDensity:
    """A density on [0, 1] sampled on a uniform grid."""

    grid: np.ndarray
    values: np.ndarray

    MIN_POINTS = 1024

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if g.size < self.MIN_POINTS:
            raise ValueError(f"grid too coarse: {g.size} < {self.MIN_POINTS} points")
        if abs(g[0]) > 1e-12 or abs(g[-1] - 1.0) > 1e-12:
            raise ValueError("grid must span [0, 1]")
        if np.ptp(np.diff(g)) > 1e-9:
            raise ValueError("grid must be uniform")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative")
        if abs(np.trapezoid(v, g) - 1.0) > 1e-6:
            raise ValueError("density does not integrate to 1")

    @classmethod
    def from_function(cls, f, points: int = 2049) -> "TabulatedDensity":
        g = np.linspace(0.0, 1.0, points)
        return cls(g, np.asarray(f(g), dtype=float) * np.ones_like(g))

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def to_dist(self) -> Dist:
        """Piecewise-linear interpolant, renormalized to absorb the trapezoid error."""
        g, v = self.grid, self.values
        segs = [(a, b, fa, fb) for a, b, fa, fb in zip(g[:-1], g[1:], v[:-1], v[1:])]
        return Dist(segments=segs, normalize=True)

    def is_log_concave(self, slack: float = 1e-7) -> tuple[bool, float]:
        """Second differences of log f on the positive part, all <= slack."""
        v = self.values
        pos = np.flatnonzero(v > 0)
        if pos.size == 0:
            return False, math.inf
        if pos[-1] - pos[0] + 1 != pos.size:
            return False, math.inf  # support with a hole
        lf = np.log(v[pos])
        if lf.size < 3:
            return True, 0.0
        d2 = lf[:-2] - 2.0 * lf[1:-1] + lf[2:]
        worst = float(d2.max())
        return worst <= slack, worst

    def end_value(self) -> float:
        return float(self.values[-1])

    def end_slope(self) -> float:
        return float((self.values[-1] - self.values[-2]) / self.step)


@dataclass
class LogConcaveReport:
    n: int
    alpha: float
    beta: float
    members: list
    n_condition: bool
    hbar_min_second_diff: float
    hbar_convex: bool
    jensen_value: float
    t_kw: float
    t_sc: float
    ordered: bool
    robustness: list
    passed: bool


def logconcave_robustness_check(
    densities: Sequence[TabulatedDensity],
    alpha: float,
    beta: float,
    convex_tol: float = 1e-9,
    slope_tol: float = 1e-6,
) -> LogConcaveReport:
    """Verify the log-concave family conditions and 1/2-robustness on [2 T_KW, T_SC]."""
    if alpha <= 0 or beta < 0:
        raise ValueError("need alpha > 0 and beta >= 0")
    members = []
    for td in densities:
        lc, _ = td.is_log_concave()
        members.append(bool(lc and td.end_value() >= alpha - slope_tol and td.end_slope() >= -beta - slope_tol))
    N = len(densities)
    n_cond = N >= 1 + beta / alpha**2
    inst = Instance([td.to_dist() for td in densities])
    grid = densities[0].grid
    H = product_cdf(inst, grid)
    d2 = H[:-2] - 2.0 * H[1:-1] + H[2:]
    min_d2 = float(d2.min()) if d2.size else 0.0
    convex = min_d2 >= -convex_tol
    sp = spectrum(inst)
    opt = 2.0 * sp.t_kw
    jensen = float(product_cdf(inst, opt))
    ordered = 2.0 * sp.t_kw <= sp.t_sc + CHECK_TOL
    lo, hi = 2.0 * sp.t_kw, sp.t_sc
    reps = [robustness_report(inst, T, 0.5, 0.5, opt=opt) for T in (lo, 0.5 * (lo + hi), hi)]
    passed = all(members) and n_cond and convex and ordered and all(r.passed for r in reps)
    return LogConcaveReport(N, alpha, beta, members, n_cond, min_d2, convex, jensen,
                            sp.t_kw, sp.t_sc, ordered, reps, passed)
