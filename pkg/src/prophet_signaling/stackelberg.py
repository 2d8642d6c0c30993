"""Two-box Stackelberg solvers and profile evaluation for DP, HEM and MEDIAN policies.

Prior-free policies recompute thresholds from the submitted posterior-mean
distributions; the frozen ("-H") variants compute them once from the priors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .dist import Dist, REWARD_TOL, point_mass, two_point
from .prophet import dp_thresholds, expected_max, median_of_max, walk_payoff
from .signaling import ALWAYS_REJECTED, best_response, binary_reduction, is_mpc

DP, HEM, MEDIAN = "DP", "HEM", "MEDIAN"
DP_H, HEM_H, MEDIAN_H = "DP_H", "HEM_H", "MEDIAN_H"
FIXED = "FIXED"
KINDS = (DP, HEM, MEDIAN, DP_H, HEM_H, MEDIAN_H, FIXED)


class UnsupportedCase(ValueError):
    pass


@dataclass(frozen=True)
class Policy:
    kind: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == FIXED and self.value is None:
            raise ValueError("a fixed-threshold policy needs a value")

    @classmethod
    def fixed(cls, T: float) -> "Policy":
        return cls(FIXED, float(T))

    @property
    def frozen(self) -> bool:
        return self.kind in (DP_H, HEM_H, MEDIAN_H, FIXED)


@dataclass
class Profile:
    strategies: list
    priors: list

    def __post_init__(self):
        self.strategies, self.priors = list(self.strategies), list(self.priors)
        if len(self.strategies) != len(self.priors):
            raise ValueError("one strategy per prior is required")

    @classmethod
    def full_information(cls, priors: Sequence[Dist]) -> "Profile":
        return cls(list(priors), list(priors))

    def validate(self, tol: float = 1e-10) -> None:
        for i, (g, h) in enumerate(zip(self.strategies, self.priors)):
            ok, worst = is_mpc(g, h, tol)
            if not ok:
                raise ValueError(f"strategy {i} is not a mean-preserving contraction (violation {worst:.3g})")


@dataclass
class EquilibriumOutcome:
    profile: Profile
    searcher_payoff: float
    win_probs: list
    threshold_used: float
    ratio_vs_half_opt: float
    opt: float = 0.0
    thresholds: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def policy_thresholds(policy: Policy, profile: Profile) -> list[float]:
    n = len(profile.priors)
    basis = profile.priors if policy.frozen else profile.strategies
    kind = policy.kind
    if kind in (DP, DP_H):
        return dp_thresholds(basis)
    if kind in (HEM, HEM_H):
        return [0.5 * expected_max(basis)] * n
    if kind in (MEDIAN, MEDIAN_H):
        return [median_of_max(basis)] * n
    return [policy.value] * n


def eval_profile(policy: Policy, profile: Profile, validate: bool = True) -> EquilibriumOutcome:
    """Searcher payoff and win probabilities when the policy faces these strategies."""
    if validate:
        profile.validate()
    ts = policy_thresholds(policy, profile)
    pay, wins = walk_payoff(profile.strategies, ts)
    opt = expected_max(profile.priors)
    return EquilibriumOutcome(profile, pay, wins, ts[0], pay / (opt / 2.0), opt, ts)


def v1(x, h2: Dist):
    """E[max(x, X2)]."""
    x = np.asarray(x, dtype=float)
    out = x * np.asarray(h2.cdf(x)) + np.asarray(h2.upper_tail_value(x))
    return float(out) if out.ndim == 0 else out


def binary_pooling(d: Dist, t: float) -> Dist:
    """{E[X | X < t] w.p. H(t-), E[X | X >= t] otherwise}."""
    a, b, low = d.conditional_split(t)
    return two_point(a, b, 1.0 - low)


def hem_threshold(profile: Profile) -> float:
    return 0.5 * expected_max(profile.strategies)


def hem_gap(h1: Dist, h2: Dist, t):
    """Half the expected max under box 1's split at t, minus the split's upper posterior."""
    a, b, low = h1.conditional_split(t)
    out = 0.5 * (low * np.asarray(v1(a, h2)) + (1.0 - low) * np.asarray(v1(b, h2))) - b
    return float(out) if np.ndim(out) == 0 else out


def hem_interior(h1: Dist, margin: float = 1e-9) -> tuple[float, float]:
    span = h1.upper - h1.lower
    return h1.lower + margin * span, h1.upper - margin * span


def hem_regime(h1: Dist, h2: Dist) -> str:
    """'no-information', 'pooling', or 'unreachable' (box 1 can never meet the threshold)."""
    lam1 = h1.mean()
    if lam1 >= 0.5 * v1(lam1, h2):
        return "no-information"
    lo, hi = hem_interior(h1)
    return "pooling" if hem_gap(h1, h2, hi) < 0 else "unreachable"


def solve_hem_two_box(h1: Dist, h2: Dist) -> EquilibriumOutcome:
    if not h1.is_continuous:
        raise UnsupportedCase("HEM two-box solver needs an atom-free first prior")
    lam1 = h1.mean()
    regime = hem_regime(h1, h2)
    extra = {"regime": regime, "v1_lambda1": v1(lam1, h2)}
    if regime == "no-information":
        prof = Profile([point_mass(lam1), h2], [h1, h2])
    elif regime == "pooling":
        lo, hi = hem_interior(h1)
        t = brentq(lambda s: hem_gap(h1, h2, s), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        g1 = binary_pooling(h1, t)
        prof = Profile([g1, h2], [h1, h2])
        extra.update(t_star=t, b=h1.conditional_split(t)[1])
    else:
        raise UnsupportedCase("box 1's upper posterior cannot reach the HEM threshold for any cutoff")
    out = eval_profile(Policy(HEM), prof)
    out.extra.update(extra)
    return out


def solve_dp_two_box(h1: Dist, h2: Dist) -> EquilibriumOutcome:
    lam1, lam2 = h1.mean(), h2.mean()
    if lam1 >= lam2:
        g1 = point_mass(lam1)
    else:
        g1 = binary_reduction(best_response(h1, lam2))
    out = eval_profile(Policy(DP), Profile([g1, h2], [h1, h2]))
    return out


def b_m(h2: Dist) -> float:
    """Upper posterior of box 2's split at its lower median, upper signal of mass 1/2."""
    return h2.superquantile(0.5)


def solve_median_two_box(h1: Dist, h2: Dist) -> EquilibriumOutcome:
    bm = b_m(h2)
    lam1 = h1.mean()
    g2 = binary_reduction(best_response(h2, bm))
    if lam1 >= bm - REWARD_TOL * max(1.0, bm):
        g1 = point_mass(lam1)
    elif best_response(h1, bm).kind == ALWAYS_REJECTED:
        # box 1 cannot reach B_M and loses whatever it sends; it stays silent
        g1 = point_mass(lam1)
        lam2 = h2.mean()
        if lam1 >= lam2:
            raise UnsupportedCase("box 2 must beat lambda_1 by an arbitrarily small margin; no best response")
        g2 = point_mass(lam2)
    else:
        g1 = binary_reduction(best_response(h1, bm))
    out = eval_profile(Policy(MEDIAN), Profile([g1, g2], [h1, h2]))
    out.extra["b_m"] = bm
    return out


def best_response_to_fixed(priors: Sequence[Dist], thresholds: Sequence[float]) -> Profile:
    """Each box maximizes its chance of meeting its own frozen threshold."""
    strategies = [binary_reduction(best_response(h, T)) for h, T in zip(priors, thresholds)]
    return Profile(strategies, list(priors))


def solve_frozen(policy_kind: str, priors: Sequence[Dist]) -> EquilibriumOutcome:
    """Frozen-threshold game: thresholds from priors, boxes best-respond to them."""
    pol = Policy(policy_kind)
    ts = policy_thresholds(pol, Profile.full_information(priors))
    prof = best_response_to_fixed(priors, ts)
    return eval_profile(pol, prof)


def solve_two_box(policy_kind: str, h1: Dist, h2: Dist) -> EquilibriumOutcome:
    if policy_kind == DP:
        return solve_dp_two_box(h1, h2)
    if policy_kind == HEM:
        return solve_hem_two_box(h1, h2)
    if policy_kind == MEDIAN:
        return solve_median_two_box(h1, h2)
    return solve_frozen(policy_kind, [h1, h2])


def reproduce_counterexample(case_id: str):
    """Build, solve and judge one registered case (see the reproduce module)."""
    from .reproduce import reproduce

    return reproduce(case_id)
