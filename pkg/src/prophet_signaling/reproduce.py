"""Registry of reproducible cases: counterexamples, tight families and property suites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dist import discrete, mixture, point_mass, uniform
from .generators import random_continuous, random_instance, random_iid
from .prophet import Instance, expected_max, median_of_max, spectrum, nonstrategic_payoff
from .signaling import best_response, binary_reduction
from .stackelberg import (
    DP, DP_H, HEM_H, MEDIAN, MEDIAN_H,
    Policy, Profile, b_m, eval_profile, policy_thresholds, solve_dp_two_box,
    solve_frozen, solve_hem_two_box, v1,
)
from .strategic import (
    TabulatedDensity,
    check_iid_deviation_guarantee,
    check_iid_robustness,
    check_kw_robustness,
    logconcave_robustness_check,
    make_general_tightness_instance,
    make_iid_tightness_instance,
    make_percentage_instance,
    percentage_threshold,
    strategic_payoff,
)

EXACT = 1e-12


@dataclass
class CaseReport:
    case_id: str
    label: str
    rows: list = field(default_factory=list)
    headline: Optional[tuple] = None  # (quantity, value, reference)

    @property
    def passed(self) -> bool:
        return all(r[4] != "FAIL" for r in self.rows)

    def check(self, quantity: str, value: float, reference: str, ok: bool) -> bool:
        self.rows.append((self.case_id, quantity, float(value), reference, "ok" if ok else "FAIL"))
        return ok

    def note(self, quantity: str, value: float, reference: str = "") -> None:
        self.rows.append((self.case_id, quantity, float(value), reference, ""))

    def verdict(self, ratio: float, expect_below: bool) -> None:
        below = ratio < 1.0
        tag = "below-half" if below else "at-least-half"
        ok = below == expect_below
        self.rows.append((self.case_id, "payoff/(OPT/2)", float(ratio),
                          "expected " + ("below-half" if expect_below else "at-least-half"),
                          tag if ok else "FAIL"))
        self.headline = ("payoff/(OPT/2)", float(ratio), tag)

    def summary_row(self) -> tuple:
        q, v, _ = self.headline if self.headline else ("checks", float(len(self.rows)), "")
        return (self.case_id, q, v, self.label, "pass" if self.passed else "FAIL")


def _near(x: float, ref: float, tol: float) -> bool:
    return abs(x - ref) <= tol


def binary01(p_one: float):
    return discrete([(0.0, 1.0 - p_one), (1.0, p_one)])


# counterexamples ----------------------------------------------------------------


def case_hem_2box(count=None) -> CaseReport:
    r = CaseReport("hem-2box", "HEM two-box counterexample: no-information first box")
    h1, h2 = uniform(0.0, 0.5), uniform(0.0, 0.92)
    out = solve_hem_two_box(h1, h2)
    lam1 = h1.mean()
    r.check("lambda1", lam1, "0.25", _near(lam1, 0.25, EXACT))
    r.check("lambda2", h2.mean(), "0.46", _near(h2.mean(), 0.46, EXACT))
    r.check("v1(lambda1)", out.extra["v1_lambda1"], "~0.4940 (1e-3)", _near(out.extra["v1_lambda1"], 0.4940, 1e-3))
    r.check("opt", out.opt, "~0.5053 (1e-3)", _near(out.opt, 0.5053, 1e-3))
    r.check("payoff", out.searcher_payoff, "0.25", _near(out.searcher_payoff, 0.25, EXACT))
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


def case_dp_3box(count=None) -> CaseReport:
    r = CaseReport("dp-3box", "DP three-box counterexample")
    priors = [point_mass(0.2), binary01(0.25), binary01(0.25)]
    tail = solve_dp_two_box(priors[1], priors[2])
    prof = Profile([point_mass(0.2)] + tail.profile.strategies, priors)
    out = eval_profile(Policy(DP), prof)
    r.check("box1_threshold", out.thresholds[0], ">= 0.25", out.thresholds[0] >= 0.25 - EXACT)
    r.check("box1_win_prob", out.win_probs[0], "0", out.win_probs[0] == 0.0)
    r.check("payoff", out.searcher_payoff, "0.25", _near(out.searcher_payoff, 0.25, EXACT))
    r.check("opt", out.opt, "0.55", _near(out.opt, 0.55, EXACT))
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


def case_median_3box(count=None) -> CaseReport:
    r = CaseReport("median-3box", "MEDIAN three-box counterexample")
    priors = [point_mass(0.39), binary01(0.2), binary01(0.2)]
    bm = b_m(priors[1])
    r.check("B_M", bm, "0.4", _near(bm, 0.4, EXACT))
    pooled = [binary_reduction(best_response(h, bm)) for h in priors[1:]]
    out = eval_profile(Policy(MEDIAN), Profile([point_mass(0.39)] + pooled, priors))
    r.check("threshold", out.threshold_used, "0.4", _near(out.threshold_used, 0.4, EXACT))
    r.check("box1_win_prob", out.win_probs[0], "0", out.win_probs[0] == 0.0)
    r.check("payoff", out.searcher_payoff, "0.3", _near(out.searcher_payoff, 0.3, EXACT))
    r.check("opt", out.opt, "0.6096", _near(out.opt, 0.6096, EXACT))
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


def medianh_priors():
    h1 = mixture([5 / 6, 1 / 6], [uniform(0.0, 1 / 24), uniform(23 / 24, 1.0)])
    h2 = mixture([3 / 5, 2 / 5], [uniform(0.0, 1 / 24), uniform(23 / 24, 1.0)])
    return [h1, h2]


def case_medianh_2box(count=None) -> CaseReport:
    r = CaseReport("medianh-2box", "MEDIAN-H two-box counterexample")
    priors = medianh_priors()
    r.check("lambda1", priors[0].mean(), "13/72", _near(priors[0].mean(), 13 / 72, EXACT))
    r.check("lambda2", priors[1].mean(), "97/240", _near(priors[1].mean(), 97 / 240, EXACT))
    out = solve_frozen(MEDIAN_H, priors)
    r.check("threshold", out.threshold_used, "1/24", _near(out.threshold_used, 1 / 24, EXACT))
    r.check("payoff", out.searcher_payoff, "13/72", _near(out.searcher_payoff, 13 / 72, EXACT))
    half = out.opt / 2.0
    r.check("opt/2", half, "in [0.250, 0.254]", 0.250 <= half <= 0.254)
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


def case_dph_3box(count=None) -> CaseReport:
    r = CaseReport("dph-3box", "DP-H three-box counterexample")
    priors = [point_mass(0.25), binary01(0.2), binary01(0.2)]
    out = solve_frozen(DP_H, priors)
    r.check("threshold_box1", out.thresholds[0], "0.36", _near(out.thresholds[0], 0.36, 1e-9))
    r.check("threshold_box2", out.thresholds[1], "0.2", _near(out.thresholds[1], 0.2, 1e-9))
    r.check("box1_win_prob", out.win_probs[0], "0", out.win_probs[0] == 0.0)
    r.check("payoff", out.searcher_payoff, "0.2", _near(out.searcher_payoff, 0.2, EXACT))
    r.check("opt", out.opt, "0.52", _near(out.opt, 0.52, EXACT))
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


def case_hemh_3box(count=None) -> CaseReport:
    r = CaseReport("hemh-3box", "HEM-H three-box counterexample")
    priors = [binary01(1 / 3)] * 3
    sp = spectrum(Instance(priors))
    r.check("t_kw", sp.t_kw, "19/54", _near(sp.t_kw, 19 / 54, EXACT))
    out = solve_frozen(HEM_H, priors)
    r.check("opt", out.opt, "19/27", _near(out.opt, 19 / 27, EXACT))
    w = best_response(priors[0], sp.t_kw).accept_prob
    r.check("accept_prob_per_box", w, "18/19", _near(w, 18 / 19, EXACT))
    r.check("payoff", out.searcher_payoff, "< 19/54", out.searcher_payoff < 19 / 54)
    r.verdict(out.ratio_vs_half_opt, expect_below=True)
    return r


# positive two-box results ---------------------------------------------------------


def two_box_priors(seed: int):
    rng = np.random.default_rng([7, seed])
    return random_continuous(rng), random_continuous(rng)


def _positive(case_id: str, label: str, kind: str, count: Optional[int]) -> CaseReport:
    r = CaseReport(case_id, label)
    n = 500 if count is None else count
    worst, fails = math.inf, 0
    for seed in range(n):
        out = solve_frozen(kind, list(two_box_priors(seed)))
        gap = out.searcher_payoff - 0.5 * out.opt
        worst = min(worst, out.ratio_vs_half_opt)
        fails += gap < -1e-9
    r.note("instances", n)
    r.check("failures", fails, "0", fails == 0)
    r.check("min payoff/(OPT/2)", worst, ">= 1 - 1e-9 relative", fails == 0)
    r.headline = ("min payoff/(OPT/2)", worst, "at-least-half")
    return r


def case_hemh_positive(count=None) -> CaseReport:
    return _positive("hemh-2box-positive", "HEM-H two-box half-approximation", HEM_H, count)


def case_dph_positive(count=None) -> CaseReport:
    return _positive("dph-2box-positive", "DP-H two-box half-approximation", DP_H, count)


# tight families ------------------------------------------------------------------


def general_tightness_best_ratio(N: int, eps: float = 1e-3, s: float = 1e6, points: int = 100):
    inst = make_general_tightness_instance(N, eps, s)
    sp = spectrum(inst)
    opt = expected_max(inst)
    grid = np.linspace(sp.lo, sp.hi, points)
    best = max(strategic_payoff(inst, float(T)) / opt for T in grid)
    bound = (1.0 - (1.0 - 1.0 / (N - 1)) ** (N - 1)) / 2.0
    return best, bound


def case_general_tightness(count=None) -> CaseReport:
    r = CaseReport("general-tightness", "general-prior tightness of the spectrum")
    worst = -math.inf
    for N in (3, 5, 10):
        best, bound = general_tightness_best_ratio(N)
        worst = max(worst, best - bound)
        r.check(f"best_ratio_N{N}", best, f"<= {bound:.6g} + 0.02", best <= bound + 0.02)
    r.headline = ("max(best - bound)", worst, "<= 0.02")
    return r


def iid_tightness_ratios(N: int, a2: float, a1: float = 0.5):
    inst = make_iid_tightness_instance(N, a1, a2)
    opt = expected_max(inst)
    ns = nonstrategic_payoff(inst, float(N)) / opt
    st = strategic_payoff(inst, N - a1) / opt
    return ns, st


def case_iid_tightness(count=None) -> CaseReport:
    r = CaseReport("iid-tightness", "IID tightness of the half bound")
    a1 = 0.5
    for N, a2 in ((50, 500.0), (200, 2000.0)):
        ns, st = iid_tightness_ratios(N, a2, a1)
        r.check(f"nonstrategic_ratio_N{N}", ns, f"{a1 / (a1 + 1):.6g} +- 0.05", _near(ns, a1 / (a1 + 1), 0.05))
        r.check(f"strategic_ratio_N{N}", st, f"{1 / (1 + a1):.6g} +- 0.05", _near(st, 1 / (1 + a1), 0.05))
    return r


def percentage_ratio(n: int = 30) -> float:
    inst = make_percentage_instance(n)
    return strategic_payoff(inst, percentage_threshold(n)) / expected_max(inst)


def case_iid_percentage(count=None) -> CaseReport:
    r = CaseReport("iid-percentage", "IID deviation-guarantee tightness instance")
    n = 30
    ratio = percentage_ratio(n)
    ref = (1 + 1 / math.e) * (math.e - 2) / (math.e - 1)
    r.check("ratio_n30", ratio, f"{ref:.6g} +- 0.05", _near(ratio, ref, 0.05))
    cap = 1 - 1 / math.e
    r.check("ratio_n30_cap", ratio, f"<= {cap:.6g} + 1e-6", ratio <= cap + 1e-6)
    r.headline = ("ratio_n30", ratio, f"<= {cap:.6g}")
    return r


# property suites ---------------------------------------------------------------


def case_kw_robustness(count=None) -> CaseReport:
    r = CaseReport("kw-robustness", "half-expected-max threshold robustness suite")
    n = 1000 if count is None else count
    ws, wn, fails = math.inf, math.inf, 0
    for seed in range(n):
        rep = check_kw_robustness(random_instance(seed))
        ws, wn = min(ws, rep.ratio_strategic), min(wn, rep.ratio_nonstrategic)
        fails += not rep.passed
    r.note("instances", n)
    r.check("min_strategic_ratio", ws, f">= {(1 - 1 / math.e) / 2:.6g}", ws >= (1 - 1 / math.e) / 2 - 1e-9)
    r.check("min_nonstrategic_ratio", wn, ">= 0.5", wn >= 0.5 - 1e-9)
    r.check("failures", fails, "0", fails == 0)
    r.headline = ("min_strategic_ratio", ws, "")
    return r


def case_iid_robustness(count=None) -> CaseReport:
    r = CaseReport("iid-robustness", "IID robustness suites at T* and the induced threshold")
    n = 500 if count is None else count
    ws = wn = wd = math.inf
    pfail = 0
    for seed in range(n):
        d, N = random_iid(seed)
        rep = check_iid_robustness(d, N)
        ws, wn = min(ws, rep.ratio_strategic), min(wn, rep.ratio_nonstrategic)
        pfail += not rep.extra["p_bound_ok"]
        wd = min(wd, check_iid_deviation_guarantee(d, N).ratio_strategic)
    r.note("instances", n)
    r.check("min_strategic_ratio_t_star", ws, ">= 0.5", ws >= 0.5 - 1e-9)
    r.check("min_nonstrategic_ratio_t_star", wn, ">= 0.5", wn >= 0.5 - 1e-9)
    r.check("reject_prob_bound_failures", pfail, "0", pfail == 0)
    bound = 1 - 1 / math.e
    r.check("min_strategic_ratio_induced", wd, f">= {bound:.6g}", wd >= bound - 1e-9)
    r.headline = ("min_strategic_ratio_induced", wd, "")
    return r


def case_logconcave(count=None) -> CaseReport:
    r = CaseReport("logconcave", "log-concave IID uniform robustness")
    td = TabulatedDensity.from_function(lambda x: np.ones_like(x))
    for N in (2, 5, 10):
        rep = logconcave_robustness_check([td] * N, 1.0, 0.0)
        r.check(f"membership_N{N}", float(all(rep.members)), "1", all(rep.members) and rep.n_condition)
        r.check(f"hbar_min_second_diff_N{N}", rep.hbar_min_second_diff, ">= -1e-9", rep.hbar_convex)
        r.check(f"t_sc - 2 t_kw N{N}", rep.t_sc - 2 * rep.t_kw, ">= -1e-9", rep.ordered)
        lo, hi = rep.robustness[0], rep.robustness[-1]
        r.check(f"min_ratio_endpoints_N{N}",
                min(lo.ratio_strategic, lo.ratio_nonstrategic, hi.ratio_strategic, hi.ratio_nonstrategic),
                ">= 0.5", lo.passed and hi.passed)
    return r


CASES: dict[str, Callable[..., CaseReport]] = {
    "hem-2box": case_hem_2box,
    "dp-3box": case_dp_3box,
    "median-3box": case_median_3box,
    "medianh-2box": case_medianh_2box,
    "dph-3box": case_dph_3box,
    "hemh-3box": case_hemh_3box,
    "hemh-2box-positive": case_hemh_positive,
    "dph-2box-positive": case_dph_positive,
    "general-tightness": case_general_tightness,
    "iid-tightness": case_iid_tightness,
    "iid-percentage": case_iid_percentage,
    "kw-robustness": case_kw_robustness,
    "iid-robustness": case_iid_robustness,
    "logconcave": case_logconcave,
}


def reproduce(case_id: str, count: Optional[int] = None) -> CaseReport:
    try:
        fn = CASES[case_id]
    except KeyError:
        raise KeyError(f"unknown case id {case_id!r}; known: {', '.join(CASES)}") from None
    return fn(count)
