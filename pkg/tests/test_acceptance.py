"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a single pass/fail line; the lines are repeated in the
"acceptance criteria" section of the pytest terminal summary.
"""

import functools
import math

import numpy as np
import pytest
from scipy import integrate

from prophet_signaling.generators import random_instance, random_iid
from prophet_signaling.prophet import expected_max, nonstrategic_payoff
from prophet_signaling.reproduce import (
    general_tightness_best_ratio, medianh_priors, percentage_ratio, reproduce, two_box_priors,
)
from prophet_signaling.stackelberg import DP_H, HEM_H, solve_frozen
from prophet_signaling.strategic import (
    check_iid_deviation_guarantee, check_iid_robustness, check_kw_robustness,
    make_iid_tightness_instance, strategic_payoff,
)
from prophet_signaling.suites import check_best_response, check_hem, check_mc

EXACT = 1e-12
BOUND_1E = 1 - 1 / math.e


def val(rep, quantity):
    return next(r[2] for r in rep.rows if r[1] == quantity)


def below_half(rep):
    return rep.headline is not None and rep.headline[2] == "below-half"


def test_c01_hem_2box(criterion):
    rep = reproduce("hem-2box")
    pay, opt, v = val(rep, "payoff"), val(rep, "opt"), val(rep, "v1(lambda1)")
    ok = abs(pay - 0.25) <= EXACT and abs(opt - 0.5053) <= 1e-3 and abs(v - 0.4940) <= 1e-3 and below_half(rep)
    assert criterion(1, ok, f"hem-2box payoff={pay:.12g} opt={opt:.6g} v1={v:.6g}")


def test_c02_dp_3box(criterion):
    rep = reproduce("dp-3box")
    pay, opt = val(rep, "payoff"), val(rep, "opt")
    ok = abs(pay - 0.25) <= EXACT and abs(opt - 0.55) <= EXACT and below_half(rep)
    assert criterion(2, ok, f"dp-3box payoff={pay:.12g} opt={opt:.12g}")


def test_c03_median_3box(criterion):
    rep = reproduce("median-3box")
    bm, pay, opt = val(rep, "B_M"), val(rep, "payoff"), val(rep, "opt")
    ok = (abs(bm - 0.4) <= EXACT and abs(pay - 0.3) <= EXACT and abs(opt - 0.6096) <= EXACT
          and below_half(rep))
    assert criterion(3, ok, f"median-3box B_M={bm:.12g} payoff={pay:.12g} opt={opt:.12g}")


def test_c04_medianh_2box(criterion):
    rep = reproduce("medianh-2box")
    t, pay = val(rep, "threshold"), val(rep, "payoff")
    # OPT recomputed by adaptive quadrature of 1 - F1 F2, apart from the engine
    h1, h2 = medianh_priors()
    pts = [1 / 24, 23 / 24]
    opt_q, _ = integrate.quad(lambda x: 1 - h1.cdf(x) * h2.cdf(x), 0, 1, points=pts, epsabs=1e-13, limit=200)
    half = opt_q / 2
    ok = (abs(t - 1 / 24) <= EXACT and abs(pay - 13 / 72) <= EXACT and 0.250 <= half <= 0.254
          and abs(half - val(rep, "opt/2")) <= 1e-9 and below_half(rep))
    assert criterion(4, ok, f"medianh-2box threshold={t:.12g} payoff={pay:.12g} opt/2={half:.6g}")


def test_c05_dph_hemh_3box(criterion):
    dph, hemh = reproduce("dph-3box"), reproduce("hemh-3box")
    t1, t2 = val(dph, "threshold_box1"), val(dph, "threshold_box2")
    ok_d = (abs(t1 - 0.36) <= 1e-9 and abs(t2 - 0.2) <= 1e-9 and abs(val(dph, "payoff") - 0.2) <= EXACT
            and abs(val(dph, "opt") - 0.52) <= EXACT and below_half(dph))
    tkw, opt, pay = val(hemh, "t_kw"), val(hemh, "opt"), val(hemh, "payoff")
    ok_h = abs(tkw - 19 / 54) <= EXACT and abs(opt - 19 / 27) <= EXACT and pay < 19 / 54
    assert criterion(5, ok_d and ok_h,
                     f"dph-3box thresholds=({t1:.9g}, {t2:.9g}); hemh-3box t_kw={tkw:.12g} payoff={pay:.6g}")


def test_c06_two_box_positive(criterion):
    worst = {HEM_H: math.inf, DP_H: math.inf}
    for seed in range(500):
        priors = list(two_box_priors(seed))
        for kind in worst:
            out = solve_frozen(kind, priors)
            worst[kind] = min(worst[kind], out.searcher_payoff - 0.5 * out.opt)
    ok = all(w >= -1e-9 for w in worst.values())
    assert criterion(6, ok, f"500 pairs, min payoff - OPT/2: HEM-H {worst[HEM_H]:.3g}, DP-H {worst[DP_H]:.3g}")


def test_c07_kw_suite(criterion):
    ws = wn = math.inf
    for seed in range(1000):
        rep = check_kw_robustness(random_instance(seed))
        ws, wn = min(ws, rep.ratio_strategic), min(wn, rep.ratio_nonstrategic)
    ok = ws >= BOUND_1E / 2 - 1e-9 and wn >= 0.5 - 1e-9
    assert criterion(7, ok, f"1000 instances, min ratios strategic={ws:.6g} classic={wn:.6g}")


def test_c08_general_tightness(criterion):
    gaps = {}
    for N in (3, 5, 10):
        best, bound = general_tightness_best_ratio(N)
        gaps[N] = best - bound
    ok = all(g <= 0.02 for g in gaps.values())
    assert criterion(8, ok, "best ratio - bound: " + ", ".join(f"N={n} {g:.4g}" for n, g in gaps.items()))


@functools.lru_cache(maxsize=None)
def iid_suite():
    ws = wn = wd = math.inf
    pfail = 0
    for seed in range(500):
        d, N = random_iid(seed)
        rep = check_iid_robustness(d, N)
        ws, wn = min(ws, rep.ratio_strategic), min(wn, rep.ratio_nonstrategic)
        pfail += not rep.extra["p_bound_ok"]
        wd = min(wd, check_iid_deviation_guarantee(d, N).ratio_strategic)
    return ws, wn, pfail, wd


def test_c09_iid_suite(criterion):
    ws, wn, pfail, _ = iid_suite()
    ok = ws >= 0.5 - 1e-9 and wn >= 0.5 - 1e-9 and pfail == 0
    assert criterion(9, ok, f"500 IID instances at T*, strategic={ws:.6g} classic={wn:.6g} p-bound misses={pfail}")


def test_c10_iid_deviation(criterion):
    wd = iid_suite()[3]
    ok_suite = wd >= BOUND_1E - 1e-9
    ratio = percentage_ratio(30)
    ref = (1 + 1 / math.e) * (math.e - 2) / (math.e - 1)
    ok_near = abs(ratio - ref) <= 0.05
    ok_cap = ratio <= BOUND_1E + 1e-6
    ok = ok_suite and ok_near and ok_cap
    assert criterion(10, ok, f"induced threshold min ratio={wd:.6g} ({'ok' if ok_suite else 'FAIL'}); "
                             f"n=30 family ratio={ratio:.6g} vs {ref:.6g} +- 0.05 ({'ok' if ok_near else 'FAIL'}), "
                             f"cap {BOUND_1E:.6g} ({'ok' if ok_cap else 'FAIL'})")


def test_c11_iid_tightness(criterion):
    a1 = 0.5
    worst_ns = worst_st = 0.0
    for N, a2 in ((50, 500.0), (200, 2000.0)):
        inst = make_iid_tightness_instance(N, a1, a2)
        opt = expected_max(inst)
        for T in (N - a1 + 1e-6, N, N + a2 / 2, N + a2):
            worst_ns = max(worst_ns, abs(nonstrategic_payoff(inst, T) / opt - a1 / (a1 + 1)))
        for T in (0.0, N / 2, N - 1.0, N - a1):
            worst_st = max(worst_st, abs(strategic_payoff(inst, T) / opt - 1 / (1 + a1)))
    ok = worst_ns <= 0.05 and worst_st <= 0.05
    assert criterion(11, ok, f"max deviation classic={worst_ns:.4g} strategic={worst_st:.4g}")


def test_c12_logconcave(criterion):
    rep = reproduce("logconcave")
    ok = rep.passed and len(rep.rows) == 12
    worst = min(r[2] for r in rep.rows if r[1].startswith("min_ratio"))
    assert criterion(12, ok, f"uniform N in (2, 5, 10), min endpoint ratio={worst:.6g}")


def test_c13_oracles(criterion):
    mc = check_mc(200)
    br = check_best_response(100)
    agreed = {r[1]: r[2] for r in mc.rows + br.rows}
    ok = agreed["strategic_agreed"] >= 196 and agreed["classic_agreed"] >= 196 and br.passed
    assert criterion(13, ok, f"MC agreement strategic={agreed['strategic_agreed']:.0f}/200 "
                             f"classic={agreed['classic_agreed']:.0f}/200; "
                             f"best response grid {agreed['best_response_agreed']:.0f}/100")


def test_c14_hem_fixed_point(criterion):
    rep = check_hem(200)
    n = rep.rows[0][2]
    assert criterion(14, rep.passed, f"{n:.0f}/200 pooling-regime pairs meet gap, monotonicity and v1 checks")
