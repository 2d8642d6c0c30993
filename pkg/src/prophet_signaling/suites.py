"""Oracle suites: Monte Carlo agreement, best-response grid search, HEM fixed point."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dist import Dist
from .generators import random_continuous, random_instance, random_small_discrete
from .mc import SimConfig, simulate_signaling, simulate_threshold
from .prophet import nonstrategic_payoff, spectrum
from .reproduce import CaseReport
from .signaling import best_response
from .stackelberg import hem_gap, hem_interior, hem_regime, hem_threshold, solve_hem_two_box, v1
from .strategic import strategic_payoff


@dataclass
class SuiteResult:
    total: int = 0
    agreed: int = 0
    failures: list = field(default_factory=list)


def mc_pair(seed: int):
    inst = random_instance(10_000 + seed)
    rng = np.random.default_rng([11, seed])
    T = float(rng.uniform(0.0, 1.2 * spectrum(inst).hi))
    return inst, T


def mc_agreement(count: int = 200, samples: int = 100_000, seed: int = 0) -> tuple[SuiteResult, SuiteResult]:
    """Analytic strategic and classic payoffs against sampled plays, at 4 sigma."""
    strat, classic = SuiteResult(), SuiteResult()
    for k in range(count):
        inst, T = mc_pair(k)
        cfg = SimConfig(samples, seed + k)
        for res, analytic, sim in (
            (strat, strategic_payoff(inst, T), simulate_signaling(inst, T, cfg)),
            (classic, nonstrategic_payoff(inst, T), simulate_threshold(inst.boxes, T, cfg)),
        ):
            res.total += 1
            if sim.agrees(analytic):
                res.agreed += 1
            else:
                res.failures.append((k, analytic, sim.payoff_mean, sim.payoff_stderr))
    return strat, classic


def grid_min_reject(d: Dist, T: float, step: float = 1e-3) -> float:
    """Smallest rejection probability over two-signal schemes, by exhaustive search.

    An optimal high signal pools whole atoms plus at most one partial atom, so
    every subset of full atoms is tried with every grid fraction of one more.
    """
    xs = np.array([v for v, _ in d.atoms])
    ms = np.array([m for _, m in d.atoms])
    k = xs.size
    fr = np.arange(0.0, 1.0 + step / 2, step)
    best = 0.0
    for mask in itertools.product((0, 1), repeat=k):
        full = np.array(mask, dtype=bool)
        base_mass = ms[full].sum()
        base_gain = (ms[full] * (xs[full] - T)).sum()
        if base_gain >= -1e-15:
            best = max(best, base_mass)
        for j in np.flatnonzero(~full):
            add = fr * ms[j]
            ok = base_gain + add * (xs[j] - T) >= -1e-15
            if ok.any():
                best = max(best, base_mass + add[ok].max())
    return 1.0 - best


def best_response_oracle(count: int = 100, step: float = 1e-3) -> SuiteResult:
    res = SuiteResult()
    for k in range(count):
        rng = np.random.default_rng([13, k])
        d = random_small_discrete(rng)
        lam = d.mean()
        T = float(rng.uniform(lam, d.upper))
        p = best_response(d, T).reject_prob
        p_grid = grid_min_reject(d, T, step)
        res.total += 1
        # the grid can only miss by one step of a single atom's mass
        if p <= p_grid + 1e-12 and p_grid - p <= step * max(m for _, m in d.atoms) + 1e-12:
            res.agreed += 1
        else:
            res.failures.append((k, T, p, p_grid))
    return res


def hem_instances(count: int = 200):
    """Continuous two-box priors in the pooling regime, in seed order."""
    found, seed = [], 0
    while len(found) < count:
        rng = np.random.default_rng([17, seed])
        h1, h2 = random_continuous(rng), random_continuous(rng)
        if hem_regime(h1, h2) == "pooling":
            found.append((seed, h1, h2))
        seed += 1
    return found


def hem_fixed_point(count: int = 200, grid: int = 200) -> SuiteResult:
    res = SuiteResult()
    for seed, h1, h2 in hem_instances(count):
        out = solve_hem_two_box(h1, h2)
        gap = abs(out.extra["b"] - hem_threshold(out.profile))
        lo, hi = hem_interior(h1, 1e-6)
        f = hem_gap(h1, h2, np.linspace(lo, hi, grid))
        decreasing = bool(np.all(np.diff(f) < 0))
        xs = np.linspace(0.0, h2.upper, grid)
        vals = np.asarray(v1(xs, h2))
        slopes = np.diff(vals) / np.diff(xs)
        d2 = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        v_ok = bool(slopes.max() <= 1 + 1e-9 and np.all(np.diff(vals) >= -1e-12) and d2.min() >= -1e-9)
        res.total += 1
        if gap <= 1e-9 and decreasing and v_ok:
            res.agreed += 1
        else:
            res.failures.append((seed, gap, decreasing, v_ok))
    return res


def suite_report(case_id: str, label: str, results: dict, need: dict) -> CaseReport:
    r = CaseReport(case_id, label)
    for name, res in results.items():
        r.check(f"{name}_agreed", res.agreed, f">= {need[name]} of {res.total}", res.agreed >= need[name])
    return r


def check_mc(count: int = 200) -> CaseReport:
    strat, classic = mc_agreement(count)
    need = max(count - count // 50, 0)
    return suite_report("mc-agreement", "analytic vs sampled payoffs at 4 sigma",
                        {"strategic": strat, "classic": classic}, {"strategic": need, "classic": need})


def check_best_response(count: int = 100) -> CaseReport:
    res = best_response_oracle(count)
    return suite_report("best-response-oracle", "best response vs exhaustive two-signal grid",
                        {"best_response": res}, {"best_response": res.total})


def check_hem(count: int = 200) -> CaseReport:
    res = hem_fixed_point(count)
    return suite_report("hem-fixed-point", "HEM two-box fixed point and gap monotonicity",
                        {"hem": res}, {"hem": res.total})
