"""Players' optimal information revelation against a posted threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .dist import MASS_TOL, REWARD_TOL, Dist, point_mass, two_point
from .prophet import Instance, _as_instance

NO_INFORMATION = "NoInformation"
THRESHOLD_SIGNALING = "ThresholdSignaling"
ALWAYS_REJECTED = "AlwaysRejected"


@dataclass(frozen=True)
class PoolingStrategy:
    """A player's two-signal response to threshold T.

    The high signal pools every reward above `cutoff` plus `partial_mass` of
    an atom sitting at `cutoff`; its posterior mean is exactly T.
    """

    kind: str
    threshold: float
    mean: float
    accept_prob: float
    cutoff: Optional[float] = None
    partial_mass: float = 0.0
    low_posterior: Optional[float] = None
    reject_prob: Optional[float] = None

    def __post_init__(self):
        if self.reject_prob is None:
            object.__setattr__(self, "reject_prob", 1.0 - self.accept_prob)

    @property
    def p(self) -> float:
        return self.reject_prob

    @property
    def posterior_high(self) -> float:
        return self.mean if self.kind == NO_INFORMATION else self.threshold


def _tol(T: float) -> float:
    return REWARD_TOL * max(1.0, abs(T))


def best_response(d: Dist, T: float) -> PoolingStrategy:
    """Signaling that maximizes the probability of meeting threshold T."""
    if T < 0:
        raise ValueError("threshold must be nonnegative")
    lam = d.mean()
    if T <= lam + _tol(T):
        return PoolingStrategy(NO_INFORMATION, T, lam, 1.0, reject_prob=0.0)
    if T > d.upper + _tol(T):
        return PoolingStrategy(ALWAYS_REJECTED, T, lam, 0.0, low_posterior=lam, reject_prob=1.0)
    if T >= d.upper:
        m = d.atom_mass_at(d.upper)
        if m <= 0:
            # no positive mass can average to the very top of a density
            return PoolingStrategy(ALWAYS_REJECTED, T, lam, 0.0, low_posterior=lam, reject_prob=1.0)
        T = d.upper
        return _finish(d, T, d.upper, m, lam)

    g = 0.0  # integral of (x - T) dH over the pooled top part
    pieces = d.pieces
    for k in range(len(pieces) - 1, -1, -1):
        pc = pieces[k]
        if pc.is_atom:
            step = pc.mass * (pc.lo - T)
            if g + step >= 0:
                g += step
                continue
            if g <= 0:
                return _stop_above(d, T, pieces, k, lam)
            return _finish(d, T, pc.lo, min(g / (T - pc.lo), pc.mass), lam)
        step = pc.excess_above(pc.lo, T)
        if g + step >= 0:
            g += step
            continue
        top = min(pc.hi, T)
        h = lambda x: g + pc.excess_above(x, T)
        if h(top) <= 0:
            return _stop_above(d, T, pieces, k, lam)
        c = brentq(h, pc.lo, top, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return _finish(d, T, c, 0.0, lam)
    # every piece pooled yet mean < T cannot happen; fall back to full pooling
    return PoolingStrategy(NO_INFORMATION, T, lam, 1.0, reject_prob=0.0)


def _stop_above(d: Dist, T: float, pieces, k: int, lam: float) -> PoolingStrategy:
    """Pooled part ends exactly at piece k + 1: use the largest valid cutoff."""
    if k + 1 >= len(pieces):
        return PoolingStrategy(ALWAYS_REJECTED, T, lam, 0.0, low_posterior=lam, reject_prob=1.0)
    nxt = pieces[k + 1]
    return _finish(d, T, nxt.lo, nxt.mass if nxt.is_atom else 0.0, lam)


def _finish(d: Dist, T: float, cutoff: float, q: float, lam: float) -> PoolingStrategy:
    atom = d.atom_mass_at(cutoff)
    q = min(max(q, 0.0), atom)
    low_mass = d.cdf_left(cutoff) + (atom - q)
    accept = d.sf(cutoff) + q
    low_mom = d.partial_moment(cutoff, include_atom=False) + (atom - q) * cutoff
    a = low_mom / low_mass if low_mass > MASS_TOL else None
    return PoolingStrategy(
        THRESHOLD_SIGNALING, float(T), lam, float(accept), cutoff=float(cutoff), partial_mass=float(q),
        low_posterior=None if a is None else float(a), reject_prob=float(low_mass),
    )


def rejection_prob(d: Dist, T: float) -> float:
    return best_response(d, T).reject_prob


def binary_reduction(s: PoolingStrategy, d: Optional[Dist] = None) -> Dist:
    """Posterior-mean distribution induced by s: {a: p, T: 1 - p}."""
    if s.kind != THRESHOLD_SIGNALING or s.low_posterior is None:
        return point_mass(s.mean)
    return two_point(s.low_posterior, s.threshold, s.accept_prob)


def is_mpc(g: Dist, h: Dist, tol: float = 1e-10) -> tuple[bool, float]:
    """Is g a mean-preserving contraction of h?  Returns (verdict, max violation).

    Checks E[g] = E[h] and int_0^t G <= int_0^t H on merged breakpoints plus
    interior samples of every cell.
    """
    bps = np.unique(np.concatenate([[0.0], g.breakpoints(), h.breakpoints(), [max(g.upper, h.upper)]]))
    fr = np.linspace(0.0, 1.0, 17)
    pts = np.unique((bps[:-1, None] + (bps[1:] - bps[:-1])[:, None] * fr[None, :]).ravel())
    gap = np.asarray(g.integrated_cdf(pts)) - np.asarray(h.integrated_cdf(pts))
    worst = max(float(gap.max()), abs(g.mean() - h.mean()))
    return worst <= tol, worst


def min_reject_product(inst, T: float) -> tuple[float, list[float]]:
    inst = _as_instance(inst)
    ps = [best_response(d, T).reject_prob for d in inst]
    return float(np.prod(ps)), ps


def induce_threshold_by_product(inst, P: float) -> tuple[float, list[float]]:
    """Threshold T and per-player rejection probabilities with product exactly P.

    The minimal product is bisected in T. Where it jumps past P (an atom, or
    an atom so close to T that no float lands on P), T is taken on the low
    side and players raise their rejection probability in index order. Any
    p_i between the minimum and 1 keeps the high posterior at exactly T: the
    pooled signal is simply sent with proportionally lower probability.
    """
    inst = _as_instance(inst)
    if not 0 <= P < 1:
        raise ValueError("target product must lie in [0, 1)")
    lo = max(inst.means)
    if P == 0:
        return lo, min_reject_product(inst, lo)[1]
    hi = inst.upper
    f = lambda T: min_reject_product(inst, T)[0] - P
    if f(hi) >= 0:
        T = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        prod, ps = min_reject_product(inst, T)
        if abs(prod - P) <= 1e-9:
            return float(T), ps
        for _ in range(64):
            if prod < P or T <= lo:
                break
            T = float(np.nextafter(T, -np.inf))
            prod, ps = min_reject_product(inst, T)
    else:
        T = hi
    prod, ps = min_reject_product(inst, T)
    for i, d in enumerate(inst):
        if prod >= P:
            break
        # a box at or below its mean is accepted whatever it signals
        if best_response(d, T).kind == NO_INFORMATION:
            continue
        rest = float(np.prod(ps[:i] + ps[i + 1:]))
        if rest <= 0:
            continue
        ps[i] = min(1.0, P / rest)
        prod = rest * ps[i]
    if abs(prod - P) > 1e-9:
        # only boxes accepted outright remain, e.g. a point mass at T
        raise ValueError(f"product {P!r} is not attainable: rejection jumps past it at T = {T!r}")
    return float(T), ps
