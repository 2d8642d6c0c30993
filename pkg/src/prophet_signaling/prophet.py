"""Classic prophet quantities: expected max, threshold spectrum, threshold and DP payoffs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .dist import MASS_TOL, REWARD_TOL, Dist


class Instance:
    """An ordered sequence of boxes, each with a prior Dist."""

    def __init__(self, boxes: Sequence[Dist]):
        boxes = tuple(boxes)
        if not boxes:
            raise ValueError("an instance needs at least one box")
        for b in boxes:
            if not isinstance(b, Dist):
                raise TypeError(f"box {b!r} is not a Dist")
        self.boxes = boxes

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self) -> Iterator[Dist]:
        return iter(self.boxes)

    def __getitem__(self, i):
        return self.boxes[i]

    def __repr__(self) -> str:
        return f"Instance({list(self.boxes)!r})"

    @property
    def means(self) -> list[float]:
        return [b.mean() for b in self.boxes]

    @property
    def upper(self) -> float:
        return max(b.upper for b in self.boxes)


def _as_instance(inst) -> Instance:
    return inst if isinstance(inst, Instance) else Instance(inst)


@dataclass(frozen=True)
class ThresholdSpectrum:
    t_kw: float
    t_sc: float
    median_lower: float
    t_star: float

    @property
    def lo(self) -> float:
        return self.t_kw

    @property
    def hi(self) -> float:
        return max(self.t_sc, self.t_star)


def _grid(inst: Instance) -> np.ndarray:
    pts = np.concatenate([[0.0]] + [b.breakpoints() for b in inst])
    return np.unique(pts)


def product_cdf(inst, x, left: bool = False):
    """P(max_i X_i <= x), or P(max < x) with left=True."""
    inst = _as_instance(inst)
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for b in inst:
        out = out * (b.cdf_left(x) if left else b.cdf(x))
    return float(out) if out.ndim == 0 else out


def expected_max(inst) -> float:
    """OPT = integral of 1 - prod_i H_i over [0, U], exact per breakpoint cell."""
    inst = _as_instance(inst)
    grid = _grid(inst)
    if grid.size < 2:
        return float(grid[-1])
    degree = sum(b.cdf_degree for b in inst)
    nodes, weights = np.polynomial.legendre.leggauss(max(degree // 2 + 1, 1))
    a, b = grid[:-1], grid[1:]
    half = 0.5 * (b - a)
    xs = (0.5 * (a + b))[:, None] + half[:, None] * nodes[None, :]
    vals = 1.0 - product_cdf(inst, xs.ravel()).reshape(xs.shape)
    return float(np.sum(half * (vals @ weights)))


def _first_crossing(inst: Instance, level: float, strict: bool) -> float:
    """inf{x : F(x) >= level} (or > level when strict) for the product CDF F.

    The cell is located with a MASS_TOL allowance; inside it the root is
    taken against the nominal level so exact instances land on exact values.
    """
    target = level + MASS_TOL if strict else level - MASS_TOL
    grid = _grid(inst)
    F = product_cdf(inst, grid)
    hit = F > target if strict else F >= target
    k = int(np.argmax(hit))
    if not hit[k]:
        return float(grid[-1])
    if k == 0:
        return float(grid[0])
    lo, hi = grid[k - 1], grid[k]
    below = product_cdf(inst, hi, left=True)
    if not ((below > target) if strict else (below >= target)):
        return float(hi)
    g = lambda x: product_cdf(inst, x) - level
    if g(lo) >= 0:
        return float(lo)
    if g(hi) <= 0:
        return float(hi)
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def median_of_max(inst) -> float:
    """inf{c : P(max >= c) <= 1/2}."""
    return _first_crossing(_as_instance(inst), 0.5, strict=False)


def t_sc(inst) -> float:
    """sup{t : P(max >= t) >= 1/2}."""
    return _first_crossing(_as_instance(inst), 0.5, strict=True)


def t_star(inst) -> float:
    """Fixed point of T = sum_i E[(X_i - T)^+]."""
    inst = _as_instance(inst)
    g = lambda T: sum(b.expected_excess(T) for b in inst) - T
    hi = sum(inst.means) + inst.upper
    if g(0.0) <= 0:
        return 0.0
    return float(brentq(g, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps))


def spectrum(inst) -> ThresholdSpectrum:
    inst = _as_instance(inst)
    return ThresholdSpectrum(
        t_kw=expected_max(inst) / 2.0,
        t_sc=t_sc(inst),
        median_lower=median_of_max(inst),
        t_star=t_star(inst),
    )


def accept_cut(d: Dist, T: float) -> float:
    """Effective acceptance point: an atom within REWARD_TOL below T counts as a tie."""
    cands = [v for v, _ in d.atoms if T - REWARD_TOL * max(1.0, abs(T)) <= v < T]
    return cands[-1] if cands else T


def walk_payoff(boxes: Sequence[Dist], thresholds: Sequence[float]) -> tuple[float, list[float]]:
    """Expected reward and per-box win probability of accepting the first X_i >= T_i."""
    if len(boxes) != len(thresholds):
        raise ValueError("one threshold per box is required")
    reach, total, wins = 1.0, 0.0, []
    for d, T in zip(boxes, thresholds):
        c = accept_cut(d, T)
        take = d.sf_incl(c)
        total += reach * d.upper_tail_value(c, include_atom=True)
        wins.append(reach * take)
        reach *= 1.0 - take
    return total, wins


def nonstrategic_payoff(inst, T: float) -> float:
    """Expected reward of a single threshold T applied to the raw rewards; ties accepted."""
    if T < 0:
        raise ValueError("threshold must be nonnegative")
    inst = _as_instance(inst)
    return walk_payoff(inst.boxes, [T] * len(inst))[0]


def dp_values(inst) -> list[float]:
    """[V_1, ..., V_N, 0] by backward induction; box i's threshold is V_{i+1}."""
    inst = _as_instance(inst)
    vals = [0.0]
    for d in reversed(inst.boxes):
        v = vals[0]
        vals.insert(0, v * d.cdf(v) + d.upper_tail_value(v))
    return vals


def dp_thresholds(inst) -> list[float]:
    return dp_values(inst)[1:]


def nonstrategic_dp_payoff(inst) -> float:
    return dp_values(inst)[0]
