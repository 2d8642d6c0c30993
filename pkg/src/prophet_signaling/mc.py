"""Seeded Monte Carlo oracle for searcher payoffs.

Samples are drawn in fixed-size blocks; block k always uses the generator
seeded with (seed, k), and block statistics are combined in block order, so
results do not depend on how many worker streams process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dist import Dist, REWARD_TOL
from .prophet import _as_instance
from .signaling import THRESHOLD_SIGNALING, best_response

BLOCK = 1 << 15


@dataclass(frozen=True)
class SimConfig:
    samples: int = 100_000
    seed: int = 0
    parallel_streams: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.parallel_streams < 1:
            raise ValueError("parallel_streams must be positive")


@dataclass(frozen=True)
class SimResult:
    payoff_mean: float
    payoff_stderr: float
    win_freqs: list
    samples: int

    def agrees(self, value: float, sigmas: float = 4.0) -> bool:
        return abs(self.payoff_mean - value) <= sigmas * self.payoff_stderr + 1e-12


def sample(d: Dist, rng: np.random.Generator, size=None):
    """Inverse-CDF draws from d."""
    u = rng.random(size)
    out = d.quantile_fast(np.atleast_1d(u))
    return float(out[0]) if size is None else out


def _blocks(n: int) -> list[tuple[int, int]]:
    return [(k, min(BLOCK, n - k * BLOCK)) for k in range((n + BLOCK - 1) // BLOCK)]


def _run(block_fn, cfg: SimConfig, n_boxes: int) -> SimResult:
    blocks = _blocks(cfg.samples)
    if cfg.parallel_streams > 1:
        with ThreadPoolExecutor(cfg.parallel_streams) as ex:
            stats = list(ex.map(lambda kb: block_fn(np.random.default_rng([cfg.seed, kb[0]]), kb[1]), blocks))
    else:
        stats = [block_fn(np.random.default_rng([cfg.seed, k]), m) for k, m in blocks]
    total = sq = 0.0
    wins = np.zeros(n_boxes)
    for s, s2, w in stats:
        total += s
        sq += s2
        wins += w
    n = cfg.samples
    mean = total / n
    var = max(sq / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
    return SimResult(mean, math.sqrt(var / n), [float(w) for w in wins / n], n)


def _walk(values: np.ndarray, thresholds: Sequence[float]):
    """values: (boxes, m) posterior means; accept the first meeting its threshold."""
    n_boxes, m = values.shape
    pay = np.zeros(m)
    alive = np.ones(m, dtype=bool)
    wins = np.zeros(n_boxes)
    for i, T in enumerate(thresholds):
        take = alive & (values[i] >= T - REWARD_TOL * max(1.0, abs(T)))
        pay[take] = values[i][take]
        wins[i] = take.sum()
        alive &= ~take
    return float(pay.sum()), float(np.dot(pay, pay)), wins


def simulate(policy, profile, cfg: SimConfig = SimConfig()) -> SimResult:
    """Play the game with posterior means drawn from the submitted strategies."""
    from .stackelberg import policy_thresholds

    thresholds = policy_thresholds(policy, profile)
    strategies = profile.strategies

    def block(rng, m):
        vals = np.stack([d.quantile_fast(rng.random(m)) for d in strategies])
        return _walk(vals, thresholds)

    return _run(block, cfg, len(strategies))


def simulate_threshold(boxes: Sequence[Dist], T: float, cfg: SimConfig = SimConfig()) -> SimResult:
    """Classic game: raw rewards against a single threshold."""
    boxes = list(boxes)

    def block(rng, m):
        vals = np.stack([d.quantile_fast(rng.random(m)) for d in boxes])
        return _walk(vals, [T] * len(boxes))

    return _run(block, cfg, len(boxes))


def simulate_signaling(inst, T: float, cfg: SimConfig = SimConfig()) -> SimResult:
    """Strategic game built from raw rewards: draw X_i, apply each box's pooling rule, walk.

    This path never touches the binary-reduced distributions, so it checks the
    analytic strategic payoff independently.
    """
    inst = _as_instance(inst)
    plans = [best_response(d, T) for d in inst]

    def signal(d: Dist, s, rng, m):
        x = d.quantile_fast(rng.random(m))
        extra = rng.random(m)
        if s.kind != THRESHOLD_SIGNALING:
            return np.full(m, s.mean)
        atom = d.atom_mass_at(s.cutoff)
        frac = s.partial_mass / atom if atom > 0 else 0.0
        high = (x > s.cutoff) | ((x == s.cutoff) & (extra < frac))
        low = s.low_posterior if s.low_posterior is not None else 0.0
        return np.where(high, s.threshold, low)

    def block(rng, m):
        vals = np.stack([signal(d, s, rng, m) for d, s in zip(inst, plans)])
        return _walk(vals, [T] * len(plans))

    return _run(block, cfg, len(plans))
