"""Seeded random instances for the property suites."""

from __future__ import annotations

import numpy as np

from .dist import Dist, mixture, point_mass, uniform, linear
from .prophet import Instance

SUPPORT = 10.0


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_dist(rng, upper: float = SUPPORT) -> Dist:
    """Equal-weight mixture of up to 3 atoms and up to 2 uniform segments on [0, upper]."""
    rng = _rng(rng)
    n_atoms, n_segs = int(rng.integers(0, 4)), int(rng.integers(0, 3))
    if n_atoms + n_segs == 0:
        n_atoms = 1
    comps = [point_mass(float(v)) for v in rng.uniform(0.0, upper, n_atoms)]
    for _ in range(n_segs):
        a, b = np.sort(rng.uniform(0.0, upper, 2))
        if b - a < 1e-3:
            b = a + 1e-3
        comps.append(uniform(float(a), float(b)))
    k = len(comps)
    return mixture([1.0 / k] * k, comps)


def random_instance(seed, n_min: int = 2, n_max: int = 8) -> Instance:
    rng = _rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    return Instance([random_dist(rng) for _ in range(n)])


def random_iid(seed, n_min: int = 2, n_max: int = 8) -> tuple[Dist, int]:
    rng = _rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    return random_dist(rng), n


def random_continuous(rng, upper: float = 1.0) -> Dist:
    """Atom-free prior on [0, upper] with connected support.

    One or two linear-density pieces; the second overlaps the first, so the
    density is positive on a single interval.
    """
    rng = _rng(rng)
    a, b = np.sort(rng.uniform(0.0, upper, 2))
    b = max(b, a + 0.05 * upper)
    if b > upper:
        a, b = upper - 0.05 * upper, upper
    pieces = [(a, b)]
    if rng.random() < 0.5:
        c = rng.uniform(a, b - 1e-3 * upper)
        d = rng.uniform(c + 1e-3 * upper, upper)
        pieces.append((c, d))
    comps = []
    for lo, hi in pieces:
        fa, fb = rng.uniform(0.05, 1.05, 2)
        comps.append(linear(float(lo), float(hi), float(fa), float(fb), normalize=True))
    w = rng.dirichlet(np.ones(len(comps)))
    return mixture(list(w), comps)


def random_small_discrete(rng, max_atoms: int = 6, upper: float = 1.0) -> Dist:
    rng = _rng(rng)
    k = int(rng.integers(2, max_atoms + 1))
    vals = np.round(np.sort(rng.choice(np.arange(0, 101), size=k, replace=False)) * upper / 100, 10)
    w = rng.dirichlet(np.ones(k))
    return Dist(atoms=list(zip(vals, w)), normalize=True)
