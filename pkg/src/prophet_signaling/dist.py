"""Finite reward distributions: point masses plus piecewise-linear densities.

Every quantity the library needs (moments, CDFs with left limits, tail
integrals, superquantiles) is closed-form on this family, so nothing here
relies on quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-12
REWARD_TOL = 1e-10


@dataclass(frozen=True)
class Piece:
    """One ordered component of a Dist: an atom (lo == hi) or a linear-density segment."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float
    mass: float
    is_atom: bool

    @property
    def slope(self) -> float:
        return (self.f_hi - self.f_lo) / (self.hi - self.lo)

    def mass_upto(self, x: float) -> float:
        """Mass of the segment on [lo, x]."""
        d = min(max(x - self.lo, 0.0), self.hi - self.lo)
        return self.f_lo * d + 0.5 * self.slope * d * d

    def moment_upto(self, x: float) -> float:
        """First moment of the segment on [lo, x]."""
        d = min(max(x - self.lo, 0.0), self.hi - self.lo)
        s = self.slope
        return self.lo * (self.f_lo * d + 0.5 * s * d * d) + 0.5 * self.f_lo * d * d + s * d**3 / 3.0

    def excess_above(self, c: float, T: float) -> float:
        """Integral of (x - T) dH over [c, hi] for a segment."""
        full_mass, full_mom = self.mass, self.moment_upto(self.hi)
        return (full_mom - self.moment_upto(c)) - T * (full_mass - self.mass_upto(c))


def _seg_mass(d, f_lo, slope):
    return f_lo * d + 0.5 * slope * d * d


def _seg_moment(d, lo, f_lo, slope):
    return lo * (f_lo * d + 0.5 * slope * d * d) + 0.5 * f_lo * d * d + slope * d**3 / 3.0


class Dist:
    """A reward distribution on [0, upper] made of atoms and linear-density segments.

    Overlapping segments are merged (densities add), coincident atoms are
    merged, and zero-mass pieces are dropped.  Instances are immutable.
    """

    def __init__(
        self,
        atoms: Iterable[tuple[float, float]] = (),
        segments: Iterable[tuple[float, float, float, float]] = (),
        normalize: bool = False,
    ):
        atom_map: dict[float, float] = {}
        for v, m in atoms:
            v, m = float(v), float(m)
            if m < 0:
                raise ValueError(f"negative atom mass {m} at {v}")
            if m == 0:
                continue
            atom_map[v] = atom_map.get(v, 0.0) + m
        segs = []
        for lo, hi, f_lo, f_hi in segments:
            lo, hi, f_lo, f_hi = float(lo), float(hi), float(f_lo), float(f_hi)
            if not hi > lo:
                raise ValueError(f"segment [{lo}, {hi}] is empty")
            if f_lo < 0 or f_hi < 0:
                raise ValueError("segment densities must be nonnegative")
            if f_lo == 0 and f_hi == 0:
                continue
            segs.append((lo, hi, f_lo, f_hi))
        segs = _split_at(_merge_segments(segs), sorted(atom_map))

        av = np.array(sorted(atom_map), dtype=float)
        am = np.array([atom_map[v] for v in sorted(atom_map)], dtype=float)
        seg = np.array(segs, dtype=float).reshape(-1, 4)

        total = am.sum() + (0.5 * (seg[:, 2] + seg[:, 3]) * (seg[:, 1] - seg[:, 0])).sum()
        if total <= 0:
            raise ValueError("distribution has no mass")
        if normalize:
            am = am / total
            seg[:, 2:] = seg[:, 2:] / total
        elif abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total!r} differs from 1")
        lows = np.concatenate([av, seg[:, 0]])
        if lows.size and lows.min() < 0:
            raise ValueError("rewards must be nonnegative")

        self._av, self._am = av, am
        self._slo, self._shi = seg[:, 0].copy(), seg[:, 1].copy()
        self._sflo, self._sfhi = seg[:, 2].copy(), seg[:, 3].copy()
        for arr in (self._av, self._am, self._slo, self._shi, self._sflo, self._sfhi):
            arr.setflags(write=False)
        self._build_tables()

    # construction helpers -------------------------------------------------

    def _build_tables(self) -> None:
        av, am = self._av, self._am
        lo, hi, flo, fhi = self._slo, self._shi, self._sflo, self._sfhi
        length = hi - lo
        self._slope = np.divide(fhi - flo, length, out=np.zeros_like(length), where=length > 0)
        seg_mass = 0.5 * (flo + fhi) * length
        seg_mom = _seg_moment(length, lo, flo, self._slope)
        self._seg_mass, self._seg_mom = seg_mass, seg_mom

        self._acum = np.concatenate([[0.0], np.cumsum(am)])
        self._amom = np.concatenate([[0.0], np.cumsum(am * av)])
        self._asuf = np.concatenate([np.cumsum(am[::-1])[::-1], [0.0]])
        self._amsuf = np.concatenate([np.cumsum((am * av)[::-1])[::-1], [0.0]])
        self._scum = np.concatenate([[0.0], np.cumsum(seg_mass)])
        self._smom = np.concatenate([[0.0], np.cumsum(seg_mom)])
        self._ssuf = np.concatenate([np.cumsum(seg_mass[::-1])[::-1], [0.0]])
        self._smsuf = np.concatenate([np.cumsum(seg_mom[::-1])[::-1], [0.0]])

        self._mean = float(self._amom[-1] + self._smom[-1])
        ends = [self._av[-1]] if av.size else []
        if hi.size:
            ends.append(hi[-1])
        self._upper = float(max(ends))
        starts = []
        if av.size:
            starts.append(av[0])
        if lo.size:
            starts.append(lo[0])
        self._lower = float(min(starts))

        pieces = [Piece(v, v, 0.0, 0.0, m, True) for v, m in zip(av, am)]
        pieces += [
            Piece(a, b, fa, fb, m, False)
            for a, b, fa, fb, m in zip(lo, hi, flo, fhi, seg_mass)
        ]
        # an atom at a segment's left end precedes it; segments are pre-split at atoms
        pieces.sort(key=lambda p: (p.lo, 0 if p.is_atom else 1))
        self._pieces = tuple(pieces)
        self._pcum = np.cumsum([p.mass for p in pieces])
        mass = np.array([p.mass for p in pieces])
        self._ptab = (
            np.array([p.lo for p in pieces]),
            np.array([p.hi for p in pieces]),
            np.array([p.f_lo for p in pieces]),
            np.array([0.0 if p.is_atom else p.slope for p in pieces]),
            mass,
            self._pcum - mass,
        )

    # basic properties -----------------------------------------------------

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(v), float(m)) for v, m in zip(self._av, self._am)]

    @property
    def segments(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(a), float(b), float(c), float(d))
            for a, b, c, d in zip(self._slo, self._shi, self._sflo, self._sfhi)
        ]

    @property
    def pieces(self) -> tuple[Piece, ...]:
        """Atoms and segments in increasing order of position."""
        return self._pieces

    @property
    def upper(self) -> float:
        return self._upper

    @property
    def lower(self) -> float:
        return self._lower

    @property
    def is_continuous(self) -> bool:
        return self._av.size == 0

    @property
    def is_point_mass(self) -> bool:
        return self._av.size == 1 and self._slo.size == 0

    @property
    def cdf_degree(self) -> int:
        """Polynomial degree of the CDF between breakpoints."""
        if self._slo.size == 0:
            return 0
        return 2 if np.any(self._sflo != self._sfhi) else 1

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self._av, self._slo, self._shi]))

    def atom_mass_at(self, x: float) -> float:
        i = np.searchsorted(self._av, x)
        if i < self._av.size and abs(self._av[i] - x) <= 1e-14 * max(1.0, abs(x)):
            return float(self._am[i])
        return 0.0

    def key(self) -> tuple:
        return tuple(
            arr.tobytes() for arr in (self._av, self._am, self._slo, self._shi, self._sflo, self._sfhi)
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Dist) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        parts = [f"{v:.6g}:{m:.6g}" for v, m in self.atoms]
        parts += [f"[{a:.6g},{b:.6g}]~({c:.6g},{d:.6g})" for a, b, c, d in self.segments]
        return f"Dist({', '.join(parts)})"

    # distribution functions -----------------------------------------------

    def _seg_index(self, x):
        j = np.searchsorted(self._slo, x, side="right") - 1
        return np.clip(j, 0, max(self._slo.size - 1, 0)), j

    def _seg_prefix(self, x, moment: bool):
        """Segment mass (or moment) on [0, x]; segments carry no atoms so ends are irrelevant."""
        x = np.asarray(x, dtype=float)
        if self._slo.size == 0:
            return np.zeros_like(x)
        jc, j = self._seg_index(x)
        d = np.clip(x - self._slo[jc], 0.0, self._shi[jc] - self._slo[jc])
        if moment:
            part = self._smom[jc] + _seg_moment(d, self._slo[jc], self._sflo[jc], self._slope[jc])
        else:
            part = self._scum[jc] + _seg_mass(d, self._sflo[jc], self._slope[jc])
        return np.where(j < 0, 0.0, part)

    def _seg_suffix(self, x, moment: bool):
        """Segment mass (or moment) on [x, U]."""
        x = np.asarray(x, dtype=float)
        if self._slo.size == 0:
            return np.zeros_like(x)
        jc, j = self._seg_index(x)
        d = np.clip(x - self._slo[jc], 0.0, self._shi[jc] - self._slo[jc])
        if moment:
            full, part, suf = self._seg_mom[jc], _seg_moment(d, self._slo[jc], self._sflo[jc], self._slope[jc]), self._smsuf
        else:
            full, part, suf = self._seg_mass[jc], _seg_mass(d, self._sflo[jc], self._slope[jc]), self._ssuf
        rest = suf[jc + 1] + (full - part)
        return np.where(j < 0, suf[0], rest)

    @staticmethod
    def _out(val):
        return float(val) if np.ndim(val) == 0 else val

    def cdf(self, x):
        """P(X <= x)."""
        i = np.searchsorted(self._av, x, side="right")
        return self._out(np.minimum(self._acum[i] + self._seg_prefix(x, False), 1.0))

    def cdf_left(self, x):
        """P(X < x)."""
        i = np.searchsorted(self._av, x, side="left")
        return self._out(np.minimum(self._acum[i] + self._seg_prefix(x, False), 1.0))

    def sf(self, x):
        """P(X > x), accumulated from the top for tail accuracy."""
        i = np.searchsorted(self._av, x, side="right")
        return self._out(np.maximum(self._asuf[i] + self._seg_suffix(x, False), 0.0))

    def sf_incl(self, x):
        """P(X >= x)."""
        i = np.searchsorted(self._av, x, side="left")
        return self._out(np.maximum(self._asuf[i] + self._seg_suffix(x, False), 0.0))

    def partial_moment(self, x, include_atom: bool = True):
        """Integral of u dH(u) over [0, x] (or [0, x) when include_atom is false)."""
        i = np.searchsorted(self._av, x, side="right" if include_atom else "left")
        return self._out(self._amom[i] + self._seg_prefix(x, True))

    def upper_tail_value(self, t, include_atom: bool = False):
        """Integral of x dH(x) over (t, U], or [t, U] when include_atom is true."""
        i = np.searchsorted(self._av, t, side="left" if include_atom else "right")
        return self._out(self._amsuf[i] + self._seg_suffix(t, True))

    def expected_excess(self, T):
        """E[(X - T)^+]."""
        return self._out(np.asarray(self.upper_tail_value(T)) - np.asarray(T) * np.asarray(self.sf(T)))

    def mean(self) -> float:
        return self._mean

    def quantile(self, u):
        """Generalized inverse CDF, inf{x : F(x) >= u}."""
        u = np.asarray(u, dtype=float)
        out = np.empty(u.shape)
        flat_u, flat_out = u.reshape(-1), out.reshape(-1)
        k_all = np.searchsorted(self._pcum, flat_u - MASS_TOL, side="left")
        for n, (uu, k) in enumerate(zip(flat_u, k_all)):
            if k >= len(self._pieces):
                flat_out[n] = self._upper
                continue
            p = self._pieces[k]
            if p.is_atom:
                flat_out[n] = p.lo
                continue
            start = self._pcum[k] - p.mass
            r = min(max(uu - start, 0.0), p.mass)
            flat_out[n] = p.lo + _solve_seg_mass(p.f_lo, p.slope, r, p.hi - p.lo)
        return self._out(out)

    def quantile_fast(self, u: np.ndarray) -> np.ndarray:
        """Vectorized quantile for large sample arrays."""
        u = np.asarray(u, dtype=float)
        lo, hi, flo, slope, mass, start = self._ptab
        k = np.minimum(np.searchsorted(self._pcum, u - MASS_TOL, side="left"), len(self._pieces) - 1)
        r = np.clip(u - start[k], 0.0, mass[k])
        disc = np.sqrt(np.maximum(flo[k] ** 2 + 2.0 * slope[k] * r, 0.0))
        denom = flo[k] + disc
        d = np.divide(2.0 * r, denom, out=np.zeros_like(r), where=denom > 0)
        d = np.clip(d, 0.0, hi[k] - lo[k])
        return lo[k] + d

    def lower_median(self) -> float:
        """inf{c : P(X >= c) <= 1/2}."""
        return float(self.quantile(0.5))

    def superquantile(self, w: float) -> float:
        """Mean of the top-w probability mass, splitting an atom at the cut if needed."""
        if not w > 0:
            raise ValueError(f"superquantile level must be positive, got {w}")
        if w >= 1.0 - MASS_TOL:
            return self._mean
        c = float(self.quantile(1.0 - w))
        above = self.sf(c)
        q = min(max(w - above, 0.0), self.atom_mass_at(c))
        return (self.upper_tail_value(c) + q * c) / (above + q) if above + q > 0 else c

    def conditional_split(self, t):
        """(E[X | X < t], E[X | X >= t], P(X < t)); t may be an array."""
        low = np.asarray(self.cdf_left(t))
        if np.any(low <= MASS_TOL) or np.any(low >= 1.0 - MASS_TOL):
            raise ValueError(f"split point {t} leaves one side without mass")
        a = np.asarray(self.partial_moment(t, include_atom=False)) / low
        b = np.asarray(self.upper_tail_value(t, include_atom=True)) / (1.0 - low)
        return self._out(a), self._out(b), self._out(low)

    def integrated_cdf(self, x):
        """Integral of F over [0, x], i.e. E[(x - X)^+]."""
        x = np.asarray(x, dtype=float)
        return self._out(x * np.asarray(self.cdf(x)) - np.asarray(self.partial_moment(x)))


def _solve_seg_mass(f_lo: float, slope: float, r: float, length: float) -> float:
    """Smallest d in [0, length] with f_lo*d + slope*d^2/2 = r."""
    if r <= 0:
        return 0.0
    disc = max(f_lo * f_lo + 2.0 * slope * r, 0.0)
    denom = f_lo + np.sqrt(disc)
    if denom <= 0:
        return length
    return float(min(2.0 * r / denom, length))


def _split_at(segs, cuts):
    out = []
    for lo, hi, f_lo, f_hi in segs:
        inner = [c for c in cuts if lo < c < hi]
        pts = [lo] + inner + [hi]
        slope = (f_hi - f_lo) / (hi - lo)
        for a, b in zip(pts[:-1], pts[1:]):
            out.append((a, b, f_lo + slope * (a - lo), f_lo + slope * (b - lo)))
    return out


def _merge_segments(segs):
    if len(segs) <= 1:
        return segs
    segs = sorted(segs)
    if all(a[1] <= b[0] for a, b in zip(segs[:-1], segs[1:])):
        return segs
    cuts = sorted({x for s in segs for x in s[:2]})
    merged = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        fa = fb = 0.0
        for lo, hi, f_lo, f_hi in segs:
            if lo <= a and b <= hi:
                slope = (f_hi - f_lo) / (hi - lo)
                fa += f_lo + slope * (a - lo)
                fb += f_lo + slope * (b - lo)
        if fa > 0 or fb > 0:
            merged.append((a, b, fa, fb))
    return merged


# constructors ----------------------------------------------------------


def point_mass(v: float) -> Dist:
    return Dist(atoms=[(v, 1.0)])


def uniform(a: float, b: float) -> Dist:
    if not b > a:
        raise ValueError(f"uniform needs a < b, got [{a}, {b}]")
    f = 1.0 / (b - a)
    return Dist(segments=[(a, b, f, f)])


def discrete(points: Sequence[tuple[float, float]], normalize: bool = False) -> Dist:
    return Dist(atoms=points, normalize=normalize)


def linear(lo: float, hi: float, f_lo: float, f_hi: float, normalize: bool = False) -> Dist:
    return Dist(segments=[(lo, hi, f_lo, f_hi)], normalize=normalize)


def two_point(low: float, high: float, p_high: float) -> Dist:
    """Two atoms; collapses to a point mass when one side is empty."""
    if p_high >= 1.0 - MASS_TOL:
        return point_mass(high)
    if p_high <= MASS_TOL:
        return point_mass(low)
    return Dist(atoms=[(low, 1.0 - p_high), (high, p_high)])


def mixture(weights: Sequence[float], components: Sequence[Dist]) -> Dist:
    """Flatten a finite mixture into a single Dist."""
    if len(weights) != len(components):
        raise ValueError("weights and components differ in length")
    if any(w < 0 for w in weights):
        raise ValueError("mixture weights must be nonnegative")
    atoms, segs = [], []
    for w, c in zip(weights, components):
        atoms += [(v, w * m) for v, m in c.atoms]
        segs += [(a, b, w * fa, w * fb) for a, b, fa, fb in c.segments]
    return Dist(atoms=atoms, segments=segs)
