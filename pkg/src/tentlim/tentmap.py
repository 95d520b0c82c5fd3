"""Core tent-map dynamics.

The tent map with slope s sends x to s*min(x, 1-x).  Slopes live in the
closed interval [sqrt(2), 2]; the boundary slopes have preperiodic critical
orbits and make the best exact test fixtures, so they are admitted and
flagged via :meth:`TentMap.on_boundary`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

from .errors import DomainError
from .scalars import (
    EPS,
    ErrFloat,
    Real,
    err_bound,
    is_exact,
    midpoint_le,
    parse_scalar,
    possibly_equal,
    value,
)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TentMap:
    """Immutable tent map; all operations are pure functions of the inputs."""

    slope: Real
    domain_tol: float = 1e-12

    def __post_init__(self):
        s = self.slope
        if isinstance(s, Fraction):
            if s * s < 2 or s > 2:
                raise DomainError(f"slope {s} outside [sqrt(2), 2]")
        elif isinstance(s, ErrFloat):
            lo = s.val + s.err
            hi = s.val - s.err
            if lo < SQRT2 - self.domain_tol or hi > 2.0 + self.domain_tol:
                raise DomainError(f"slope {s.val} outside [sqrt(2), 2]")
        else:
            raise TypeError("slope must be a Fraction or ErrFloat")

    # derived constants ------------------------------------------------------

    @property
    def exact(self) -> bool:
        return isinstance(self.slope, Fraction)

    @property
    def half(self) -> Real:
        return Fraction(1, 2) if self.exact else ErrFloat(0.5)

    @property
    def critical_value(self) -> Real:
        """T(1/2) = s/2, the top of the invariant core."""
        return self.slope / 2

    @property
    def fixed_point(self) -> Real:
        """The positive fixed point s/(s+1)."""
        return self.slope / (self.slope + 1)

    @property
    def zero(self) -> Real:
        return Fraction(0) if self.exact else ErrFloat(0.0)

    def on_boundary(self) -> bool:
        """Whether the slope sits at an endpoint of the admissible interval."""
        if self.exact:
            return self.slope == 2
        return (
            abs(value(self.slope) - 2.0) <= 1e-9
            or abs(value(self.slope) - SQRT2) <= 1e-9
        )

    def scalar(self, x) -> Real:
        """Coerce an input to this map's arithmetic mode.

        In exact mode floats are converted by exact binary expansion, so
        0.25 means 1/4 but 0.1 means the nearest double to 0.1.
        """
        if self.exact:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, int):
                return Fraction(x)
            if isinstance(x, float):
                return Fraction(x)
            if isinstance(x, str):
                return Fraction(x)
            raise TypeError(f"cannot use {type(x).__name__} with an exact map")
        if isinstance(x, str):
            return ErrFloat(float(Fraction(x)), EPS)
        return ErrFloat.of(x)

    # dynamics ---------------------------------------------------------------

    def apply(self, x) -> Real:
        """One application of the map; result lies in [0, s/2]."""
        u = self.scalar(x)
        v = value(u)
        if v < -self.domain_tol - err_bound(u) or v > 1.0 + self.domain_tol + err_bound(u):
            raise DomainError(f"{v} outside [0, 1]")
        if self.exact:
            u = min(max(u, Fraction(0)), Fraction(1))
            return self.slope * (u if u <= Fraction(1, 2) else 1 - u)
        # branch by midpoint; a misclassified branch near 1/2 costs at most
        # 2*s*err, which is folded into the propagated bound below
        out = self.slope * (u if v <= 0.5 else 1 - u)
        if abs(v - 0.5) <= err_bound(u):
            out = ErrFloat(out.val, out.err + 2.0 * value(self.slope) * err_bound(u))
        return out

    def __call__(self, x) -> Real:
        return self.apply(x)

    def iterate(self, x, n: int) -> Real:
        u = self.scalar(x)
        for _ in range(n):
            u = self.apply(u)
        return u

    def orbit(self, x, n: int) -> List[Real]:
        """[x, T(x), ..., T^n(x)], length n+1."""
        if n < 0:
            raise DomainError("orbit length must be >= 0")
        u = self.scalar(x)
        out = [u]
        for _ in range(n):
            u = self.apply(u)
            out.append(u)
        return out

    def branch_preimage(self, y, symbol: str) -> Real:
        """The left (y/s) or right (1 - y/s) branch preimage of y."""
        u = self.scalar(y)
        if symbol == "L":
            return u / self.slope
        if symbol == "R":
            return 1 - u / self.slope
        raise ValueError(f"branch symbol must be 'L' or 'R', got {symbol!r}")

    def preimages(self, y, j: int) -> List[Real]:
        """The full set T^{-j}(y), sorted ascending.

        Computed by recursive branch inversion.  An intermediate point above
        s/2 has no further preimages and is pruned; y = s/2 contributes the
        single preimage 1/2.
        """
        if j < 0:
            raise DomainError("preimage depth must be >= 0")
        u = self.scalar(y)
        top = self.critical_value
        tol = self.domain_tol + err_bound(u)
        if value(u) > value(top) + tol or value(u) < -tol:
            raise DomainError(f"{value(u)} outside [0, T(1/2)]")
        current = [u]
        for _ in range(j):
            nxt: List[Real] = []
            for v in current:
                if not midpoint_le(v, top) and not possibly_equal(v, top):
                    continue  # outside the range of T: no preimage
                left = v / self.slope
                right = 1 - v / self.slope
                nxt.append(left)
                if not possibly_equal(left, right):
                    nxt.append(right)
            current = nxt
        current.sort(key=value)
        return _dedup_sorted(current)

    def kneading(self, n: int) -> str:
        """Itinerary symbols of T(1/2), ..., T^n(1/2) over {L, C, R}."""
        if n < 1:
            raise DomainError("kneading length must be >= 1")
        syms = []
        u = self.half
        for _ in range(n):
            u = self.apply(u)
            if possibly_equal(u, self.half):
                syms.append("C")
            elif midpoint_le(u, self.half):
                syms.append("L")
            else:
                syms.append("R")
        return "".join(syms)

    # omega-limit machinery ----------------------------------------------------

    def omega_limit(self, x, burn: int = 64, depth: int = 256, tol: float = 1e-9) -> "OmegaSet":
        """Cluster the orbit segment {T^i(x) : burn <= i <= burn+depth}.

        ``certified_finite`` is set when exact periodicity is detected
        (exact mode) or the cluster count is stable under doubling depth.
        Low depth yields a coarse approximation, never an error.
        """
        if burn < 1 or depth < 1 or tol <= 0:
            raise DomainError("burn, depth >= 1 and tol > 0 required")
        seed = self.iterate(x, burn)
        certified = False
        if self.exact:
            pts, certified = self._omega_exact(seed, depth)
            if not certified:
                pts2, _ = self._omega_exact(seed, 2 * depth)
                c1 = _cluster(pts, tol, exact=True)
                c2 = _cluster(pts2, tol, exact=True)
                certified = len(c1) == len(c2)
                pts = c2 if certified else c1
            return OmegaSet(points=tuple(pts), depth=depth, tol=tol, certified_finite=certified)
        seg = self._segment(seed, depth)
        c1 = _cluster(seg, tol / (value(self.slope) + 2.0), exact=False)
        seg2 = self._segment(seed, 2 * depth)
        c2 = _cluster(seg2, tol / (value(self.slope) + 2.0), exact=False)
        certified = len(c1) == len(c2)
        pts = c2 if certified else c1
        return OmegaSet(points=tuple(pts), depth=depth, tol=tol, certified_finite=certified)

    def _segment(self, seed, depth: int) -> List[Real]:
        u = seed
        out = [u]
        for _ in range(depth):
            u = self.apply(u)
            out.append(u)
        return out

    def _omega_exact(self, seed: Fraction, depth: int):
        """Follow the exact orbit; on a repeat, return the cycle, certified."""
        seen = {}
        u = seed
        orbit = []
        for i in range(depth + 1):
            if u in seen:
                cycle = orbit[seen[u]:]
                return sorted(set(cycle)), True
            seen[u] = i
            orbit.append(u)
            u = self.apply(u)
        return sorted(set(orbit)), False

    def nonrecurrence(self, depth: int, tol: float = 1e-9) -> "NonrecurrenceResult":
        """Minimum distance of the critical orbit back to 1/2, up to depth.

        A True verdict certifies non-recurrence only to the inspected depth;
        the result carries the depth so callers cannot over-read it.
        """
        if depth < 1:
            raise DomainError("depth must be >= 1")
        u = self.half
        gap = None
        for _ in range(depth):
            u = self.apply(u)
            d = abs(value(u) - 0.5)
            if gap is None or d < gap:
                gap = d
        return NonrecurrenceResult(nonrecurrent=gap > tol, gap=gap, depth=depth, tol=tol)


@dataclass(frozen=True)
class NonrecurrenceResult:
    nonrecurrent: bool
    gap: float
    depth: int
    tol: float

    def __iter__(self):  # allows tuple-style unpacking (ok, gap)
        yield self.nonrecurrent
        yield self.gap


@dataclass(frozen=True)
class OmegaSet:
    """Finite (or sampled) approximation of an omega-limit set.

    Points are sorted representatives of orbit clusters.  Invariance and
    core containment are measured, not assumed: see the gap methods.
    """

    points: tuple
    depth: int
    tol: float
    certified_finite: bool

    def __len__(self):
        return len(self.points)

    def distance(self, x) -> float:
        """Distance from a scalar to the nearest represented point."""
        if not self.points:
            return math.inf
        v = value(x)
        return min(abs(v - value(p)) for p in self.points)

    def invariance_gap(self, tmap: TentMap) -> float:
        """max over points y of dist(T(y), points); 0 for exact cycles."""
        if not self.points:
            return 0.0
        return max(self.distance(tmap.apply(p)) for p in self.points)

    def core_gap(self, tmap: TentMap) -> float:
        """How far the points stray from the eventual core [T^2(1/2), T(1/2)]."""
        if not self.points:
            return 0.0
        lo = value(tmap.iterate(tmap.half, 2))
        hi = value(tmap.critical_value)
        worst = 0.0
        for p in self.points:
            v = value(p)
            worst = max(worst, lo - v, v - hi)
        return max(worst, 0.0)

    def contains(self, x, tol: Optional[float] = None) -> bool:
        return self.distance(x) <= (self.tol if tol is None else tol)


def _dedup_sorted(xs: List[Real]) -> List[Real]:
    out: List[Real] = []
    for x in xs:
        if out and possibly_equal(out[-1], x):
            continue
        out.append(x)
    return out


def _cluster(xs: List[Real], radius: float, exact: bool) -> List[Real]:
    """Greedy 1-d clustering of a value list; returns sorted representatives."""
    if not xs:
        return []
    ordered = sorted(xs, key=value)
    reps = [ordered[0]]
    for x in ordered[1:]:
        if exact and radius == 0.0:
            same = x == reps[-1]
        else:
            same = abs(value(x) - value(reps[-1])) <= radius
        if not same:
            reps.append(x)
    return reps


def tent_map(slope, err: float = 0.0) -> TentMap:
    """Build a TentMap from a number or string.

    Rational inputs (int, Fraction, "3/2") give exact mode; floats and
    decimal strings give float mode with a tracked error bound.
    """
    if isinstance(slope, str):
        s = parse_scalar(slope)
    elif isinstance(slope, (int, Fraction)):
        s = Fraction(slope)
    elif isinstance(slope, float):
        s = ErrFloat(slope, err + EPS * max(1.0, abs(slope)))
    elif isinstance(slope, ErrFloat):
        s = slope
    else:
        raise TypeError(f"cannot build a tent map from {type(slope).__name__}")
    return TentMap(slope=s)
