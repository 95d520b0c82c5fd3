"""Points and arcs of the tent-map inverse limit space.

A point of the inverse limit is a backward orbit (x_0, x_1, ...) with
T(x_{n+1}) = x_n.  We store it as an anchor level N, the anchor value
u = pi_N, and a tail rule that prescribes every deeper coordinate as an
eventually periodic word of branch preimages.  Head coordinates are
recovered by forward iteration, so re-anchoring deeper is exact and the
shift and its inverse are pure re-anchorings.

Tail rules double as composant certificates: two points admit a common
arc representation exactly when their tail symbol streams agree after
alignment, and the composant of the endpoint (0, 0, ...) is the set of
points whose stream is eventually all left branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .errors import (
    DomainError,
    NoInjectiveLevelError,
    NotSameComposantError,
)
from .scalars import (
    ErrFloat,
    Real,
    err_bound,
    format_scalar,
    is_exact,
    midpoint_le,
    midpoint_lt,
    possibly_equal,
    value,
)
from .tentmap import TentMap

#: how many tail steps construction validates explicitly
_VALIDATE_DEPTH = 48


# ---------------------------------------------------------------------------
# tail rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeftTail:
    """All deeper coordinates take the left branch: pi_{N+j} = u / s^j."""

    def stream(self) -> Tuple[str, str]:
        return ("", "L")

    def advance(self, j: int) -> "LeftTail":
        return self

    def code(self) -> str:
        return "L"


@dataclass(frozen=True)
class FixedTail:
    """All deeper coordinates sit at the fixed point s/(s+1)."""

    def stream(self) -> Tuple[str, str]:
        # the constant backward orbit of the fixed point takes the right branch
        return ("", "R")

    def advance(self, j: int) -> "FixedTail":
        return self

    def code(self) -> str:
        return "FIX"


@dataclass(frozen=True)
class ItineraryTail:
    """Eventually periodic branch word; symbol j gives coordinate N+j+1."""

    pre: str = ""
    cycle: str = "L"

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("itinerary cycle must be nonempty")
        for c in self.pre + self.cycle:
            if c not in "LR":
                raise DomainError(f"bad branch symbol {c!r}")

    def stream(self) -> Tuple[str, str]:
        return (self.pre, self.cycle)

    def advance(self, j: int) -> "ItineraryTail":
        if j <= 0:
            return self
        if j < len(self.pre):
            return ItineraryTail(self.pre[j:], self.cycle)
        k = (j - len(self.pre)) % len(self.cycle)
        return ItineraryTail("", self.cycle[k:] + self.cycle[:k])

    def code(self) -> str:
        return f"IT:{self.pre}({self.cycle})"


TailRule = Union[LeftTail, FixedTail, ItineraryTail]

LEFT_TAIL = LeftTail()
FIXED_TAIL = FixedTail()


def tail_symbol(tail: TailRule, j: int) -> str:
    pre, cycle = tail.stream()
    if j < len(pre):
        return pre[j]
    return cycle[(j - len(pre)) % len(cycle)]


def streams_equal(a: TailRule, b: TailRule) -> bool:
    """Equality of the two eventually periodic symbol streams."""
    pa, ca = a.stream()
    pb, cb = b.stream()
    horizon = max(len(pa), len(pb)) + math.lcm(len(ca), len(cb))
    return all(tail_symbol(a, j) == tail_symbol(b, j) for j in range(horizon))


def is_left_stream(tail: TailRule) -> bool:
    pre, cycle = tail.stream()
    return set(pre + cycle) <= {"L"}


def parse_tail(code: str) -> TailRule:
    if code == "L":
        return LEFT_TAIL
    if code == "FIX":
        return FIXED_TAIL
    if code.startswith("IT:"):
        body = code[3:]
        if "(" in body:
            pre, rest = body.split("(", 1)
            if not rest.endswith(")"):
                raise DomainError(f"bad tail code {code!r}")
            return ItineraryTail(pre, rest[:-1])
        return ItineraryTail("", body)
    raise DomainError(f"bad tail code {code!r}")


def _r_step_floor(tmap: TentMap) -> Real:
    # right-branch preimage 1 - v/s stays within [0, s/2] iff v >= s(2-s)/2
    return tmap.slope * (2 - tmap.slope) / 2


def _walk_one(tmap: TentMap, v: Real, symbol: str, strict: bool = True) -> Real:
    if symbol == "R" and strict:
        floor = _r_step_floor(tmap)
        if midpoint_lt(v, floor) and not possibly_equal(v, floor):
            raise DomainError(
                f"right-branch preimage of {value(v)} leaves [0, T(1/2)]"
            )
    return tmap.branch_preimage(v, symbol)


def _validate_tail(tmap: TentMap, anchor: Real, tail: TailRule) -> None:
    if isinstance(tail, LeftTail):
        return
    if isinstance(tail, FixedTail):
        if not possibly_equal(anchor, tmap.fixed_point, tol=1e-12):
            raise DomainError("FixedTail requires the anchor to be s/(s+1)")
        return
    v = anchor
    for j in range(_VALIDATE_DEPTH):
        v = _walk_one(tmap, v, tail_symbol(tail, j))


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LimitPoint:
    """A point of the inverse limit: anchor level, anchor value, tail rule."""

    tmap: TentMap
    level: int
    anchor: Real
    tail: TailRule

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("anchor level must be >= 0")
        top = self.tmap.critical_value
        v = value(self.anchor)
        slack = 1e-12 + err_bound(self.anchor)
        if v < -slack or v > value(top) + slack:
            raise DomainError(f"anchor {v} outside [0, T(1/2)]")
        _validate_tail(self.tmap, self.anchor, self.tail)

    # coordinates ----------------------------------------------------------

    def project(self, n: int) -> Real:
        """The n-th coordinate pi_n."""
        if n < 0:
            raise DomainError("coordinate index must be >= 0")
        if n <= self.level:
            return self.tmap.iterate(self.anchor, self.level - n)
        v = self.anchor
        for j in range(n - self.level):
            v = _walk_one(self.tmap, v, tail_symbol(self.tail, j), strict=False)
        return v

    def coords(self, n: int) -> List[Real]:
        return [self.project(i) for i in range(n + 1)]

    def at_level(self, m: int) -> "LimitPoint":
        """Re-anchor deeper; exact, never loses branch information."""
        if m < self.level:
            raise DomainError("re-anchoring only pushes anchors deeper")
        if m == self.level:
            return self
        return LimitPoint(self.tmap, m, self.project(m), self.tail.advance(m - self.level))

    # shift dynamics ---------------------------------------------------------

    def shift(self) -> "LimitPoint":
        """Prepend T(x_0): coordinates move one index deeper."""
        return LimitPoint(self.tmap, self.level + 1, self.anchor, self.tail)

    def shift_inv(self) -> "LimitPoint":
        """Drop x_0, the exact inverse of shift."""
        if self.level > 0:
            return LimitPoint(self.tmap, self.level - 1, self.anchor, self.tail)
        deeper = self.at_level(1)
        return LimitPoint(self.tmap, 0, deeper.anchor, deeper.tail)

    def shift_power(self, j: int) -> "LimitPoint":
        """shift^j for signed j (negative j drops |j| coordinates)."""
        if j >= 0:
            return LimitPoint(self.tmap, self.level + j, self.anchor, self.tail)
        k = -j
        if k <= self.level:
            return LimitPoint(self.tmap, self.level - k, self.anchor, self.tail)
        deeper = self.at_level(k)
        return LimitPoint(self.tmap, 0, deeper.anchor, deeper.tail)

    # comparisons ------------------------------------------------------------

    def same_point(self, other: "LimitPoint", tol: float = 0.0) -> bool:
        if value(self.tmap.slope) != value(other.tmap.slope):
            return False
        m = max(self.level, other.level)
        a = self.at_level(m)
        b = other.at_level(m)
        return possibly_equal(a.anchor, b.anchor, tol) and streams_equal(a.tail, b.tail)

    def __eq__(self, other):
        if not isinstance(other, LimitPoint):
            return NotImplemented
        return self.same_point(other)

    def __repr__(self):
        return f"LimitPoint(N={self.level}, u={format_scalar(self.anchor)}, tail={self.tail.code()})"


def c0_point(tmap: TentMap, n: int, x) -> LimitPoint:
    """The point (N=n, u=x, LeftTail) on the composant of (0, 0, ...)."""
    u = tmap.scalar(x)
    return LimitPoint(tmap, n, u, LEFT_TAIL)


def c0_coordinate(x: LimitPoint) -> Real:
    """Arc-length coordinate along the endpoint composant: s^N * u.

    Defined for points whose tail stream is all left branches; the value is
    independent of the representation level and orders the composant.
    """
    if not is_left_stream(x.tail):
        raise NotSameComposantError("point is not on the endpoint composant")
    return x.anchor * x.tmap.slope ** x.level


def c0_point_at(tmap: TentMap, ell) -> LimitPoint:
    """Inverse of c0_coordinate at the shallowest admissible anchor level."""
    ell = tmap.scalar(ell)
    if midpoint_lt(ell, tmap.zero) and not possibly_equal(ell, tmap.zero):
        raise DomainError("composant coordinate must be >= 0")
    level = 0
    u = ell
    top = tmap.critical_value
    while midpoint_lt(top, u):
        u = u / tmap.slope
        level += 1
    return LimitPoint(tmap, level, u, LEFT_TAIL)


def align(x: LimitPoint, y: LimitPoint) -> Tuple[LimitPoint, LimitPoint]:
    """Re-anchor both points to a common level, raising when the tails differ."""
    m = max(x.level, y.level)
    a = x.at_level(m)
    b = y.at_level(m)
    if not streams_equal(a.tail, b.tail):
        raise NotSameComposantError(
            "no common arc representation: tail streams differ"
        )
    return a, b


def dbar(x: LimitPoint, y: LimitPoint, level: Optional[int] = None) -> Real:
    """Composant-metric distance s^n |pi_n(x) - pi_n(y)|.

    Uses the shared representation level, where the connecting arc projects
    injectively by construction; any deeper level gives the same value and
    can be requested explicitly for cross-checks.
    """
    a, b = align(x, y)
    m = a.level
    if level is not None:
        if level < m:
            raise DomainError(f"level {level} below the common anchor level {m}")
        a = a.at_level(level)
        b = b.at_level(level)
        m = level
    return x.tmap.slope ** m * abs(a.anchor - b.anchor)


def ambient_metric(x: LimitPoint, y: LimitPoint, depth: int = 24) -> Real:
    """Truncated ambient distance: sum of 2^{-i} |pi_i(x) - pi_i(y)|.

    The truncation error is at most ambient_tail_bound(map, depth); the bound
    is reported separately so that the distance of a point to itself is 0.
    """
    total = x.tmap.zero
    w = Fraction(1) if x.tmap.exact else ErrFloat(1.0)
    for i in range(depth + 1):
        total = total + w * abs(x.project(i) - y.project(i))
        w = w / 2
    return total


def ambient_tail_bound(tmap: TentMap, depth: int = 24) -> float:
    return 2.0 ** (-depth) * value(tmap.critical_value)


# ---------------------------------------------------------------------------
# arcs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Arc:
    """A sub-arc on which pi_level is injective, by representation."""

    tmap: TentMap
    level: int
    lo: Real
    hi: Real
    tail: TailRule

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("arc level must be >= 0")
        if midpoint_lt(self.hi, self.lo):
            raise DomainError("arc interval is reversed")
        for u in (self.lo, self.hi):
            v = value(u)
            if v < -1e-12 or v > value(self.tmap.critical_value) + 1e-12 + err_bound(u):
                raise DomainError("arc interval leaves [0, T(1/2)]")
        _validate_tail(self.tmap, self.lo, self.tail)
        _validate_tail(self.tmap, self.hi, self.tail)

    @property
    def length(self) -> Real:
        """Arc length in the composant metric: s^N (b - a)."""
        return self.tmap.slope ** self.level * (self.hi - self.lo)

    def endpoints(self) -> Tuple[LimitPoint, LimitPoint]:
        return (
            LimitPoint(self.tmap, self.level, self.lo, self.tail),
            LimitPoint(self.tmap, self.level, self.hi, self.tail),
        )

    def point_at(self, u) -> LimitPoint:
        u = self.tmap.scalar(u)
        if midpoint_lt(u, self.lo) or midpoint_lt(self.hi, u):
            if not (possibly_equal(u, self.lo) or possibly_equal(u, self.hi)):
                raise DomainError("anchor outside the arc interval")
        return LimitPoint(self.tmap, self.level, u, self.tail)

    def sample(self, n: int) -> List[LimitPoint]:
        """n+1 points with equally spaced anchors, endpoints included."""
        if n < 1:
            return [self.endpoints()[0]]
        step = (self.hi - self.lo) / n
        return [
            LimitPoint(self.tmap, self.level, self.lo + step * i, self.tail)
            for i in range(n + 1)
        ]

    def contains_anchor(self, u) -> bool:
        return midpoint_le(self.lo, u) and midpoint_le(u, self.hi)

    def is_degenerate(self) -> bool:
        return possibly_equal(self.lo, self.hi)

    def __repr__(self):
        return (
            f"Arc(N={self.level}, [{format_scalar(self.lo)}, "
            f"{format_scalar(self.hi)}], tail={self.tail.code()})"
        )


def arc_between(x: LimitPoint, y: LimitPoint) -> Arc:
    """The arc with endpoints x and y (degenerate when x == y)."""
    a, b = align(x, y)
    lo, hi = (a.anchor, b.anchor) if midpoint_le(a.anchor, b.anchor) else (b.anchor, a.anchor)
    return Arc(x.tmap, a.level, lo, hi, a.tail)


def injective_level(x: LimitPoint, y: LimitPoint, search_bound: int = 256) -> int:
    """Smallest common anchor level for the arc from x to y.

    The representation guarantees injectivity of the projection at that
    level.  Raises when no common representation exists within the bound.
    """
    m = max(x.level, y.level)
    if m > search_bound:
        raise NoInjectiveLevelError(f"anchor levels exceed search bound {search_bound}")
    try:
        align(x, y)
    except NotSameComposantError as exc:
        raise NoInjectiveLevelError(str(exc)) from exc
    return m


# ---------------------------------------------------------------------------
# p-points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PPoint:
    """A p-point together with the deepest coordinate index that hits 1/2."""

    point: LimitPoint
    fold_level: int


@dataclass(frozen=True)
class PPointScan:
    interior: Tuple[PPoint, ...]
    tail: Tuple[PPoint, ...]

    def all_points(self) -> List[PPoint]:
        return list(self.interior) + list(self.tail)


def p_points_on_arc(arc: Arc, p: int, tail_scan: Optional[int] = None) -> PPointScan:
    """Enumerate E_p on the arc: anchors u with T^{N-n}(u) = 1/2, p < n <= N.

    Interior hits are tagged with the deepest such n and sorted by anchor.
    Folds occurring inside the tail rule (coordinate indices beyond the
    anchor level) are reported on a separate channel; for a LeftTail they
    can only occur at the interval endpoint u = s/2.
    """
    if arc.level <= p:
        raise DomainError("arc anchor level must exceed p")
    tmap = arc.tmap
    half = tmap.half
    found: List[Tuple[Real, int]] = []
    for n in range(arc.level, p, -1):
        depth = arc.level - n
        for u in tmap.preimages(half, depth):
            if not arc.contains_anchor(u):
                continue
            if any(possibly_equal(u, w) for w, _ in found):
                continue  # already tagged at a deeper n
            found.append((u, n))
    found.sort(key=lambda t: value(t[0]))
    interior = tuple(
        PPoint(LimitPoint(tmap, arc.level, u, arc.tail), n) for u, n in found
    )

    # tail channel: walk the whole anchor interval through the tail rule and
    # solve the affine step chain whenever the image straddles 1/2
    pre, cycle = arc.tail.stream()
    if tail_scan is None:
        tail_scan = len(pre) + 4 * len(cycle) + 4
    tail_hits: List[PPoint] = []
    lo, hi = arc.lo, arc.hi
    coef, off = (Fraction(1) if tmap.exact else ErrFloat(1.0)), tmap.zero
    for j in range(tail_scan):
        sym = tail_symbol(arc.tail, j)
        if sym == "L":
            lo, hi = lo / tmap.slope, hi / tmap.slope
            coef, off = coef / tmap.slope, off / tmap.slope
        else:
            lo, hi = 1 - hi / tmap.slope, 1 - lo / tmap.slope
            coef, off = -coef / tmap.slope, 1 - off / tmap.slope
        if midpoint_le(lo, half) and midpoint_le(half, hi):
            u_star = (half - off) / coef
            if arc.contains_anchor(u_star):
                tail_hits.append(
                    PPoint(
                        LimitPoint(tmap, arc.level, u_star, arc.tail),
                        arc.level + j + 1,
                    )
                )
    return PPointScan(interior=interior, tail=tuple(tail_hits))


def is_p_point(x: LimitPoint, p: int, tail_scan: Optional[int] = None) -> bool:
    """Whether some coordinate of index > p equals the critical point."""
    tmap = x.tmap
    half = tmap.half
    for n in range(p + 1, x.level + 1):
        if possibly_equal(x.project(n), half):
            return True
    pre, cycle = x.tail.stream()
    if tail_scan is None:
        tail_scan = len(pre) + 4 * len(cycle) + 4
    start = max(x.level + 1, p + 1)
    for n in range(start, x.level + tail_scan + 1):
        if possibly_equal(x.project(n), half):
            return True
    return False


@dataclass(frozen=True)
class GapCheck:
    left: PPoint
    right: PPoint
    gap: Real
    bound: Real
    ok: bool
    projection_injective: bool


def adjacent_gap_check(arc: Arc, p: int, tol: float = 1e-9) -> List[GapCheck]:
    """Check d-bar gaps of adjacent p-points against the s^p bound.

    Also re-verifies that the projection to level p is injective between the
    pair, by comparing the metric computed at the anchor level with the one
    computed from the level-p coordinates (a fold in between would strictly
    shrink the latter).
    """
    tmap = arc.tmap
    scan = p_points_on_arc(arc, p)
    bound = tmap.slope ** p
    out: List[GapCheck] = []
    for a, b in zip(scan.interior, scan.interior[1:]):
        gap = dbar(a.point, b.point)
        via_p = tmap.slope ** p * abs(a.point.project(p) - b.point.project(p))
        injective = possibly_equal(gap, via_p, tol)
        ok = midpoint_le(gap, bound) or possibly_equal(gap, bound, tol)
        out.append(GapCheck(a, b, gap, bound, ok, injective))
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def point_to_line(x: LimitPoint) -> str:
    return f"point N={x.level} u={format_scalar(x.anchor)} tail={x.tail.code()}"


def arc_to_line(a: Arc) -> str:
    return (
        f"arc N={a.level} a={format_scalar(a.lo)} b={format_scalar(a.hi)} "
        f"tail={a.tail.code()}"
    )


def _parse_fields(line: str, kind: str, keys: Tuple[str, ...]) -> dict:
    parts = line.split()
    if not parts or parts[0] != kind:
        raise DomainError(f"expected a {kind!r} line, got {line!r}")
    fields = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise DomainError(f"bad token {tok!r} in {line!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    missing = [k for k in keys if k not in fields]
    if missing:
        raise DomainError(f"line {line!r} missing fields {missing}")
    return fields


def _parse_anchor(tmap: TentMap, text: str) -> Real:
    if tmap.exact:
        return Fraction(text)
    return ErrFloat(float(text), 0.0)


def point_from_line(tmap: TentMap, line: str) -> LimitPoint:
    f = _parse_fields(line, "point", ("N", "u", "tail"))
    return LimitPoint(tmap, int(f["N"]), _parse_anchor(tmap, f["u"]), parse_tail(f["tail"]))


def arc_from_line(tmap: TentMap, line: str) -> Arc:
    f = _parse_fields(line, "arc", ("N", "a", "b", "tail"))
    return Arc(
        tmap,
        int(f["N"]),
        _parse_anchor(tmap, f["a"]),
        _parse_anchor(tmap, f["b"]),
        parse_tail(f["tail"]),
    )
