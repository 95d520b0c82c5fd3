"""Detection and enumeration of folding points.

A point folds exactly when every coordinate lies in the omega-limit set of
the critical point.  That condition quantifies over all coordinates, so
detection is certificate based: a certificate records the scanned depth and
the worst gap, and additionally notes when the tail rule pins all deeper
coordinates inside the omega set, making the answer exact.

Enumeration is the computable content when the omega set is certified
finite: folding points are precisely the backward paths through the
transition graph of the omega set, and eventually periodic paths promote to
exact inverse-limit points.  With a non-recurrent critical point the space
has no endpoints but possibly uncountably many folding points; when the
omega set is not certified finite, enumeration refuses rather than guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .errors import DomainError, FoldingEnumerationError
from .invlim import (
    FIXED_TAIL,
    LEFT_TAIL,
    ItineraryTail,
    LimitPoint,
    point_to_line,
    tail_symbol,
)
from .scalars import Real, midpoint_le, possibly_equal, value
from .tentmap import OmegaSet, TentMap


@dataclass(frozen=True)
class FoldingCertificate:
    """Finite-depth membership certificate for the folding set."""

    point: LimitPoint
    depth: int
    max_gap: float
    tol: float
    tail_covered: bool

    @property
    def member(self) -> bool:
        return self.max_gap <= self.tol

    @property
    def exact(self) -> bool:
        """Whether the certificate covers all coordinates, not just depth."""
        return self.tail_covered and self.member


def is_folding_point(
    x: LimitPoint, omega: OmegaSet, depth: int = 64, tol: float = 1e-9
) -> FoldingCertificate:
    """Scan coordinates 0..depth for distance to the omega set.

    When the tail rule is a fixed point inside omega, or a left tail at the
    endpoint with 0 in omega, or an itinerary whose cycle orbit lies in
    omega, the coordinates beyond the scan are certified by the rule itself
    and the certificate is marked tail_covered.
    """
    if depth < 1:
        raise DomainError("certificate depth must be >= 1")
    gap = 0.0
    for n in range(depth + 1):
        gap = max(gap, omega.distance(x.project(n)))
    return FoldingCertificate(
        point=x,
        depth=depth,
        max_gap=gap,
        tol=tol,
        tail_covered=_tail_covered(x, omega, depth, tol),
    )


def _tail_covered(x: LimitPoint, omega: OmegaSet, depth: int, tol: float) -> bool:
    tail = x.tail
    if tail.code() == "FIX":
        return omega.distance(x.tmap.fixed_point) <= tol
    pre, cycle = tail.stream()
    if set(pre + cycle) <= {"L"}:
        # left tails fall to 0 geometrically; covered only from the endpoint
        return value(x.anchor) == 0.0 and omega.distance(x.tmap.zero) <= tol
    if depth < x.level + len(pre) + 2 * len(cycle):
        return False
    # the scanned window already reached the periodic regime; check that one
    # full cycle of deep coordinates sits in omega and repeats within tol
    m = len(cycle)
    start = x.level + len(pre) + len(cycle)
    for i in range(m):
        a = x.project(start + i)
        if omega.distance(a) > tol:
            return False
        if abs(value(a) - value(x.project(start + i + m))) > tol:
            return False
    return True


@dataclass(frozen=True)
class BackwardItinerary:
    """A backward path through the omega transition graph."""

    values: Tuple[Real, ...]
    symbols: str
    promoted: Optional[LimitPoint]


def enumerate_folding(
    tmap: TentMap, omega: OmegaSet, length: int = 64, path_cap: int = 65536
) -> List[BackwardItinerary]:
    """All backward paths of the given length inside a finite omega set.

    Refuses when the omega set is not certified finite: the folding set may
    then be uncountable and is out of reach for path enumeration.  Detection
    via is_folding_point still works pointwise in that case.
    """
    if not omega.certified_finite:
        raise FoldingEnumerationError(
            "omega set is not certified finite; refusing to enumerate"
        )
    if not omega.points:
        return []
    match_tol = max(omega.tol, 1e-12)
    preds: List[List[int]] = [[] for _ in omega.points]
    for i, y in enumerate(omega.points):
        img = tmap.apply(y)
        for j, z in enumerate(omega.points):
            if abs(value(img) - value(z)) <= match_tol:
                preds[j].append(i)

    paths: List[List[int]] = [[i] for i in range(len(omega.points))]
    for _ in range(length):
        nxt: List[List[int]] = []
        for path in paths:
            for q in preds[path[-1]]:
                nxt.append(path + [q])
                if len(nxt) > path_cap:
                    raise FoldingEnumerationError(
                        f"more than {path_cap} backward paths; raise the cap "
                        "or lower the length"
                    )
        paths = nxt
        if not paths:
            return []

    out: List[BackwardItinerary] = []
    seen: List[LimitPoint] = []
    for path in paths:
        vals = tuple(omega.points[i] for i in path)
        syms = "".join(
            "L" if midpoint_le(v, tmap.half) else "R" for v in vals[1:]
        )
        promoted = _promote(tmap, path, vals, syms)
        if promoted is not None:
            if any(promoted.same_point(q, tol=match_tol) for q in seen):
                continue
            seen.append(promoted)
        out.append(BackwardItinerary(values=vals, symbols=syms, promoted=promoted))
    return out


def _promote(
    tmap: TentMap, path: Sequence[int], vals: Tuple[Real, ...], syms: str
) -> Optional[LimitPoint]:
    """Promote an eventually periodic backward path to an exact point."""
    n = len(path)
    for start in range(n):
        for period in range(1, (n - start) // 2 + 1):
            if all(
                path[i] == path[i + period] for i in range(start, n - period)
            ):
                anchor = vals[start]
                cycle = syms[start : start + period]
                try:
                    if set(cycle) == {"L"} and possibly_equal(anchor, tmap.zero, 1e-12):
                        return LimitPoint(tmap, start, tmap.zero, LEFT_TAIL)
                    if cycle == "R" and possibly_equal(
                        anchor, tmap.fixed_point, 1e-9
                    ):
                        return LimitPoint(tmap, start, tmap.fixed_point, FIXED_TAIL)
                    return LimitPoint(tmap, start, anchor, ItineraryTail("", cycle))
                except DomainError:
                    return None
    return None


def folding_rows(certs: Sequence[FoldingCertificate]) -> List[List[str]]:
    """CSV rows: point_repr, depth, max_gap, member."""
    rows = [["point_repr", "depth", "max_gap", "member"]]
    for c in certs:
        rows.append(
            [
                point_to_line(c.point),
                str(c.depth),
                repr(c.max_gap),
                str(int(c.member)),
            ]
        )
    return rows
