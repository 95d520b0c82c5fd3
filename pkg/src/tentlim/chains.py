"""Chain covers of the inverse limit built from critical-point preimages.

A chain C_{k,r} is induced by the partition of [0, T(1/2)] given by all
preimages T^{-j}(1/2) for j up to k+r+1.  Link j projects through pi_k to
an interval: the first link is [0, x_2), the last (x_{t-1}, T(1/2)], and
every interior link is (x_{j-1}, x_{j+1}), so consecutive links overlap in
one partition cell and non-consecutive links are disjoint.

All containment logic is interval arithmetic on forward images.  Because
the partition resolves every fold of T^d for d up to the preimage depth,
the image of a link under T^d is determined by its three defining
partition points, which is what makes refinement certification cheap.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import (
    ChainBuildError,
    DomainError,
    PreconditionError,
    ResourceLimitError,
)
from .invlim import Arc, LimitPoint, PPointScan, p_points_on_arc
from .scalars import (
    Real,
    err_bound,
    format_scalar,
    midpoint_le,
    midpoint_lt,
    possibly_equal,
    value,
)
from .tentmap import TentMap

#: default cap on 2^(k+r+2), the worst-case partition size
DEFAULT_PARTITION_CAP = 1 << 22


@dataclass(frozen=True)
class Link:
    """One link interval with explicit endpoint closedness."""

    lo: Real
    hi: Real
    lo_closed: bool
    hi_closed: bool

    def contains(self, v) -> bool:
        if midpoint_lt(self.lo, v) and midpoint_lt(v, self.hi):
            return True
        if self.lo_closed and possibly_equal(v, self.lo):
            return True
        if self.hi_closed and possibly_equal(v, self.hi):
            return True
        return False

    def intersects(self, other: "Link") -> bool:
        if midpoint_lt(self.hi, other.lo) or midpoint_lt(other.hi, self.lo):
            return False
        if possibly_equal(self.hi, other.lo):
            return self.hi_closed and other.lo_closed
        if possibly_equal(other.hi, self.lo):
            return other.hi_closed and self.lo_closed
        return True


@dataclass(frozen=True, eq=False)
class Chain:
    """Immutable chain cover; links are materialized lazily by index."""

    tmap: TentMap
    k: int
    r: int
    partition: Tuple[Real, ...]
    _pfloat: Tuple[float, ...] = field(repr=False, compare=False, default=())
    _orbit_cache: Dict[int, List[np.ndarray]] = field(
        repr=False, compare=False, default_factory=dict
    )

    @property
    def t(self) -> int:
        """Number of partition points = number of links."""
        return len(self.partition)

    @property
    def depth(self) -> int:
        """Preimage depth k + r + 1 that induced the partition."""
        return self.k + self.r + 1

    @property
    def top(self) -> Real:
        return self.tmap.critical_value

    def link(self, j: int) -> Link:
        """Link by 1-based index, matching the cover pattern."""
        t = self.t
        if not 1 <= j <= t:
            raise DomainError(f"link index {j} outside 1..{t}")
        if j == 1:
            return Link(self.tmap.zero, self.partition[1], True, False)
        if j == t:
            return Link(self.partition[t - 2], self.top, False, True)
        return Link(self.partition[j - 2], self.partition[j], False, False)

    def iter_links(self) -> Iterator[Tuple[int, Link]]:
        for j in range(1, self.t + 1):
            yield j, self.link(j)

    def link_span(self, j: int) -> Tuple[Real, Real, Real]:
        """The three consecutive partition-grid points defining link j.

        The grid is the partition extended by the interval endpoints 0 and
        T(1/2); every fold of T^d (d <= depth) inside the link sits at the
        middle point, so images under T^d are spanned by these three values.
        """
        zero = self.tmap.zero
        t = self.t
        lo = zero if j == 1 else self.partition[j - 2]
        mid = self.partition[j - 1]
        hi = self.top if j == t else self.partition[j]
        return lo, mid, hi

    def link_of(self, x) -> List[int]:
        """1-based indices of the links containing pi_k(x); one or two."""
        v = x.project(self.k) if isinstance(x, LimitPoint) else self.tmap.scalar(x)
        pos = bisect.bisect_left(self._pfloat, value(v) - 1e-12)
        out = []
        for j in range(max(1, pos - 1), min(self.t, pos + 3) + 1):
            if self.link(j).contains(v):
                out.append(j)
        return out

    def orbit_arrays(self, depth: int) -> List[np.ndarray]:
        """Float forward orbits of the extended grid, cached up to depth."""
        have = self._orbit_cache.get(-1)
        if have is None:
            grid = np.array(
                [0.0] + [value(p) for p in self.partition] + [value(self.top)],
                dtype=float,
            )
            self._orbit_cache[-1] = [grid]
            have = self._orbit_cache[-1]
        s = value(self.tmap.slope)
        while len(have) <= depth:
            prev = have[-1]
            have.append(s * np.minimum(prev, 1.0 - prev))
        return have[: depth + 1]

    def exact_orbit(self, depth: int) -> List[List[Real]]:
        """Exact forward orbits of the extended grid up to depth."""
        cache = self._orbit_cache.setdefault(-2, [])
        if not cache:
            cache.append([self.tmap.zero] + list(self.partition) + [self.top])
        while len(cache) <= depth:
            cache.append([self.tmap.apply(v) for v in cache[-1]])
        return cache[: depth + 1]

    def __repr__(self):
        return f"Chain(s={format_scalar(self.tmap.slope)}, k={self.k}, r={self.r}, t={self.t})"


def build_chain(
    tmap: TentMap,
    k: int,
    r: int,
    partition_cap: int = DEFAULT_PARTITION_CAP,
) -> Chain:
    """Construct C_{k,r} from the preimage partition of [0, T(1/2)].

    The theory behind the cover asks for r at least some slope-dependent
    threshold; r is left free here and the p-point properties are checked
    rather than assumed, so any k, r >= 0 builds.
    """
    if k < 0 or r < 0:
        raise DomainError("k and r must be >= 0")
    if 2 ** (k + r + 2) > partition_cap:
        raise ResourceLimitError(
            f"partition would exceed cap ({2 ** (k + r + 2)} > {partition_cap})"
        )
    top = tmap.critical_value
    level = [tmap.half]
    pts: List[Real] = []
    pts.extend(p for p in level if midpoint_le(p, top) or possibly_equal(p, top))
    for _ in range(k + r + 1):
        nxt: List[Real] = []
        for y in level:
            if midpoint_lt(top, y) and not possibly_equal(y, top):
                continue  # above T(1/2): no preimage under the restricted map
            left = y / tmap.slope
            right = 1 - y / tmap.slope
            nxt.append(left)
            if not possibly_equal(left, right):
                nxt.append(right)
        level = nxt
        pts.extend(p for p in level if midpoint_le(p, top) or possibly_equal(p, top))
    pts.sort(key=lambda f: (value(f), f) if isinstance(f, Fraction) else (value(f),))
    dedup_tol = _partition_dedup_tol(tmap, k + r + 1)
    merged: List[Real] = []
    for p in pts:
        if merged and possibly_equal(merged[-1], p, dedup_tol):
            continue
        merged.append(p)
    if len(merged) < 3:
        raise ChainBuildError(f"partition has only {len(merged)} points")
    for a, b in zip(merged, merged[1:]):
        if possibly_equal(a, b, dedup_tol):
            raise ChainBuildError("degenerate overlap: equal partition points")
    chain = Chain(
        tmap=tmap,
        k=k,
        r=r,
        partition=tuple(merged),
        _pfloat=tuple(value(p) for p in merged),
    )
    _certify_chain_condition(chain)
    return chain


def _partition_dedup_tol(tmap: TentMap, depth: int) -> float:
    if tmap.exact:
        return 0.0
    # backward branch inversion contracts, so the accumulated preimage error
    # is bounded by the slope error plus per-step padding
    return (err_bound(tmap.slope) + 2.0 ** -48) * (depth + 2)


def _certify_chain_condition(chain: Chain) -> None:
    """Links intersect iff adjacent; certified on a sliding window."""
    prev: Optional[Link] = None
    prev2: Optional[Link] = None
    for j, link in chain.iter_links():
        if midpoint_le(link.hi, link.lo):
            raise ChainBuildError(f"link {j} is empty")
        if prev is not None and not prev.intersects(link):
            raise ChainBuildError(f"links {j - 1} and {j} do not overlap")
        if prev2 is not None and prev2.intersects(link):
            raise ChainBuildError(f"links {j - 2} and {j} overlap")
        prev2, prev = prev, link


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

def mesh(chain: Chain, tail_depth: int = 8) -> float:
    """Certified upper bound on the largest link diameter in the ambient metric.

    Coordinates up to k are bounded by forward interval images of the link;
    coordinates beyond k by backward hull images, then a geometric tail.
    Computed in floating point and inflated by the tracked error, so the
    result is an upper bound in exact mode as well.
    """
    tmap = chain.tmap
    k = chain.k
    s = value(tmap.slope)
    top = value(tmap.critical_value)
    orbits = chain.orbit_arrays(k)
    t = chain.t
    core = np.zeros(t)
    for i, arr in enumerate(orbits):
        w = np.maximum(np.maximum(arr[:-2], arr[1:-1]), arr[2:]) - np.minimum(
            np.minimum(arr[:-2], arr[1:-1]), arr[2:]
        )
        core += 2.0 ** (i - k) * w
    # hulls of deeper coordinates: lo/s each step, upper end min(1 - lo/s, s/2)
    lo = orbits[0][:-2].copy()
    deep = np.zeros(t)
    for i in range(1, tail_depth + 1):
        hi = np.minimum(1.0 - lo / s, top)
        lo = lo / s
        width = np.maximum(hi - lo, 0.0)
        deep += 2.0 ** (-(k + i)) * np.minimum(width, top)
    tail = 2.0 ** (-(k + tail_depth)) * top
    per_link = core + deep + tail
    bound = float(per_link.max())
    slack = _mesh_slack(chain)
    return bound * (1.0 + 1e-9) + slack


def _mesh_slack(chain: Chain) -> float:
    k = chain.k
    s = value(chain.tmap.slope)
    base = err_bound(chain.tmap.slope) + 2.0 ** -50
    # forward error through k steps, summed with the metric weights
    per_coord = sum(2.0 ** (i - k) * 2.0 * (s ** i) * (base * (i + 2)) for i in range(k + 1))
    return per_coord + 1e-12


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImageHull:
    lo: Real
    hi: Real
    lo_attained: bool
    hi_attained: bool


@dataclass(frozen=True)
class RefinesResult:
    ok: bool
    witness: Optional[Tuple[int, ...]]  # witness[j-1] = coarse link containing fine link j
    counterexample: Optional[int]
    detail: str = ""

    def __iter__(self):
        yield self.ok
        yield self.witness


def _link_image(chain: Chain, j: int, d: int) -> ImageHull:
    """Image hull of link j under T^d, with endpoint attainment flags."""
    orbit = chain.exact_orbit(d)[d]
    vl, vm, vr = orbit[j - 1], orbit[j], orbit[j + 1]
    lo, hi = vl, vl
    for v in (vm, vr):
        if midpoint_lt(v, lo):
            lo = v
        if midpoint_lt(hi, v):
            hi = v
    left_in = j == 1          # first link is closed at 0
    right_in = j == chain.t   # last link is closed at T(1/2)
    lo_att = possibly_equal(vm, lo) or (left_in and possibly_equal(vl, lo)) or (
        right_in and possibly_equal(vr, lo)
    )
    hi_att = possibly_equal(vm, hi) or (left_in and possibly_equal(vl, hi)) or (
        right_in and possibly_equal(vr, hi)
    )
    return ImageHull(lo, hi, lo_att, hi_att)


def _hull_inside(hull: ImageHull, link: Link) -> bool:
    if midpoint_lt(hull.lo, link.lo) and not possibly_equal(hull.lo, link.lo):
        return False
    if possibly_equal(hull.lo, link.lo) and hull.lo_attained and not link.lo_closed:
        return False
    if midpoint_lt(link.hi, hull.hi) and not possibly_equal(hull.hi, link.hi):
        return False
    if possibly_equal(hull.hi, link.hi) and hull.hi_attained and not link.hi_closed:
        return False
    return True


def _candidate_links(coarse: Chain, v: float) -> List[int]:
    pos = bisect.bisect_left(coarse._pfloat, v - 1e-12)
    lo = max(1, pos - 1)
    hi = min(coarse.t, pos + 3)
    return list(range(lo, hi + 1))


def refines(fine: Chain, coarse: Chain) -> RefinesResult:
    """Certify that every fine link lies inside some coarse link.

    For fine depth q >= coarse depth p the fine link's pull-back lies in a
    coarse pull-back exactly when T^{q-p}(I) fits inside J, which interval
    images decide.  For q < p the reachable backward branches are checked
    instead; genuine chains always fail there and the failing link is
    reported as the counterexample.
    """
    d = fine.k - coarse.k
    if d < 0:
        return _refines_backward(fine, coarse)
    witness: List[int] = []
    for j in range(1, fine.t + 1):
        hull = _link_image(fine, j, d)
        target = None
        for c in _candidate_links(coarse, value(hull.lo)):
            if _hull_inside(hull, coarse.link(c)):
                target = c
                break
        if target is None:
            return RefinesResult(
                False, None, j, detail=f"fine link {j} fits in no coarse link"
            )
        witness.append(target)
    return RefinesResult(True, tuple(witness), None)


def _refines_backward(fine: Chain, coarse: Chain) -> RefinesResult:
    d = coarse.k - fine.k
    if d > 12:
        raise ResourceLimitError(f"backward certification over {d} levels too wide")
    tmap = fine.tmap
    top = tmap.critical_value
    witness: List[int] = []
    for j in range(1, fine.t + 1):
        lo, mid, hi = fine.link_span(j)
        pieces: List[Tuple[Real, Real]] = [(lo, hi)]
        for _ in range(d):
            nxt: List[Tuple[Real, Real]] = []
            for a, b in pieces:
                nxt.append((a / tmap.slope, b / tmap.slope))
                rlo, rhi = 1 - b / tmap.slope, 1 - a / tmap.slope
                if midpoint_le(rlo, top):
                    nxt.append((rlo, rhi if midpoint_le(rhi, top) else top))
            pieces = nxt
        target = None
        for c in _candidate_links(coarse, value(pieces[0][0])):
            link = coarse.link(c)
            if all(
                _hull_inside(ImageHull(a, b, True, True), link) for a, b in pieces
            ):
                target = c
                break
        if target is None:
            return RefinesResult(
                False, None, j,
                detail=f"fine link {j}: backward branches escape every coarse link",
            )
        witness.append(target)
    return RefinesResult(True, tuple(witness), None)


# ---------------------------------------------------------------------------
# arc components and the unique p-point property
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentReport:
    anchor: Real
    link_index: int
    component: Tuple[Real, Real]
    ppoint_count: int
    ok: bool


@dataclass(frozen=True)
class UniquePPointReport:
    rows: Tuple[ComponentReport, ...]
    ok: bool
    violations: Tuple[ComponentReport, ...]


def arc_component_in_link(
    arc: Arc, chain: Chain, link_index: int, u, cuts: Optional[List[Real]] = None
) -> Tuple[Real, Real]:
    """Maximal sub-interval of the arc around anchor u whose pi_k image
    stays inside the given link.

    T^{N-k} restricted to the arc is piecewise affine with turning points
    exactly at the k-point anchors, so the component boundary is either a
    linear crossing of the link boundary or an arc endpoint.
    """
    tmap = arc.tmap
    d = arc.level - chain.k
    if d < 0:
        raise PreconditionError("arc level must be at least the chain's k")
    link = chain.link(link_index)
    u = tmap.scalar(u)
    if cuts is None:
        scan = p_points_on_arc(arc, chain.k)
        cuts = [pp.point.anchor for pp in scan.interior]
    xs: List[Real] = [arc.lo]
    for c in cuts:
        if midpoint_lt(arc.lo, c) and midpoint_lt(c, arc.hi):
            xs.append(c)
    xs.append(arc.hi)

    def f(v):
        return tmap.iterate(v, d)

    if not link.contains(f(u)):
        raise PreconditionError("anchor's projection is not inside the link")

    # locate the piece containing u
    idx = 0
    while idx + 1 < len(xs) and midpoint_lt(xs[idx + 1], u):
        idx += 1
    if idx + 1 < len(xs) and possibly_equal(xs[idx + 1], u):
        idx += 1  # u coincides with a cut: treat it as a piece boundary

    def crossing(a, b, fa, fb):
        # first exit of the affine segment from the link interval
        lo_t, hi_t = link.lo, link.hi
        if midpoint_lt(fb, lo_t) or (possibly_equal(fb, lo_t) and not link.lo_closed):
            target = lo_t
        elif midpoint_lt(hi_t, fb) or (possibly_equal(fb, hi_t) and not link.hi_closed):
            target = hi_t
        else:
            return None
        return a + (target - fa) * (b - a) / (fb - fa)

    # walk right
    hi_end = arc.hi
    a = u
    for nxt in xs[idx + 1:]:
        if possibly_equal(a, nxt):
            continue
        cr = crossing(a, nxt, f(a), f(nxt))
        if cr is not None:
            hi_end = cr
            break
        a = nxt
    # walk left
    lo_end = arc.lo
    b = u
    for prv in reversed(xs[: idx + 1]):
        if possibly_equal(b, prv):
            continue
        cr = crossing(b, prv, f(b), f(prv))
        if cr is not None:
            lo_end = cr
            break
        b = prv
    return lo_end, hi_end


def unique_ppoint_check(chain: Chain, p: int, arc: Arc) -> UniquePPointReport:
    """For each p-point on the arc, count p-points in the arc component of
    its link; the expected count is one.  Violations are reported, never
    raised: for small r the cover may legitimately fail the property.
    """
    if chain.k != p:
        raise PreconditionError(f"chain has k={chain.k}, expected k=p={p}")
    if arc.level <= chain.k + chain.depth:
        raise PreconditionError(
            f"arc level {arc.level} too shallow for chain depth {chain.depth}"
        )
    scan = p_points_on_arc(arc, p)
    cuts = [pp.point.anchor for pp in scan.interior]
    rows: List[ComponentReport] = []
    for pp in scan.interior:
        u = pp.point.anchor
        links = chain.link_of(pp.point)
        per_link: List[ComponentReport] = []
        for j in links:
            lo, hi = arc_component_in_link(arc, chain, j, u, cuts=cuts)
            count = 0
            for w in cuts:
                strictly_in = midpoint_lt(lo, w) and midpoint_lt(w, hi)
                at_arc_edge = (
                    possibly_equal(w, lo) and possibly_equal(lo, arc.lo)
                ) or (possibly_equal(w, hi) and possibly_equal(hi, arc.hi))
                if strictly_in or at_arc_edge:
                    count += 1
            per_link.append(ComponentReport(u, j, (lo, hi), count, count == 1))
        rows.extend(per_link)
    ok = all(
        any(r.ok for r in rows if possibly_equal(r.anchor, pp.point.anchor))
        for pp in scan.interior
    )
    violations = tuple(r for r in rows if not r.ok)
    return UniquePPointReport(tuple(rows), ok, violations)


# ---------------------------------------------------------------------------
# delimited export
# ---------------------------------------------------------------------------

def chain_rows(chain: Chain) -> List[List[str]]:
    """CSV rows for the links: j, lo, hi, lo_closed, hi_closed."""
    rows = [["j", "lo", "hi", "lo_closed", "hi_closed"]]
    for j, link in chain.iter_links():
        rows.append(
            [
                str(j),
                format_scalar(link.lo),
                format_scalar(link.hi),
                str(int(link.lo_closed)),
                str(int(link.hi_closed)),
            ]
        )
    return rows


def witness_rows(result: RefinesResult) -> List[List[str]]:
    rows = [["fine_j", "coarse_j"]]
    if result.witness:
        for j, c in enumerate(result.witness, start=1):
            rows.append([str(j), str(c)])
    return rows
