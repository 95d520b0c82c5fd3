"""Displacement surrogates, the straight-line isotopy, and its checks.

Arbitrary self-homeomorphisms of the inverse limit cannot be enumerated, so
the test class is the family of composant-wise displacement maps: an
order-preserving reparametrization of the endpoint composant that moves each
point forward by a bounded, continuous profile vanishing at every enumerated
folding point, optionally composed with a power of the shift.  This is
exactly the input family the straight-line isotopy consumes.

The isotopy interpolates the anchor coordinate on the arc joining a point to
its image, at the shallowest level where that arc projects injectively.  Its
endpoint identities, folding fixity, injectivity of each time slice, and the
two Hausdorff convergence regimes (toward the limit arc off the folding set,
toward a singleton on it) are all checked on samples.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .chains import Chain, arc_component_in_link, mesh, refines
from .errors import AmbiguityError, DomainError, PreconditionError
from .invlim import (
    LEFT_TAIL,
    Arc,
    LimitPoint,
    arc_between,
    ambient_tail_bound,
    c0_coordinate,
    c0_point_at,
    dbar,
    is_left_stream,
    is_p_point,
    p_points_on_arc,
    tail_symbol,
)
from .scalars import Real, format_scalar, midpoint_le, midpoint_lt, possibly_equal, value
from .tentmap import TentMap


# ---------------------------------------------------------------------------
# displacement profiles and maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseProfile:
    """Piecewise-linear displacement profile over the composant coordinate.

    Zero outside the knot range; every segment slope must stay above -1 so
    that ell + profile(ell) is strictly increasing (order preservation).
    """

    knots: Tuple[Tuple[Real, Real], ...]

    def __post_init__(self):
        if len(self.knots) < 2:
            raise DomainError("profile needs at least two knots")
        ells = [k[0] for k in self.knots]
        phis = [k[1] for k in self.knots]
        for a, b in zip(ells, ells[1:]):
            if not midpoint_lt(a, b):
                raise DomainError("profile knots must be strictly increasing")
        for phi in phis:
            if midpoint_lt(phi, 0) and not possibly_equal(phi, 0):
                raise DomainError("displacement must be forward (phi >= 0)")
        if not possibly_equal(phis[0], 0) or not possibly_equal(phis[-1], 0):
            raise DomainError("profile must vanish at its support boundary")
        for (e0, p0), (e1, p1) in zip(self.knots, self.knots[1:]):
            slope = (value(p1) - value(p0)) / (value(e1) - value(e0))
            if slope <= -1.0:
                raise DomainError("profile slope <= -1 breaks order preservation")

    @property
    def bound(self) -> float:
        return max(value(p) for _, p in self.knots)

    def __call__(self, ell) -> Real:
        ells = [value(k[0]) for k in self.knots]
        v = value(ell)
        if v <= ells[0] or v >= ells[-1]:
            zero = self.knots[0][1]
            return zero - zero  # typed zero matching the knot arithmetic
        i = bisect_right(ells, v) - 1
        e0, p0 = self.knots[i]
        e1, p1 = self.knots[i + 1]
        return p0 + (p1 - p0) * (ell - e0) / (e1 - e0)


@dataclass(frozen=True)
class DisplacementMap:
    """Order-preserving forward displacement along the endpoint composant.

    Acts as the identity off that composant; fixes every listed folding
    point (checked at construction).
    """

    tmap: TentMap
    profile: PiecewiseProfile
    fold_points: Tuple[LimitPoint, ...] = ()

    def __post_init__(self):
        for f in self.fold_points:
            if is_left_stream(f.tail):
                ell = c0_coordinate(f)
                disp = self.profile(ell)
                if not possibly_equal(disp, 0, 1e-15):
                    raise DomainError(
                        "profile does not vanish at an enumerated folding point"
                    )

    @property
    def bound(self) -> float:
        return self.profile.bound

    def displacement(self, x: LimitPoint) -> Real:
        if not is_left_stream(x.tail):
            return self.tmap.zero
        return self.profile(c0_coordinate(x))

    def apply(self, x: LimitPoint) -> LimitPoint:
        if not is_left_stream(x.tail):
            return x
        ell = c0_coordinate(x)
        disp = self.profile(ell)
        if possibly_equal(disp, 0) and value(disp) == 0.0:
            return x
        return c0_point_at(self.tmap, ell + disp)

    def __call__(self, x: LimitPoint) -> LimitPoint:
        return self.apply(x)


def _rand_fraction(rng: Random, lo: float, hi: float, den: int = 1 << 16) -> Fraction:
    return Fraction(lo) + Fraction(rng.randrange(den), den) * (Fraction(hi) - Fraction(lo))


def random_displacement(
    tmap: TentMap,
    rng: Random,
    ell_max: float = 4.0,
    fold_points: Tuple[LimitPoint, ...] = (),
    amplitude_scale: float = 1.0,
) -> DisplacementMap:
    """A random tent-shaped bump supported away from the composant endpoint."""
    fold_ells = [
        value(c0_coordinate(f)) for f in fold_points if is_left_stream(f.tail)
    ]
    floor = max([0.0] + fold_ells)
    span = ell_max - floor
    lo_f = floor + span * (0.05 + 0.35 * rng.random())
    hi_f = lo_f + span * (0.15 + 0.4 * rng.random())
    mid_f = lo_f + (hi_f - lo_f) * (0.25 + 0.5 * rng.random())
    amp_f = (
        amplitude_scale
        * (0.2 + 0.6 * rng.random())
        * min(mid_f - lo_f, hi_f - mid_f)
    )
    if tmap.exact:
        # snap to a dyadic grid: keeps denominators small downstream
        lo, mid, hi, amp = (
            Fraction(round(v * 65536), 65536) for v in (lo_f, mid_f, hi_f, amp_f)
        )
        zero = Fraction(0)
    else:
        lo, hi, mid, amp = (tmap.scalar(v) for v in (lo_f, hi_f, mid_f, amp_f))
        zero = tmap.zero
    profile = PiecewiseProfile(((lo, zero), (mid, amp), (hi, zero)))
    return DisplacementMap(tmap, profile, fold_points)


# ---------------------------------------------------------------------------
# the isotopy
# ---------------------------------------------------------------------------

def isotopy_eval(h: DisplacementMap, x: LimitPoint, t) -> LimitPoint:
    """H(x, t): interpolate the anchor coordinate from x toward h(x).

    H(x, 0) = x and H(x, 1) = h(x) as representations; enumerated folding
    points and fixed points of h are returned unchanged for every t.
    """
    tmap = h.tmap
    ts = tmap.scalar(t)
    if midpoint_lt(ts, 0) or midpoint_lt(tmap.scalar(1), ts):
        raise DomainError("isotopy time must lie in [0, 1]")
    for f in h.fold_points:
        if x.same_point(f):
            return x
    y = h.apply(x)
    if y is x or y.same_point(x):
        return x
    arc = arc_between(x, y)
    a = x.at_level(arc.level).anchor
    b = y.at_level(arc.level).anchor
    u = (1 - ts) * a + ts * b
    return LimitPoint(tmap, arc.level, u, arc.tail)


# ---------------------------------------------------------------------------
# sampled arcs and the Hausdorff distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcSample:
    """A finite sample of an arc with its resolution slack in the ambient metric."""

    points: Tuple[LimitPoint, ...]
    slack: float


def sample_arc(arc: Arc, n: int = 48) -> ArcSample:
    pts = tuple(arc.sample(n))
    s = value(arc.tmap.slope)
    gap = value(arc.length) / max(n, 1)
    slack = gap * (2.0 * s / (2.0 * s - 1.0))
    return ArcSample(points=pts, slack=slack)


def point_sample(x: LimitPoint) -> ArcSample:
    return ArcSample(points=(x,), slack=0.0)


def _coord_matrix(points: Sequence[LimitPoint], depth: int) -> np.ndarray:
    out = np.empty((len(points), depth + 1))
    for i, p in enumerate(points):
        head = [0.0] * (p.level + 1)
        v = value(p.anchor)
        s = value(p.tmap.slope)
        head[p.level] = v
        w = v
        for n in range(p.level - 1, -1, -1):
            w = s * min(w, 1.0 - w)
            head[n] = w
        row = head[: depth + 1]
        if len(row) < depth + 1:
            w = v
            for j in range(depth - p.level):
                sym = tail_symbol(p.tail, j)
                w = w / s if sym == "L" else 1.0 - w / s
                row.append(w)
        out[i] = row
    return out


@dataclass(frozen=True)
class HausdorffResult:
    distance: float
    slack: float
    tail_bound: float

    def __float__(self):
        return self.distance


def hausdorff(a: ArcSample, b: ArcSample, depth: int = 24) -> HausdorffResult:
    """Symmetric Hausdorff distance of two point samples.

    Distances use the truncated ambient metric; the sampling slack and the
    truncation tail bound are reported separately rather than added in.
    """
    tmap = a.points[0].tmap
    A = _coord_matrix(a.points, depth)
    B = _coord_matrix(b.points, depth)
    w = 0.5 ** np.arange(depth + 1)
    D = np.abs(A[:, None, :] - B[None, :, :]) @ w
    d = max(D.min(axis=1).max(), D.min(axis=0).max())
    return HausdorffResult(
        distance=float(d),
        slack=a.slack + b.slack,
        tail_bound=ambient_tail_bound(tmap, depth),
    )


# ---------------------------------------------------------------------------
# check reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    """One verification datum: value against bound, with parameters."""

    check: str
    params: dict
    value: float
    bound: float
    ok: bool

    def csv(self) -> List[str]:
        return [
            self.check,
            json.dumps(self.params, sort_keys=True),
            repr(self.value),
            repr(self.bound),
            str(int(self.ok)),
        ]


@dataclass(frozen=True)
class ConvergenceReport:
    folding_regime: bool
    distances: Tuple[float, ...]
    monotone: bool
    final: float
    threshold: float
    ok: bool

    def rows(self) -> List[CheckRow]:
        out = []
        for i, d in enumerate(self.distances):
            bound = self.distances[i - 1] if i else math.inf
            out.append(
                CheckRow(
                    "arc_convergence",
                    {"n": i + 1, "folding": self.folding_regime},
                    d,
                    bound,
                    d <= bound + 1e-12,
                )
            )
        out.append(
            CheckRow(
                "arc_convergence_final",
                {"folding": self.folding_regime},
                self.final,
                self.threshold,
                self.final <= self.threshold,
            )
        )
        return out


def arc_convergence_suite(
    h: DisplacementMap,
    target: LimitPoint,
    approach: Sequence[LimitPoint],
    n_samples: int = 48,
    depth: int = 24,
    threshold: Optional[float] = None,
    folding: Optional[bool] = None,
    mono_tol: float = 1e-12,
) -> ConvergenceReport:
    """Hausdorff convergence of the arcs from z_n to h(z_n).

    Off the folding set the limit is the arc from the target to its image;
    on it the limit is the singleton target.
    """
    if folding is None:
        folding = any(target.same_point(f) for f in h.fold_points)
    if folding:
        limit = point_sample(target)
        thr = 1e-2 if threshold is None else threshold
    else:
        limit_arc = arc_between(target, h.apply(target))
        limit = (
            point_sample(target)
            if limit_arc.is_degenerate()
            else sample_arc(limit_arc, n_samples)
        )
        thr = 1e-3 if threshold is None else threshold
    dists = []
    for z in approach:
        image = h.apply(z)
        an = arc_between(z, image)
        sample = point_sample(z) if an.is_degenerate() else sample_arc(an, n_samples)
        dists.append(hausdorff(sample, limit, depth).distance)
    monotone = all(b <= a + mono_tol for a, b in zip(dists, dists[1:]))
    final = dists[-1] if dists else math.inf
    return ConvergenceReport(
        folding_regime=folding,
        distances=tuple(dists),
        monotone=monotone,
        final=final,
        threshold=thr,
        ok=monotone and final <= thr,
    )


@dataclass(frozen=True)
class InjectivityReport:
    t: float
    n_points: int
    violations: Tuple[Tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def injectivity_check(
    h: DisplacementMap, t, sample: Sequence[LimitPoint]
) -> InjectivityReport:
    """Pairwise distinctness of the time slice H(., t) on the sample.

    On the endpoint composant order preservation is checked as well: the
    slice must be strictly increasing in the composant coordinate.
    """
    on_c0 = [x for x in sample if is_left_stream(x.tail)]
    off_c0 = [x for x in sample if not is_left_stream(x.tail)]
    violations: List[Tuple[str, str]] = []
    on_c0.sort(key=lambda x: value(c0_coordinate(x)))
    images = [isotopy_eval(h, x, t) for x in on_c0]
    ells = [c0_coordinate(y) for y in images]
    for (x0, e0), (x1, e1) in zip(zip(on_c0, ells), zip(on_c0[1:], ells[1:])):
        if possibly_equal(c0_coordinate(x0), c0_coordinate(x1)):
            continue  # duplicated sample point, not an injectivity failure
        if not midpoint_lt(e0, e1):
            violations.append((repr(x0), repr(x1)))
    for i, x in enumerate(off_c0):
        for y in off_c0[i + 1:]:
            if not x.same_point(y):
                if isotopy_eval(h, x, t).same_point(isotopy_eval(h, y, t)):
                    violations.append((repr(x), repr(y)))
    return InjectivityReport(t=value(h.tmap.scalar(t)), n_points=len(sample), violations=tuple(violations))


def displacement_bound_check(
    b: int,
    q: int,
    chain_coarse: Chain,
    sample: Sequence[LimitPoint],
    disp: DisplacementMap,
    tail_depth: int = 8,
    tol: float = 1e-9,
) -> List[CheckRow]:
    """Check d-bar(shift^{-b}(z), h(z)) <= s^q + 4 * mesh * s^q for h = shift^{-b} o disp.

    The displacement bound must not exceed mesh * s^q, the scale on which a
    chain-close homeomorphism can move p-points.
    """
    eps = mesh(chain_coarse, tail_depth)
    s = value(chain_coarse.tmap.slope)
    if disp.bound > eps * s ** q + tol:
        raise PreconditionError(
            f"displacement bound {disp.bound} exceeds mesh * s^q = {eps * s ** q}"
        )
    bound = s ** q + 4.0 * eps * s ** q
    rows = []
    for z in sample:
        lhs = dbar(z.shift_power(-b), disp.apply(z).shift_power(-b))
        v = value(lhs)
        rows.append(
            CheckRow(
                "displacement_bound",
                {"b": b, "q": q, "mesh": eps, "z": format_scalar(c0_coordinate(z))},
                v,
                bound,
                v <= bound + tol,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# the adjusted map
# ---------------------------------------------------------------------------

def adjusted_map(
    q: int,
    p: int,
    chain_fine: Chain,
    chain_coarse: Chain,
    b: int,
    x: LimitPoint,
    max_deepen: int = 12,
    require_refines: bool = True,
) -> LimitPoint:
    """Map a q-point to the unique p-point in the arc component of the
    coarse link containing shift^{-b}(x).

    Raises AmbiguityError when a component carries zero or several p-points;
    callers then compare the result with shift^{-b}(x) directly.
    """
    if chain_fine.k != q or chain_coarse.k != p:
        raise PreconditionError("chain anchor levels must match q and p")
    if not is_left_stream(x.tail):
        raise PreconditionError("the adjusted map is evaluated on the endpoint composant")
    if not is_p_point(x, q):
        raise PreconditionError("input is not a q-point")
    if require_refines and not refines(chain_fine, chain_coarse).ok:
        raise PreconditionError("the fine chain does not refine the coarse chain")
    y = x.shift_power(-b)
    tmap = x.tmap
    top = tmap.critical_value
    level = max(y.level, p + chain_coarse.r + 2)
    for _ in range(max_deepen):
        full = Arc(tmap, level, tmap.zero, top, LEFT_TAIL)
        scan = p_points_on_arc(full, p)
        cuts = [pp.point.anchor for pp in scan.interior]
        u = y.at_level(level).anchor
        best_error: Optional[AmbiguityError] = None
        clipped = False
        for j in chain_coarse.link_of(y):
            lo, hi = arc_component_in_link(full, chain_coarse, j, u, cuts=cuts)
            if possibly_equal(hi, top):
                clipped = True  # component may continue past this representation
                continue
            inside = [
                pp
                for pp in scan.interior
                if (midpoint_lt(lo, pp.point.anchor) and midpoint_lt(pp.point.anchor, hi))
                or (possibly_equal(pp.point.anchor, lo) and possibly_equal(lo, tmap.zero))
            ]
            if len(inside) == 1:
                return inside[0].point
            best_error = AmbiguityError(
                f"link {j}: arc component carries {len(inside)} p-points",
                link_index=j,
                count=len(inside),
            )
        if clipped:
            level += 1
            continue
        if best_error is not None:
            raise best_error
        raise AmbiguityError("image lies in no coarse link", link_index=None, count=0)
    raise AmbiguityError(
        "component never separated from the representation boundary",
        link_index=None,
        count=-1,
    )
