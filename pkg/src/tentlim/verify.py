"""Randomized and fixture-based verification sweeps.

Each verifier returns CheckRow records (check name, parameters, value,
bound, pass) so the CLI can emit one delimited report for the whole run.
Sweeps are driven by a seeded generator: the same seed and configuration
produce byte-identical reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import List, Optional, Tuple

from .chains import build_chain, mesh, refines, unique_ppoint_check
from .errors import DomainError, FoldingEnumerationError
from .folding import enumerate_folding, is_folding_point
from .invlim import (
    FIXED_TAIL,
    LEFT_TAIL,
    Arc,
    ItineraryTail,
    LimitPoint,
    adjacent_gap_check,
    arc_between,
    c0_point,
    dbar,
    p_points_on_arc,
)
from .isotopy import (
    CheckRow,
    DisplacementMap,
    PiecewiseProfile,
    adjusted_map,
    arc_convergence_suite,
    displacement_bound_check,
    injectivity_check,
    isotopy_eval,
    random_displacement,
)
from .scalars import value
from .tentmap import TentMap

_DEN = 1 << 16


def random_anchor(tmap: TentMap, rng: Random, lo: float = 0.0, hi: Optional[float] = None):
    top = value(tmap.critical_value)
    hi = top if hi is None else hi
    raw = lo + (hi - lo) * rng.randrange(_DEN) / _DEN
    if tmap.exact:
        return Fraction(round(raw * _DEN), _DEN)
    return tmap.scalar(raw)


def random_c0_point(tmap: TentMap, rng: Random, max_level: int = 10) -> LimitPoint:
    return c0_point(tmap, rng.randrange(max_level + 1), random_anchor(tmap, rng))


def random_point(tmap: TentMap, rng: Random, max_level: int = 10) -> LimitPoint:
    """Random point with a mixed tail rule; retries until tail-valid."""
    kind = rng.random()
    level = rng.randrange(max_level + 1)
    if kind < 0.6:
        return c0_point(tmap, level, random_anchor(tmap, rng))
    if kind < 0.8:
        return LimitPoint(tmap, level, tmap.fixed_point, FIXED_TAIL)
    for _ in range(32):
        word = "".join(rng.choice("LR") for _ in range(rng.randrange(1, 4)))
        if set(word) == {"L"}:
            continue
        anchor = _cycle_fixed_value(tmap, word)
        try:
            return LimitPoint(tmap, level, anchor, ItineraryTail("", word))
        except DomainError:
            continue
    return c0_point(tmap, level, random_anchor(tmap, rng))


def _cycle_fixed_value(tmap: TentMap, word: str):
    """Fixed value of the affine backward-walk composition of the word."""
    a = tmap.scalar(1)
    b = tmap.zero
    for sym in word:
        if sym == "L":
            a, b = a / tmap.slope, b / tmap.slope
        else:
            a, b = -a / tmap.slope, 1 - b / tmap.slope
    return b / (1 - a)


def random_arc(tmap: TentMap, rng: Random, level_lo: int = 4, level_hi: int = 9) -> Arc:
    level = rng.randrange(level_lo, level_hi + 1)
    a = random_anchor(tmap, rng)
    b = random_anchor(tmap, rng)
    if value(b) < value(a):
        a, b = b, a
    return Arc(tmap, level, a, b, LEFT_TAIL)


def random_q_point(tmap: TentMap, rng: Random, q: int) -> LimitPoint:
    """A random q-point on the endpoint composant."""
    n = q + 1 + rng.randrange(3)
    level = n + rng.randrange(0, 3)
    pre = tmap.preimages(tmap.half, level - n)
    return c0_point(tmap, level, pre[rng.randrange(len(pre))])


# ---------------------------------------------------------------------------
# per-module sweeps
# ---------------------------------------------------------------------------

def verify_tentmap(tmap: TentMap, rng: Random, n: int = 200) -> List[CheckRow]:
    rows: List[CheckRow] = []
    top = value(tmap.critical_value)
    worst = 0.0
    for _ in range(n):
        x = random_anchor(tmap, rng, 0.0, 1.0)
        worst = max(worst, value(tmap.apply(x)))
    rows.append(CheckRow("eval_range", {"n": n}, worst, top + 1e-12, worst <= top + 1e-12))

    dev = 0.0
    count_ok = True
    for _ in range(20):
        j = rng.randrange(1, 6)
        y = random_anchor(tmap, rng)
        pre = tmap.preimages(y, j)
        count_ok = count_ok and len(pre) <= 2 ** j
        for u in pre:
            dev = max(dev, abs(value(tmap.iterate(u, j)) - value(y)))
    rows.append(CheckRow("preimage_forward_consistency", {}, dev, 1e-9, dev <= 1e-9))
    rows.append(CheckRow("preimage_count", {}, 0.0, 0.0, count_ok))

    om = tmap.omega_limit(tmap.half, burn=64, depth=256, tol=1e-9)
    inv = om.invariance_gap(tmap)
    rows.append(CheckRow("omega_invariance", {"size": len(om)}, inv, om.tol, inv <= om.tol))
    core = om.core_gap(tmap)
    rows.append(CheckRow("omega_core", {}, core, om.tol, core <= om.tol))
    return rows


def verify_invlim(tmap: TentMap, rng: Random, n_points: int = 1000) -> List[CheckRow]:
    rows: List[CheckRow] = []
    worst_rt = 0.0
    worst_cons = 0.0
    round_trips = True
    for _ in range(n_points):
        x = random_point(tmap, rng)
        y = x.shift().shift_inv()
        for i in range(21):
            worst_rt = max(worst_rt, abs(value(x.project(i)) - value(y.project(i))))
        round_trips = round_trips and y.same_point(x, tol=1e-12)
        n = rng.randrange(20)
        worst_cons = max(
            worst_cons,
            abs(value(tmap.apply(x.project(n + 1))) - value(x.project(n))),
        )
    rows.append(CheckRow("shift_roundtrip", {"n": n_points}, worst_rt, 1e-12, round_trips))
    rows.append(
        CheckRow("coordinate_consistency", {"n": n_points}, worst_cons, 1e-9, worst_cons <= 1e-9)
    )

    zero = c0_point(tmap, 0, 0)
    rows.append(
        CheckRow(
            "shift_fixes_endpoint", {}, 0.0, 0.0,
            zero.shift().same_point(zero) and zero.shift_inv().same_point(zero),
        )
    )
    fp = LimitPoint(tmap, 0, tmap.fixed_point, FIXED_TAIL)
    rows.append(
        CheckRow(
            "shift_fixes_constant_point", {}, 0.0, 0.0,
            fp.shift().same_point(fp, tol=1e-12) and fp.shift_inv().same_point(fp, tol=1e-12),
        )
    )

    worst = 0.0
    for _ in range(200):
        arc = random_arc(tmap, rng)
        x, y = arc.endpoints()
        base = dbar(x, y)
        for extra in (1, 2, 3):
            again = dbar(x, y, level=arc.level + extra)
            worst = max(worst, abs(value(base) - value(again)))
    rows.append(CheckRow("dbar_level_independence", {}, worst, 1e-9, worst <= 1e-9))

    sym = 0.0
    tri = 0.0
    for _ in range(100):
        arc = random_arc(tmap, rng)
        pts = [
            arc.point_at(random_anchor(tmap, rng, value(arc.lo), value(arc.hi)))
            for _ in range(3)
        ]
        d01, d10 = dbar(pts[0], pts[1]), dbar(pts[1], pts[0])
        sym = max(sym, abs(value(d01) - value(d10)))
        d02, d12 = dbar(pts[0], pts[2]), dbar(pts[1], pts[2])
        tri = max(tri, value(d02) - (value(d01) + value(d12)))
    rows.append(CheckRow("dbar_symmetry", {}, sym, 0.0, sym <= 1e-12))
    rows.append(CheckRow("dbar_triangle", {}, tri, 1e-9, tri <= 1e-9))

    mono_ok = True
    gaps_ok = True
    worst_gap = -1.0
    for _ in range(60):
        arc = random_arc(tmap, rng, 4, 8)
        p = rng.randrange(0, min(4, arc.level - 1) + 1)
        inner = p_points_on_arc(arc, p).interior
        if p + 1 < arc.level:
            outer = p_points_on_arc(arc, p + 1).interior
            inner_anchors = [value(q.point.anchor) for q in inner]
            for q in outer:
                if not any(abs(value(q.point.anchor) - a) <= 1e-12 for a in inner_anchors):
                    mono_ok = False
        for chk in adjacent_gap_check(arc, p):
            worst_gap = max(worst_gap, value(chk.gap) - value(chk.bound))
            gaps_ok = gaps_ok and chk.ok and chk.projection_injective
    rows.append(CheckRow("ppoint_monotone", {}, 0.0, 0.0, mono_ok))
    rows.append(CheckRow("adjacent_gap_bound", {}, worst_gap, 1e-9, gaps_ok))
    return rows


def verify_chains(tmap: TentMap, rng: Random, grid: int = 3) -> List[CheckRow]:
    rows: List[CheckRow] = []
    chains = {
        (k, r): build_chain(tmap, k, r)
        for k in range(grid + 1)
        for r in range(grid + 1)
    }

    covered = True
    ch = chains[(grid, grid)]
    for _ in range(500):
        if not ch.link_of(random_anchor(tmap, rng)):
            covered = False
    for p in ch.partition:
        if not ch.link_of(p):
            covered = False
    rows.append(CheckRow("chain_cover", {"k": grid, "r": grid}, 0.0, 0.0, covered))

    ref_ok = True
    for (q, m), fine in chains.items():
        for (p, n), coarse in chains.items():
            if q >= p and m >= n:
                res = refines(fine, coarse)
                ref_ok = ref_ok and res.ok and len(res.witness) == fine.t
    rows.append(CheckRow("refinement_grid", {"grid": grid}, 0.0, 0.0, ref_ok))

    meshes = [mesh(build_chain(tmap, k, k)) for k in range(grid + 2)]
    decreasing = all(b < a for a, b in zip(meshes, meshes[1:]))
    rows.append(
        CheckRow(
            "mesh_decay",
            {"values": [round(m, 6) for m in meshes]},
            meshes[-1],
            meshes[0],
            decreasing,
        )
    )

    nonempty = True
    for _ in range(100):
        if not ch.link_of(random_point(tmap, rng)):
            nonempty = False
    rows.append(CheckRow("link_of_nonempty", {}, 0.0, 0.0, nonempty))

    probe = chains[(0, grid)]
    rep = unique_ppoint_check(
        probe, 0, Arc(tmap, probe.depth + 2, tmap.zero, tmap.critical_value, LEFT_TAIL)
    )
    rows.append(
        CheckRow(
            "unique_ppoint_property",
            {"k": 0, "r": grid, "violations": len(rep.violations)},
            float(len(rep.violations)),
            0.0,
            True,  # informational: violations are an output, not a failure
        )
    )
    return rows


def enumerate_fold_points(tmap: TentMap, length: int = 48) -> Tuple[LimitPoint, ...]:
    """Promoted folding points when the omega set is certified finite, else ()."""
    om = tmap.omega_limit(tmap.half, burn=64, depth=512, tol=1e-9)
    if not om.certified_finite:
        return ()
    try:
        its = enumerate_folding(tmap, om, length=length)
    except FoldingEnumerationError:
        return ()
    return tuple(bi.promoted for bi in its if bi.promoted is not None)


def verify_folding(tmap: TentMap, rng: Random) -> List[CheckRow]:
    rows: List[CheckRow] = []
    om = tmap.omega_limit(tmap.half, burn=64, depth=512, tol=1e-9)
    fold_points: Tuple[LimitPoint, ...] = ()
    if om.certified_finite:
        its = enumerate_folding(tmap, om, length=64)
        fold_points = tuple(bi.promoted for bi in its if bi.promoted is not None)
        stable = len(enumerate_folding(tmap, om, length=128)) == len(its)
        rows.append(
            CheckRow("folding_enumeration_stable", {"count": len(its)}, 0.0, 0.0, stable)
        )
    depth_ok = True
    shift_ok = True
    for f in fold_points:
        depth_ok = (
            depth_ok
            and is_folding_point(f, om, depth=64).member
            and is_folding_point(f, om, depth=128).member
        )
        shift_ok = (
            shift_ok
            and is_folding_point(f.shift(), om, depth=63).member
            and is_folding_point(f.shift_inv(), om, depth=63).member
        )
    rows.append(CheckRow("folding_depth_stability", {}, 0.0, 0.0, depth_ok))
    rows.append(CheckRow("folding_shift_invariance", {}, 0.0, 0.0, shift_ok))

    fixed_ok = True
    for _ in range(5):
        h = random_displacement(tmap, rng, fold_points=fold_points)
        for f in fold_points:
            if not h.apply(f).same_point(f):
                fixed_ok = False
    rows.append(CheckRow("displacement_fixes_folding", {}, 0.0, 0.0, fixed_ok))
    return rows


def verify_isotopy(tmap: TentMap, rng: Random, quick: bool = False) -> List[CheckRow]:
    rows: List[CheckRow] = []
    fold_points = enumerate_fold_points(tmap)

    n_maps = 3 if quick else 10
    n_pts = 120 if quick else 500
    endpoint_ok = True
    fixity_ok = True
    affine = 0.0
    tgrid5 = [Fraction(i, 4) for i in range(5)] if tmap.exact else [i / 4 for i in range(5)]
    for _ in range(n_maps):
        h = random_displacement(tmap, rng, fold_points=fold_points)
        for _ in range(10):
            x = random_c0_point(tmap, rng, max_level=6)
            if not isotopy_eval(h, x, 0).same_point(x):
                endpoint_ok = False
            if not isotopy_eval(h, x, 1).same_point(h.apply(x)):
                endpoint_ok = False
            y = h.apply(x)
            if not y.same_point(x):
                arc = arc_between(x, y)
                a = x.at_level(arc.level).anchor
                b = y.at_level(arc.level).anchor
                mid = isotopy_eval(h, x, tgrid5[2]).at_level(arc.level).anchor
                affine = max(affine, abs(value(mid) - (value(a) + value(b)) / 2.0))
        for f in fold_points:
            for t in tgrid5:
                if not isotopy_eval(h, f, t).same_point(f):
                    fixity_ok = False
    rows.append(CheckRow("isotopy_endpoints", {"maps": n_maps}, 0.0, 0.0, endpoint_ok))
    rows.append(CheckRow("isotopy_folding_fixity", {}, 0.0, 0.0, fixity_ok))
    rows.append(CheckRow("isotopy_affine_interpolation", {}, affine, 1e-9, affine <= 1e-9))

    inj_ok = True
    tgrid = tgrid5 if quick else (
        [Fraction(i, 10) for i in range(11)] if tmap.exact else [i / 10 for i in range(11)]
    )
    for _ in range(n_maps):
        h = random_displacement(tmap, rng, fold_points=fold_points)
        sample = [random_c0_point(tmap, rng) for _ in range(n_pts)]
        for t in tgrid:
            inj_ok = inj_ok and injectivity_check(h, t, sample).ok
    rows.append(
        CheckRow("isotopy_injectivity", {"points": n_pts, "ts": len(tgrid)}, 0.0, 0.0, inj_ok)
    )

    rows.extend(convergence_fixture_rows(tmap, fold_points))

    ch = build_chain(tmap, 3, 3)
    eps = mesh(ch)
    s = value(tmap.slope)
    disp = random_displacement(
        tmap, rng, fold_points=fold_points, amplitude_scale=eps * s ** 3
    )
    sample = [random_c0_point(tmap, rng, 6) for _ in range(20)]
    for b in range(-2, 3):
        rows.extend(displacement_bound_check(b, 3, ch, sample, disp))

    adj_ok = True
    for (q, p) in ((1, 1), (2, 1), (3, 2)):
        fine = build_chain(tmap, q, 3)
        coarse = build_chain(tmap, p, 3)
        for b in (q - p, p - q):
            for _ in range(5):
                x = random_q_point(tmap, rng, q)
                got = adjusted_map(q, p, fine, coarse, b, x)
                if not got.same_point(x.shift_power(-b), tol=1e-12):
                    adj_ok = False
    rows.append(CheckRow("adjusted_map_matches_shift", {}, 0.0, 0.0, adj_ok))
    return rows


def convergence_fixture_rows(
    tmap: TentMap, fold_points: Tuple[LimitPoint, ...]
) -> List[CheckRow]:
    """The two Hausdorff regimes on calibrated fixtures."""
    rows: List[CheckRow] = []

    def f(x) -> object:
        return Fraction(x) if tmap.exact else tmap.scalar(float(Fraction(x)))

    # regime 1: non-folding target displaced by a bump, approach along the arc
    knots = ((f("1/10"), f(0)), (f("1/2"), f("1/5")), (f("9/10"), f(0)))
    h = DisplacementMap(tmap, PiecewiseProfile(knots), fold_points)
    target = c0_point(tmap, 0, f("7/20"))
    approach = [
        c0_point(tmap, 0, f("7/20") + f("1/10") / 2 ** n) for n in range(1, 13)
    ]
    rep = arc_convergence_suite(h, target, approach, folding=False)
    rows.append(
        CheckRow(
            "arc_convergence_nonfolding",
            {"monotone": rep.monotone},
            rep.final,
            rep.threshold,
            rep.ok,
        )
    )

    # regime 2: approach the composant endpoint when it is a folding point,
    # under a profile that scales with the distance to it
    zero_pt = c0_point(tmap, 0, 0)
    if any(zero_pt.same_point(fp) for fp in fold_points):
        damped = ((f(0), f(0)), (f("1/2"), f("1/10")), (f(1), f(0)))
        hd = DisplacementMap(tmap, PiecewiseProfile(damped), fold_points)
        approach = [
            c0_point(tmap, n, f("1/5") * f("1/4") ** n) for n in range(1, 13)
        ]
        rep = arc_convergence_suite(hd, zero_pt, approach, folding=True)
        rows.append(
            CheckRow(
                "arc_convergence_folding",
                {"monotone": rep.monotone},
                rep.final,
                rep.threshold,
                rep.ok,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyResult:
    rows: Tuple[CheckRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> List[CheckRow]:
        return [r for r in self.rows if not r.ok]


def verify_all(tmap: TentMap, seed: int = 0, quick: bool = False) -> VerifyResult:
    rng = Random(seed)
    rows: List[CheckRow] = []
    rows.extend(verify_tentmap(tmap, rng))
    rows.extend(verify_invlim(tmap, rng, n_points=200 if quick else 1000))
    rows.extend(verify_chains(tmap, rng, grid=2 if quick else 3))
    rows.extend(verify_folding(tmap, rng))
    rows.extend(verify_isotopy(tmap, rng, quick=quick))
    return VerifyResult(rows=tuple(rows))
