"""Command-line front end.

Thin wrappers only: every number reported here is produced by the library
and written as CSV (or SVG for the plot and report figures).  Exit codes:
0 success, 1 failed verification or math/usage error raised by the library,
2 command-line usage error (click), 3 computational refusal such as
enumerating folding points over an uncertified omega set.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path
from random import Random

import click

from . import __version__
from .chains import build_chain, chain_rows, mesh as chain_mesh, refines, witness_rows
from .errors import FoldingEnumerationError, ResourceLimitError, TentLimError
from .folding import enumerate_folding, folding_rows, is_folding_point
from .invlim import (
    LEFT_TAIL,
    Arc,
    arc_from_line,
    c0_point,
    p_points_on_arc,
    point_from_line,
    point_to_line,
)
from .isotopy import random_displacement
from .report import RunConfig, check_rows_csv, rows_to_csv, write_csv
from .scalars import format_scalar, value
from .tentmap import tent_map
from .verify import convergence_fixture_rows, enumerate_fold_points, verify_all

EXIT_REFUSED = 3


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FoldingEnumerationError, ResourceLimitError) as exc:
            click.echo(f"refused: {exc}", err=True)
            sys.exit(EXIT_REFUSED)
        except TentLimError as exc:
            raise click.ClickException(str(exc))

    return wrapper


def emit(rows, out):
    text = rows_to_csv(rows)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


slope_option = click.option(
    "--slope", default="2", show_default=True,
    help="Tent-map slope: rational 'p/q' or integer for exact mode, decimal "
         "for float mode; 'sqrt2' and 'phi' are recognized.",
)


@click.group()
@click.version_option(version=__version__)
@click.option("--config", type=click.Path(exists=True), default=None,
              help="Plain-text config with 'key = value' lines; values become "
                   "defaults for the matching options.")
@click.pass_context
def main(ctx, config):
    """Tent-map inverse limit toolkit: dynamics, chains, folding, isotopy."""
    if config:
        cfg = RunConfig.from_file(config)
        flat = {k: v for k, v in cfg.as_dict().items() if v is not None}
        ctx.default_map = {name: flat for name in (
            "orbit", "omega", "nonrecurrent", "ppoints", "verify", "folding", "chain", "plot",
        )}


@main.command()
@slope_option
@click.option("--x", required=True, help="starting point in [0, 1]")
@click.option("--n", default=32, show_default=True, help="number of iterations")
@click.option("--out", default=None, help="CSV output path (stdout otherwise)")
@guarded
def orbit(slope, x, n, out):
    """Forward orbit x, T(x), ..., T^n(x) as CSV."""
    tmap = tent_map(slope)
    rows = [["i", "value"]]
    for i, v in enumerate(tmap.orbit(x, n)):
        rows.append([str(i), format_scalar(v)])
    emit(rows, out)


@main.command()
@slope_option
@click.option("--x", default="1/2", show_default=True)
@click.option("--burn", default=64, show_default=True)
@click.option("--depth", default=256, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--out", default=None)
@guarded
def omega(slope, x, burn, depth, tol, out):
    """Omega-limit approximation of a point, with its finiteness certificate."""
    tmap = tent_map(slope)
    om = tmap.omega_limit(x, burn=burn, depth=depth, tol=tol)
    rows = [["point", "invariance_gap", "certified_finite"]]
    gap = om.invariance_gap(tmap)
    for p in om.points:
        rows.append([format_scalar(p), repr(gap), str(int(om.certified_finite))])
    emit(rows, out)


@main.command()
@slope_option
@click.option("--depth", default=100, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@guarded
def nonrecurrent(slope, depth, tol):
    """Certify absence of critical recurrence up to the given depth."""
    res = tent_map(slope).nonrecurrence(depth, tol)
    click.echo(f"nonrecurrent={res.nonrecurrent} gap={res.gap!r} depth={res.depth}")


@main.group()
def chain():
    """Chain covers: build, mesh bounds, refinement certification."""


@chain.command("build")
@slope_option
@click.option("--k", default=0, show_default=True)
@click.option("--r", default=0, show_default=True)
@click.option("--out", default=None)
@guarded
def chain_build(slope, k, r, out):
    """Build C_{k,r} and emit its links as CSV."""
    emit(chain_rows(build_chain(tent_map(slope), k, r)), out)


@chain.command("mesh")
@slope_option
@click.option("--k", default=0, show_default=True)
@click.option("--r", default=0, show_default=True)
@click.option("--tail-depth", default=8, show_default=True)
@guarded
def chain_mesh_cmd(slope, k, r, tail_depth):
    """Certified upper bound on the mesh of C_{k,r}."""
    value_ = chain_mesh(build_chain(tent_map(slope), k, r), tail_depth)
    click.echo(repr(value_))


@chain.command("refines")
@slope_option
@click.option("--k", default=1, show_default=True, help="fine chain k")
@click.option("--r", default=1, show_default=True, help="fine chain r")
@click.option("--k2", default=0, show_default=True, help="coarse chain k")
@click.option("--r2", default=0, show_default=True, help="coarse chain r")
@click.option("--out", default=None, help="witness CSV path")
@guarded
def chain_refines(slope, k, r, k2, r2, out):
    """Certify refinement of C_{k,r} by C_{k2,r2}; emits the witness."""
    tmap = tent_map(slope)
    res = refines(build_chain(tmap, k, r), build_chain(tmap, k2, r2))
    click.echo(f"refines={res.ok}" + ("" if res.ok else f" counterexample_link={res.counterexample}"))
    if res.ok:
        emit(witness_rows(res), out)
    if not res.ok:
        sys.exit(1)


@main.command()
@slope_option
@click.option("--level", default=6, show_default=True)
@click.option("--a", default="0", show_default=True)
@click.option("--b", default=None, help="defaults to T(1/2)")
@click.option("--p", default=0, show_default=True)
@click.option("--out", default=None)
@guarded
def ppoints(slope, level, a, b, p, out):
    """Enumerate p-points on an arc of the endpoint composant."""
    tmap = tent_map(slope)
    hi = tmap.critical_value if b is None else tmap.scalar(b)
    arc = Arc(tmap, level, tmap.scalar(a), hi, LEFT_TAIL)
    scan = p_points_on_arc(arc, p)
    rows = [["channel", "anchor", "fold_level"]]
    for pp in scan.interior:
        rows.append(["interior", format_scalar(pp.point.anchor), str(pp.fold_level)])
    for pp in scan.tail:
        rows.append(["tail", format_scalar(pp.point.anchor), str(pp.fold_level)])
    emit(rows, out)


@main.group()
def folding():
    """Folding point certificates and enumeration."""


@folding.command("detect")
@slope_option
@click.option("--point", required=True,
              help="point line, e.g. 'point N=0 u=0 tail=L'")
@click.option("--burn", default=64, show_default=True)
@click.option("--depth", default=64, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--out", default=None)
@guarded
def folding_detect(slope, point, burn, depth, tol, out):
    """Membership certificate for a single point."""
    tmap = tent_map(slope)
    x = point_from_line(tmap, point)
    om = tmap.omega_limit(tmap.half, burn=burn, depth=max(256, 4 * depth), tol=tol)
    cert = is_folding_point(x, om, depth=depth, tol=tol)
    emit(folding_rows([cert]), out)


@folding.command("enumerate")
@slope_option
@click.option("--length", default=64, show_default=True)
@click.option("--burn", default=64, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--out", default=None)
@guarded
def folding_enumerate(slope, length, burn, tol, out):
    """All folding points of a certified-finite omega set (else exit 3)."""
    tmap = tent_map(slope)
    om = tmap.omega_limit(tmap.half, burn=burn, depth=512, tol=tol)
    its = enumerate_folding(tmap, om, length=length)
    rows = [["promoted_point", "symbols_prefix"]]
    for bi in its:
        name = point_to_line(bi.promoted) if bi.promoted else ""
        rows.append([name, bi.symbols[:16]])
    emit(rows, out)


@main.group()
def verify():
    """Invariant suites; exit code 0 iff everything passes."""


@verify.command("all")
@slope_option
@click.option("--seed", default=0, show_default=True)
@click.option("--quick", is_flag=True, help="smaller sweeps, same coverage")
@click.option("--outdir", default=None,
              help="write verify.csv plus report figures into this directory")
@guarded
def verify_all_cmd(slope, seed, quick, outdir):
    """Run every invariant sweep for the given slope."""
    tmap = tent_map(slope)
    result = verify_all(tmap, seed=seed, quick=quick)
    rows = check_rows_csv(result.rows)
    if outdir:
        outpath = Path(outdir)
        outpath.mkdir(parents=True, exist_ok=True)
        write_csv(outpath / "verify.csv", rows)
        _report_figures(tmap, outpath)
        click.echo(f"wrote {outpath / 'verify.csv'} and report figures")
    for row in result.failures():
        click.echo(f"FAIL {row.check} value={row.value!r} bound={row.bound!r}", err=True)
    click.echo(f"{sum(r.ok for r in result.rows)}/{len(result.rows)} checks passed")
    if not result.ok:
        sys.exit(1)


def _report_figures(tmap, outpath: Path) -> None:
    from . import plots

    ks = list(range(0, 7))
    meshes = [chain_mesh(build_chain(tmap, k, k)) for k in ks]
    plots.plot_mesh_decay(ks, meshes, str(outpath / "mesh_decay.svg"))
    plots.plot_composant(tmap, level=6, out=str(outpath / "composant.svg"))


@main.group()
def plot():
    """Figure rendering (SVG via matplotlib)."""


@plot.command("composant")
@slope_option
@click.option("--level", default=6, show_default=True)
@click.option("--pi-i", default=0, show_default=True)
@click.option("--pi-j", default=1, show_default=True)
@click.option("--n", default=2048, show_default=True)
@click.option("--out", default="composant.svg", show_default=True)
@guarded
def plot_composant_cmd(slope, level, pi_i, pi_j, n, out):
    """Polyline of (pi_i, pi_j) pairs along the endpoint composant."""
    from . import plots

    path = plots.plot_composant(tent_map(slope), level, pi_i, pi_j, n, out)
    click.echo(f"wrote {path}")


@plot.command("isotopy")
@slope_option
@click.option("--t", default=0.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--level", default=4, show_default=True)
@click.option("--pi-i", default=0, show_default=True)
@click.option("--pi-j", default=1, show_default=True)
@click.option("--out", default="isotopy.svg", show_default=True)
@guarded
def plot_isotopy_cmd(slope, t, seed, level, pi_i, pi_j, out):
    """Arc, image arc, and interpolated arc of a random displacement map."""
    from . import plots

    tmap = tent_map(slope)
    rng = Random(seed)
    h = random_displacement(tmap, rng, fold_points=enumerate_fold_points(tmap))
    arc = Arc(tmap, level, tmap.zero, tmap.critical_value, LEFT_TAIL)
    path = plots.plot_isotopy(h, arc, t, pi_i, pi_j, out=out)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
