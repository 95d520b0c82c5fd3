"""Figure rendering for composants, isotopy snapshots, and reports.

Composant plots draw the endpoint composant as a polyline of coordinate
pairs (pi_i, pi_j); isotopy plots overlay an arc, its displaced image, and
the interpolated arc at a fixed time.  Files are written via matplotlib,
so any extension it knows works; .svg is the default used by the CLI.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .invlim import LEFT_TAIL, Arc, LimitPoint
from .isotopy import ConvergenceReport, DisplacementMap, isotopy_eval
from .scalars import value
from .tentmap import TentMap


def _polyline(points: Sequence[LimitPoint], i: int, j: int):
    xs = [value(p.project(i)) for p in points]
    ys = [value(p.project(j)) for p in points]
    return xs, ys


def plot_composant(
    tmap: TentMap,
    level: int,
    pi_i: int = 0,
    pi_j: int = 1,
    n: int = 2048,
    out: str = "composant.svg",
) -> str:
    """Initial segment of the endpoint composant in coordinates (pi_i, pi_j)."""
    arc = Arc(tmap, level, tmap.zero, tmap.critical_value, LEFT_TAIL)
    pts = arc.sample(n)
    xs, ys = _polyline(pts, pi_i, pi_j)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(xs, ys, lw=0.6, color="tab:blue")
    ax.set_xlabel(f"pi_{pi_i}")
    ax.set_ylabel(f"pi_{pi_j}")
    ax.set_title(f"endpoint composant, level {level}, slope {value(tmap.slope):g}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_isotopy(
    h: DisplacementMap,
    arc: Arc,
    t,
    pi_i: int = 0,
    pi_j: int = 1,
    n: int = 512,
    out: str = "isotopy.svg",
) -> str:
    """Arc, displaced image arc, and the interpolated arc at time t."""
    base = arc.sample(n)
    image = [h.apply(p) for p in base]
    interp = [isotopy_eval(h, p, t) for p in base]
    fig, ax = plt.subplots(figsize=(6, 6))
    for pts, label, style in (
        (base, "arc", {"color": "tab:blue", "lw": 1.0}),
        (image, "image", {"color": "tab:red", "lw": 1.0}),
        (interp, f"t={value(h.tmap.scalar(t)):g}", {"color": "tab:green", "lw": 1.0, "ls": "--"}),
    ):
        xs, ys = _polyline(pts, pi_i, pi_j)
        ax.plot(xs, ys, label=label, **style)
    ax.legend()
    ax.set_xlabel(f"pi_{pi_i}")
    ax.set_ylabel(f"pi_{pi_j}")
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_mesh_decay(ks: Sequence[int], meshes: Sequence[float], out: str = "mesh.svg") -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(list(ks), list(meshes), marker="o")
    ax.set_xlabel("k (= r)")
    ax.set_ylabel("mesh bound")
    ax.set_title("mesh of the diagonal chain family")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


def plot_convergence(
    reports: Sequence[ConvergenceReport], out: str = "convergence.svg"
) -> str:
    fig, ax = plt.subplots(figsize=(5, 4))
    for rep in reports:
        label = "folding target" if rep.folding_regime else "non-folding target"
        ax.semilogy(range(1, len(rep.distances) + 1), rep.distances, marker=".", label=label)
        ax.axhline(rep.threshold, ls=":", alpha=0.5)
    ax.set_xlabel("n")
    ax.set_ylabel("Hausdorff distance")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out
