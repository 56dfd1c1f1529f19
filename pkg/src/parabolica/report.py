"""Matplotlib figures for the command line reports (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Patch

from .angles import fmt


def _class_names(q: int) -> list[str]:
    names = ["exterior", "adjacent"]
    names += [f"bitransitive m={m}" for m in range(1, q)]
    return names + ["capture", "double parabolic", "undecided", "hits 0"]


def locus_figure(img, path, *, dpi: int = 150) -> None:
    """Class image with axes in the a-plane, a legend and the double
    parabolic parameters marked."""
    from .dynamics import double_parabolic_params
    from .locus import palette

    q = img.slice.q
    half = img.width / 2
    extent = (img.center.real - half, img.center.real + half,
              img.center.imag - half, img.center.imag + half)
    fig, ax = plt.subplots(figsize=(7, 6))
    ax.imshow(img.rgb(), extent=extent, origin="upper", interpolation="nearest")
    try:
        dp = double_parabolic_params(img.slice, classify=False).values
        ax.plot([a.real for a in dp], [a.imag for a in dp], "x", color="red", ms=7,
                label="double parabolic")
    except ArithmeticError:
        pass
    colours = palette(q) / 255.0
    present = set(int(c) for c in set(img.codes.ravel().tolist()))
    handles = [Patch(color=colours[k], label=name)
               for k, name in enumerate(_class_names(q)) if k in present]
    ax.legend(handles=handles, loc="upper left", fontsize=7, framealpha=0.8)
    ax.set_xlabel("Re a")
    ax.set_ylabel("Im a")
    ax.set_title(f"parameter slice, rotation {img.slice}")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def ray_figure(traces, path, *, dpi: int = 150) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    for tr in traces:
        pts = tr.points
        ax.plot(pts.real, pts.imag, lw=1, label=f"{tr.plane} {fmt(tr.angle)} ({tr.status})")
        ax.plot([tr.endpoint.real], [tr.endpoint.imag], "o", ms=3)
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def fiber_figure(reports, path, *, dpi: int = 150) -> None:
    """Fibers of the double covering in the parameter plane, coloured by sheet."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for sheet, colour in ((0, "tab:blue"), (1, "tab:orange")):
        pts = [f.a for r in reports for f in r.fibers if f.sheet == sheet]
        ax.plot([a.real for a in pts], [a.imag for a in pts], ".", color=colour, ms=3,
                label=f"sheet {sheet}")
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    ax.set_xlabel("Re a")
    ax.set_ylabel("Im a")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
