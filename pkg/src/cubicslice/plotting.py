"""Matplotlib figures written next to the CLI's delimited output (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    # fixed metadata keeps PNG output byte-stable across runs
    "svg.hashsalt": "cubicslice",
}


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def convergence_figure(report, path):
    """Sup gap and dictionary weak-* gap against q, on log axes."""
    q = np.array([r.q for r in report.rows])
    sup = np.array([r.sup_gap for r in report.rows])
    weak = np.array([r.weak_star_gap for r in report.rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.loglog(q, np.abs(sup), "o-", label="sup(u_n - u_theta)")
        ax.loglog(q, weak, "s-", label="weak-* gap (dictionary)")
        if report.uncertainty and np.isfinite(report.uncertainty):
            ax.axhline(report.uncertainty, color="gray", ls=":", label="radius uncertainty")
        ax.set_xlabel("q_n")
        ax.set_ylabel("gap")
        ax.legend()
        _save(fig, path)


def zcurve_figure(points, path):
    """Z-curve samples in the c-plane, coloured by arg Psi."""
    c = np.array([p.c for p in points])
    psi = np.array([p.psi for p in points])
    ok = np.isfinite(c)
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        sc = ax0.scatter(c[ok].real, c[ok].imag, c=np.angle(psi[ok]), s=6, cmap="twilight")
        ax0.set_aspect("equal")
        ax0.set_xlabel("Re c")
        ax0.set_ylabel("Im c")
        fig.colorbar(sc, ax=ax0, label="arg Psi")
        ax1.plot(np.abs(psi[ok]) - 1, ".", ms=3)
        ax1.set_xlabel("ray")
        ax1.set_ylabel("|Psi| - 1")
        _save(fig, path)


def atoms_figure(measure, path, title=""):
    """Atoms of a parabolic measure with the unit circle for reference."""
    pts = np.asarray(measure.points)
    t = np.linspace(0, 2 * np.pi, 400)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        ax.plot(np.cos(t), np.sin(t), color="gray", lw=0.5)
        ax.plot(pts.real, pts.imag, ".", ms=4)
        ax.set_aspect("equal")
        ax.set_title(title)
        _save(fig, path)


def series_figure(seq, path):
    """log|b_n| / n against n, the quantity whose limit gives -log r."""
    la = seq.log_abs()
    n = np.arange(1, len(la) + 1)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(n[1:], la[1:] / n[1:], lw=0.8)
        ax.set_xlabel("n")
        ax.set_ylabel("log|b_n| / n")
        _save(fig, path)
