"""Static SVG figures: branch diagrams, decay curves and level-set profiles."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("branch-diagram", "decay-curve", "levelset-profile")


def emit_plot(series: dict, kind: str, path, title: str = "", annotation: str = "") -> Path:
    """Render ``series`` as an SVG.

    branch-diagram: keys ``lambda``, ``u0`` and optional ``fold`` (bool mask).
    decay-curve: keys ``t``, ``dev_u``.
    levelset-profile: keys ``t``, ``Psi``, ``Psit`` and optional ``crossings``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    if not series or any(np.size(v) == 0 for k, v in series.items() if k not in ("fold", "crossings")):
        raise ValueError("empty series")
    plt.rcParams["svg.hashsalt"] = "kslab"
    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "branch-diagram":
        lam, u0 = np.asarray(series["lambda"]), np.asarray(series["u0"])
        ax.plot(lam, u0, "-", lw=1.2)
        fold = np.asarray(series.get("fold", np.zeros(lam.size, bool)), bool)
        if fold.any():
            ax.plot(lam[fold], u0[fold], "rx", ms=8, label="fold")
            ax.legend()
        ax.set_xlabel("lambda")
        ax.set_ylabel("u(0)")
    elif kind == "decay-curve":
        ax.semilogy(series["t"], np.maximum(series["dev_u"], 1e-300))
        ax.set_xlabel("t")
        ax.set_ylabel("sup |u - lambda/(beta pi)|")
    else:
        ax.plot(series["t"], series["Psi"], label="Psi")
        ax.plot(series["t"], series["Psit"], label="Psi~")
        for c in series.get("crossings", []):
            ax.axvline(c, color="k", ls=":", lw=0.8)
        ax.set_xlabel("t")
        ax.legend()
    ax.set_title(title or kind)
    if annotation:
        ax.text(0.02, 0.98, annotation, transform=ax.transAxes, va="top", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
