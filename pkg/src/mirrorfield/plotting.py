"""Optional figures for ``mirrorfield profile --plot``."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def profile_figure(rows: list[dict], region_label: str, xi: float, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    z = np.array([r["z"] for r in rows])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    axes[0].plot(z, [r["phi2"] for r in rows], "o-", label="point split")
    axes[0].plot(z, [r["phi2_closed"] for r in rows], "k:", label="closed form")
    axes[0].set_xlabel("z")
    axes[0].set_ylabel(r"$\langle\phi^2\rangle_{ren}$")
    axes[0].legend(frameon=False)
    axes[1].plot(z, [r["t00"] for r in rows], "o-", label="point split")
    axes[1].plot(z, [r["t00_closed"] for r in rows], "k:", label="closed form")
    if rows and rows[0].get("oracle_t00") is not None:
        axes[1].plot(z, [r["oracle_t00"] for r in rows], "s", mfc="none", label="mode sum")
    axes[1].set_xlabel("z")
    axes[1].set_ylabel(r"$\langle T_{00}\rangle_{ren}$")
    axes[1].legend(frameon=False)
    fig.suptitle(f"{region_label}, xi = {xi:.6g}")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
