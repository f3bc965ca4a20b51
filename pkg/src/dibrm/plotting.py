"""Figure rendering for the CLI report commands.

Figures are written next to the CSV they were drawn from.  The CSV is the
data of record; figures are for looking at.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SERIES_STYLE = {
    "dibrm": dict(color="tab:blue", lw=1.5, label="DIBRM reputation"),
    "dibrm_historical": dict(color="tab:green", lw=1.5, ls="--", label="DIBRM historical"),
    "reference": dict(color="tab:red", lw=1.5, label="reference"),
}

# PNG metadata would otherwise carry the matplotlib version
_SAVE = dict(dpi=100, metadata={"Software": None})


def user_figure(user, days: Sequence, series: Mapping[str, Sequence[float]], path) -> Path:
    """One user's series over time, reference on a twin axis.

    The two models live on unrelated scales, so each gets its own y axis.
    """
    fig, ax = plt.subplots(figsize=(7, 3.5))
    x = list(range(len(days)))
    handles = []
    for name in ("dibrm", "dibrm_historical"):
        if name in series:
            handles += ax.plot(x, series[name], **SERIES_STYLE[name])
    ax.set_ylabel("DIBRM trust")
    if "reference" in series:
        ax2 = ax.twinx()
        handles += ax2.plot(x, series["reference"], **SERIES_STYLE["reference"])
        ax2.set_ylabel("reference score")
    ticks = x[:: max(1, len(x) // 6)]
    ax.set_xticks(ticks)
    ax.set_xticklabels([str(days[i]) for i in ticks], rotation=30, ha="right", fontsize=8)
    ax.set_title(f"user {user}")
    ax.legend(handles=handles, loc="upper left", fontsize=8, frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def sweep_figure(labels: Sequence[str], mus: Mapping[str, Sequence[float]],
                 sigmas: Mapping[str, Sequence[float]], path) -> Path:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 2), 3.5))
    x = list(range(len(labels)))
    for which, mu in mus.items():
        ax.errorbar(x, mu, yerr=sigmas[which], marker="o", capsize=3, label=f"mu ({which})")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("agreement mu")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path
