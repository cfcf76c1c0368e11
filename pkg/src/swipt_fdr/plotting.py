"""Outage-versus-power figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .engine import SweepRow  # noqa: E402
from .policy import PolicyKind  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "svg.hashsalt": "swipt-fdr",
    "svg.fonttype": "none",
}


def _label(policy: PolicyKind, L) -> str:
    return "virtual harvest-transmit" if policy is PolicyKind.VIRTUAL else f"GS, L={L}"


def plot_outage(rows: list[SweepRow], path: Path, oracle=None) -> Path:
    """Log-scale outage curves, one per (policy, L); zero estimates are dropped.

    ``oracle`` is an optional sequence of ``(p_s_dbm, outage)`` drawn dashed.
    """
    curves: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        curves.setdefault((r.policy, r.L), []).append(r)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        markers = iter("osd^v<>p*h")
        for (policy, L), pts in curves.items():
            pts = sorted((p for p in pts if p.estimate.p_outage), key=lambda p: p.p_s_dbm)
            if not pts:
                continue
            x = [p.p_s_dbm for p in pts]
            y = [p.estimate.p_outage for p in pts]
            lo = [p.estimate.p_outage - p.estimate.ci_low for p in pts]
            hi = [p.estimate.ci_high - p.estimate.p_outage for p in pts]
            ax.errorbar(x, y, yerr=[lo, hi], marker=next(markers, "o"), capsize=2, label=_label(policy, L))
        if oracle:
            ox, oy = zip(*[(p, q) for p, q in oracle if q > 0])
            ax.plot(ox, oy, "k--", lw=1.0, label="virtual, quadrature")
        ax.set_yscale("log")
        ax.set_xlabel(r"$p_s$ (dBm)")
        ax.set_ylabel("outage probability")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="lower left")
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
    return path
