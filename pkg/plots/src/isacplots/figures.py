"""Render the four figure kinds from experiment CSVs.

All rendering is read-only over the input and deterministic: the same CSV
and spec produce byte-identical image files. ``render`` reports how many
data traces and threshold lines it drew so callers can check the counts
against the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import KINDS, SchemaError, read_table

_AXIS_LABELS = {
    "fig2": ("outer iteration", "PAPR"),
    "fig3": ("transmit SNR (dB)", "sum rate (bit/s/Hz)"),
    "fig4a": ("angle (deg)", "beampattern (power/deg)"),
    "fig4b": ("communication weight rho", "beampattern MSE (dB)"),
}

_VARIANT_STYLE = {
    "with_ris": dict(color="tab:blue", marker="o", label="with surface"),
    "without_ris": dict(color="tab:red", marker="s", label="without surface"),
}


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV, figure kind, output path, axis options."""

    kind: str
    csv_path: Path
    out_path: Path
    xlabel: str = ""
    ylabel: str = ""
    log_y: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")

    def labels(self):
        default_x, default_y = _AXIS_LABELS[self.kind]
        return self.xlabel or default_x, self.ylabel or default_y


@dataclass(frozen=True)
class RenderInfo:
    """What got drawn: trace/threshold counts and the final x-axis range."""

    traces: int
    thresholds: int
    x_range: tuple


def _draw_fig2(ax, table):
    # One trace per cap: mean PAPR across trials at each recorded iteration
    # (trials may stop early, so average whatever is present per index).
    etas = sorted(set(table["eta"].tolist()))
    for eta in etas:
        pick = table["eta"] == eta
        trials = sorted(set(table["trial"][pick].astype(int).tolist()))
        curves = []
        for trial in trials:
            rows = pick & (table["trial"] == trial)
            order = np.argsort(table["outer_iteration"][rows])
            curves.append(table["papr"][rows][order])
        width = max(len(c) for c in curves)
        mean = [np.mean([c[i] for c in curves if len(c) > i])
                for i in range(width)]
        ax.plot(range(width), mean, label=f"eta = {eta:g}")
    for eta in etas:
        ax.axhline(eta, color="gray", linestyle=":", linewidth=0.8)
    ax.legend()
    return len(etas), len(etas)


def _by_variant(table, key):
    variants = [v for v in ("with_ris", "without_ris")
                if v in set(table["variant"])]
    if not variants:
        raise SchemaError("no recognized variant rows in CSV")
    out = {}
    for variant in variants:
        pick = np.array([v == variant for v in table["variant"]])
        order = np.argsort(table[key][pick])
        out[variant] = pick, order
    return out


def _draw_fig3(ax, table):
    groups = _by_variant(table, "snr_db")
    for variant, (pick, order) in groups.items():
        ax.errorbar(table["snr_db"][pick][order],
                    table["mean_sum_rate"][pick][order],
                    yerr=table["stderr"][pick][order],
                    capsize=3, **_VARIANT_STYLE[variant])
    ax.legend()
    return len(groups), 0


def _draw_fig4a(ax, table):
    angles = table["angle_deg"]
    ax.plot(angles, table["desired"], "k--", label="desired")
    ax.plot(angles, table["with_ris"], color="tab:blue", label="with surface")
    ax.plot(angles, table["without_ris"], color="tab:red",
            label="without surface")
    ax.set_xlim(angles.min(), angles.max())
    ax.legend()
    return 3, 0


def _draw_fig4b(ax, table):
    groups = _by_variant(table, "rho")
    for variant, (pick, order) in groups.items():
        ax.plot(table["rho"][pick][order],
                table["mean_mse_db"][pick][order],
                **_VARIANT_STYLE[variant])
    ax.legend()
    return len(groups), 0


_DRAWERS = {
    "fig2": _draw_fig2,
    "fig3": _draw_fig3,
    "fig4a": _draw_fig4a,
    "fig4b": _draw_fig4b,
}


def render(spec: PlotSpec) -> RenderInfo:
    """Validate the CSV, draw the figure, and write one image file."""
    table = read_table(spec.csv_path, spec.kind)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=150)
    try:
        traces, thresholds = _DRAWERS[spec.kind](ax, table)
        xlabel, ylabel = spec.labels()
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if spec.log_y:
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = Path(spec.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        x_range = tuple(float(v) for v in ax.get_xlim())
    finally:
        plt.close(fig)
    return RenderInfo(traces=traces, thresholds=thresholds, x_range=x_range)
