"""Render the five figure analogues from a results.csv + metadata.json pair.

Each figure writes a PNG and an SVG with labeled axes, one series per
(scheme, receiver) combination the figure calls for, error bars of one
standard error on the secrecy-rate series, and a footnote listing every
assumed (defaulted) parameter. Rendering is deterministic: fixed style, no
timestamps or host-dependent metadata in the output files.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .schema import (
    FIGURES,
    ResultRow,
    SchemaMismatchError,
    assumed_note,
    load_metadata,
    load_results,
)

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.4),
        "figure.dpi": 120,
        "savefig.dpi": 150,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.4,
        "lines.markersize": 4,
        "svg.hashsalt": "anofdm-plots",
    }
)

SCHEME_LABELS = {
    "equal_power": "equal power",
    "unknown_csi": "unknown Eve CSI",
    "known_csi_two_stage": "known CSI, two-stage",
    "known_csi_null_only": "known CSI, null-space only",
    "no_an": "no AN",
}

RECEIVER_LABELS = {
    "joint": "joint decoding",
    "per_subchannel": "per-subchannel decoding",
    "joint_approx": "diagonal approximation",
}

X_LABELS = {
    "fig1": "data power fraction",
    "fig2": "subchannel count N",
    "fig3": "CP length (samples)",
    "fig4": "CP length (samples)",
    "fig5": "legitimate-link channel memory (taps)",
}


@dataclass(frozen=True)
class FigureJob:
    csv_path: Path
    metadata_path: Path
    figure_id: str
    output_dir: Path

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise ValueError(f"unknown figure id {self.figure_id!r}")


def _series(rows: list[ResultRow], scheme: str, receiver: str) -> list[ResultRow]:
    picked = [r for r in rows if r.scheme == scheme and r.receiver == receiver]
    return sorted(picked, key=lambda r: r.sweep_value)


def _plot_secrecy(ax, rows, scheme, receiver, label):
    data = _series(rows, scheme, receiver)
    if not data:
        raise SchemaMismatchError(f"no rows for scheme={scheme}, receiver={receiver}")
    x = [r.sweep_value for r in data]
    y = [r.r_sec_bps for r in data]
    err = [r.stderr_bps for r in data]
    ax.errorbar(x, y, yerr=err, marker="o", capsize=2.5, label=label)


def build_figure(rows: list[ResultRow], meta: dict, figure_id: str):
    """Assemble the matplotlib Figure for one job (separate for testability)."""
    schemes = [s for s in SCHEME_LABELS if any(r.scheme == s for r in rows)]
    fig, ax = plt.subplots()

    if figure_id == "fig1":
        scheme = schemes[0]
        joint = _series(rows, scheme, "joint")
        if not joint:
            raise SchemaMismatchError(f"no joint rows for scheme={scheme}")
        x = [r.sweep_value for r in joint]
        ax.plot(x, [r.r_bob_bps for r in joint], marker="s", label="legitimate rate")
        ax.plot(
            x, [r.r_eve_bps for r in joint], marker="^", label="eavesdropper rate (joint)"
        )
        approx = _series(rows, scheme, "joint_approx")
        if approx:
            ax.plot(
                [r.sweep_value for r in approx],
                [r.r_eve_bps for r in approx],
                marker="v",
                linestyle="--",
                label="eavesdropper rate (approximation)",
            )
        _plot_secrecy(ax, rows, scheme, "joint", "secrecy rate")
        ax.set_ylabel("average rate (bits/sec)")
    elif figure_id == "fig2":
        for scheme in schemes:
            for receiver in ("joint", "per_subchannel"):
                _plot_secrecy(ax, rows, scheme, receiver, RECEIVER_LABELS[receiver])
        ax.set_ylabel("average secrecy rate (bits/sec)")
    else:  # fig3, fig4, fig5: secrecy per scheme, joint receiver
        for scheme in schemes:
            _plot_secrecy(ax, rows, scheme, "joint", SCHEME_LABELS[scheme])
        ax.set_ylabel("average secrecy rate (bits/sec)")

    ax.set_xlabel(X_LABELS[figure_id])
    snr = meta["parameters"].get("snr_db")
    trials = meta["parameters"].get("trials")
    title = figure_id
    if snr is not None:
        title += f": SNR {snr:g} dB"
    if trials is not None:
        title += f", {trials} trials/point"
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.text(
        0.01,
        0.01,
        assumed_note(meta) + f"; seed={meta.get('seed')}",
        fontsize=6,
        color="0.35",
    )
    fig.tight_layout(rect=(0, 0.035, 1, 1))
    return fig


def render(job: FigureJob) -> list[Path]:
    """Render one figure; returns the written image paths (PNG then SVG)."""
    rows = load_results(job.csv_path)
    meta = load_metadata(job.metadata_path)
    if meta.get("preset") != job.figure_id:
        raise SchemaMismatchError(
            f"metadata preset {meta.get('preset')!r} does not match requested"
            f" {job.figure_id!r}"
        )
    fig = build_figure(rows, meta, job.figure_id)
    job.output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in ("png", "svg"):
        path = job.output_dir / f"{job.figure_id}.{ext}"
        fig.savefig(path, metadata={"Date": None} if ext == "svg" else None)
        written.append(path)
    plt.close(fig)
    return written
