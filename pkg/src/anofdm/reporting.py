"""Stable CSV and metadata emission for experiment results.

One CSV schema for every subcommand: fixed column order, shortest
round-trip float formatting (repr), deterministic row order. Absent
measurements become empty fields, never missing columns. The metadata JSON
carries every resolved parameter with its assumed-default flag; feeding it
back as the config reproduces the CSV byte-identically.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .simulate import ExperimentResult, ExperimentSpec, ResultRow, Scheme

CSV_HEADER = (
    "sweep_value",
    "scheme",
    "receiver",
    "r_bob_bps",
    "r_eve_bps",
    "r_sec_bps",
    "stderr_bps",
    "trials",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def rows_to_csv(rows: list[ResultRow]) -> str:
    lines = [",".join(CSV_HEADER)]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.sweep_value,
                    r.scheme,
                    r.receiver,
                    r.r_bob_bps,
                    r.r_eve_bps,
                    r.r_sec_bps,
                    r.stderr_bps,
                    r.trials,
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ResultRow], path: Path) -> None:
    path.write_text(rows_to_csv(rows))


def spec_to_params(spec: ExperimentSpec) -> dict:
    """Flat, JSON-friendly dict of every resolved spec parameter."""
    return {
        "n_sub": spec.cfg.n_sub,
        "n_cp": spec.cfg.n_cp,
        "bandwidth": spec.cfg.bandwidth,
        "l_bob": spec.l_bob,
        "l_eve": spec.l_eve,
        "snr_db": spec.snr_db,
        "alpha": spec.alpha,
        "sweep_axis": spec.sweep_axis,
        "sweep_values": list(spec.sweep_values),
        "schemes": [s.value for s in spec.schemes],
        "eve_receiver": spec.eve_receiver.value,
        "trials": spec.trials,
        "profile": spec.profile,
        "equal_data_power": spec.equal_data_power,
        "noise_bob": spec.noise_bob,
        "noise_eve": spec.noise_eve,
        "alpha_search": spec.alpha_search,
        "workers": spec.workers,
    }


def write_metadata(
    spec: ExperimentSpec,
    assumed: dict[str, bool],
    result: ExperimentResult,
    path: Path,
    preset: str | None,
    git_describe: str,
) -> None:
    params = spec_to_params(spec)
    meta = {
        "preset": preset,
        "parameters": params,
        "assumed": {k: bool(assumed.get(k, False)) for k in params},
        "seed": spec.master_seed,
        "git_describe": git_describe,
        "csv_header": list(CSV_HEADER),
        "diagnostics": {
            "skipped_sweep_values": [
                {"value": v, "reason": reason} for v, reason in result.skipped
            ],
            **result.diagnostics,
        },
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
