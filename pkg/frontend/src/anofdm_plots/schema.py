"""CSV/metadata contract of the simulation CLI, as consumed by the plotters.

The plot scripts never recompute rates: they are pure consumers of the
results.csv schema (fixed header, repr-formatted floats, empty fields for
absent measurements) and of metadata.json (resolved parameters plus their
assumed-default flags).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = [
    "sweep_value",
    "scheme",
    "receiver",
    "r_bob_bps",
    "r_eve_bps",
    "r_sec_bps",
    "stderr_bps",
    "trials",
]

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")


class SchemaMismatchError(Exception):
    """The CSV header or metadata does not match the CLI contract."""


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    scheme: str
    receiver: str
    r_bob_bps: float
    r_eve_bps: float
    r_sec_bps: float
    stderr_bps: float
    trials: int


def _to_float(text: str) -> float:
    return math.nan if text == "" else float(text)


def load_results(path: Path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatchError(f"{path}: empty file, no header") from None
        if header != EXPECTED_HEADER:
            raise SchemaMismatchError(
                f"{path}: header {header!r} does not match the contract {EXPECTED_HEADER!r}"
            )
        rows = []
        for line in reader:
            if len(line) != len(EXPECTED_HEADER):
                raise SchemaMismatchError(f"{path}: malformed row {line!r}")
            rows.append(
                ResultRow(
                    sweep_value=_to_float(line[0]),
                    scheme=line[1],
                    receiver=line[2],
                    r_bob_bps=_to_float(line[3]),
                    r_eve_bps=_to_float(line[4]),
                    r_sec_bps=_to_float(line[5]),
                    stderr_bps=_to_float(line[6]),
                    trials=int(line[7]),
                )
            )
    if not rows:
        raise SchemaMismatchError(f"{path}: no data rows")
    return rows


def load_metadata(path: Path) -> dict:
    meta = json.loads(Path(path).read_text())
    if "parameters" not in meta or "assumed" not in meta:
        raise SchemaMismatchError(f"{path}: missing parameters/assumed sections")
    return meta


def assumed_note(meta: dict) -> str:
    params = meta["parameters"]
    assumed = [k for k, flag in sorted(meta["assumed"].items()) if flag]
    if not assumed:
        return "no assumed parameters"
    parts = []
    for key in assumed:
        value = params.get(key)
        if isinstance(value, list) and len(value) > 4:
            value = f"[{value[0]}..{value[-1]}]"
        parts.append(f"{key}={value}")
    return "assumed defaults: " + ", ".join(parts)
