"""Command-line front end: run experiments, sweeps, figure presets, validation.

Every experiment invocation writes three artifacts into the output directory:
results.csv (the stable rate table), metadata.json (every resolved parameter
with its assumed flag; feeding it back via --config reproduces the CSV
byte-identically), and run.log.

Exit codes: 0 success, 1 usage/configuration error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import subprocess
import sys
import time
from pathlib import Path

from .ofdm import OfdmConfig
from .reporting import spec_to_params, write_csv, write_metadata
from .simulate import (
    FIGURE_NAMES,
    ExperimentSpec,
    Receiver,
    Scheme,
    figure_preset,
    run_experiment,
)

log = logging.getLogger("anofdm")

CONFIG_KEYS = set(spec_to_params(ExperimentSpec(cfg=OfdmConfig(64, 16)))) | {"seed"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # spec'd exit code for usage errors is 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        if "," in text:
            return [_parse_value(t) for t in text.split(",")]
        return text


def load_config(path: Path) -> dict:
    """Read a TOML config or a previously emitted metadata.json."""
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        if "parameters" in data:
            params = dict(data["parameters"])
            if "seed" in data:
                params["seed"] = data["seed"]
            return params
        return data
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:  # pragma: no cover
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _listify(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def spec_from_params(params: dict) -> ExperimentSpec:
    unknown = set(params) - CONFIG_KEYS
    if unknown:
        raise _UsageError(f"unknown config keys: {sorted(unknown)}")
    p = dict(params)
    cfg = OfdmConfig(
        n_sub=int(p.pop("n_sub", 64)),
        n_cp=int(p.pop("n_cp", 16)),
        bandwidth=float(p.pop("bandwidth", 1e6)),
    )
    try:
        schemes = tuple(Scheme(s) for s in _listify(p.pop("schemes", ["unknown_csi"])))
        receiver = Receiver(p.pop("eve_receiver", "joint"))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    sweep_values = tuple(_listify(p.pop("sweep_values", [p.get("alpha", 0.5)])))
    kwargs = dict(
        cfg=cfg,
        schemes=schemes,
        eve_receiver=receiver,
        sweep_values=sweep_values,
        master_seed=int(p.pop("seed", 0)),
    )
    for key, cast in [
        ("l_bob", int),
        ("l_eve", int),
        ("snr_db", float),
        ("alpha", float),
        ("sweep_axis", str),
        ("trials", int),
        ("profile", str),
        ("equal_data_power", bool),
        ("noise_bob", float),
        ("noise_eve", float),
        ("alpha_search", bool),
        ("workers", int),
    ]:
        if key in p:
            kwargs[key] = cast(p.pop(key))
    try:
        return ExperimentSpec(**kwargs)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _apply_common_flags(params: dict, args) -> dict:
    if args.config:
        loaded = load_config(Path(args.config))
        loaded.update(params)
        params = loaded
    for item in args.override or []:
        if "=" not in item:
            raise _UsageError(f"override {item!r} is not KEY=VALUE")
        key, _, value = item.partition("=")
        if key not in CONFIG_KEYS:
            raise _UsageError(f"unknown override key {key!r}")
        params[key] = _parse_value(value)
    if args.seed is not None:
        params["seed"] = args.seed
    if args.trials is not None:
        params["trials"] = args.trials
    if args.workers is not None:
        params["workers"] = (
            os.cpu_count() or 1 if args.workers == "auto" else int(args.workers)
        )
    return params


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _setup_run_log(out_dir: Path) -> logging.Handler:
    handler = logging.FileHandler(out_dir / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s %(message)s"))
    root = logging.getLogger("anofdm")
    root.setLevel(logging.INFO)
    root.addHandler(handler)
    return handler


def _execute(spec: ExperimentSpec, assumed: dict, out_dir: Path, preset: str | None, fmt: str) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    handler = _setup_run_log(out_dir)
    try:
        log.info("spec: %s", spec_to_params(spec))
        start = time.perf_counter()
        result = run_experiment(spec)
        log.info(
            "ran %d rows in %.1f s (skipped %d sweep values)",
            len(result.rows),
            time.perf_counter() - start,
            len(result.skipped),
        )
        for value, reason in result.skipped:
            log.warning("sweep value %r skipped: %s", value, reason)
        write_csv(result.rows, out_dir / "results.csv")
        if fmt == "json":
            rows = [vars(r) for r in result.rows]
            (out_dir / "results.json").write_text(json.dumps(rows, indent=2) + "\n")
        write_metadata(
            spec, assumed, result, out_dir / "metadata.json", preset, _git_describe()
        )
        log.info("wrote %s", out_dir / "results.csv")
    finally:
        logging.getLogger("anofdm").removeHandler(handler)
        handler.close()
    return 0


def _cmd_run(args) -> int:
    params = _apply_common_flags({}, args)
    params.setdefault("sweep_axis", "alpha")
    params.setdefault("sweep_values", [params.get("alpha", 0.5)])
    spec = spec_from_params(params)
    return _execute(spec, {}, Path(args.out), None, args.format)


def _cmd_sweep(args) -> int:
    params = _apply_common_flags({}, args)
    if args.axis:
        params["sweep_axis"] = args.axis
    if args.values:
        params["sweep_values"] = [_parse_value(v) for v in args.values.split(",")]
    if "sweep_axis" not in params or "sweep_values" not in params:
        raise _UsageError("sweep needs --axis and --values (or a config providing them)")
    spec = spec_from_params(params)
    return _execute(spec, {}, Path(args.out), None, args.format)


def _cmd_figure(args) -> int:
    preset = figure_preset(args.which)
    params = spec_to_params(preset.spec)
    params["seed"] = preset.spec.master_seed
    original = dict(params)
    overridden = _apply_common_flags(params, args)
    assumed = dict(preset.assumed)
    for key, value in overridden.items():
        if original.get(key) != value:
            assumed[key] = False  # user-chosen, no longer a guessed default
    spec = spec_from_params(overridden)
    return _execute(spec, assumed, Path(args.out), args.which, args.format)


def _cmd_validate(args) -> int:
    from .validation import run_validation

    results = run_validation(quick=args.quick)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += not r.passed
        print(f"{r.name:<{width}}  {status}  [{r.seconds:6.2f}s]  {r.detail}")
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 2 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anofdm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--workers", default=None, help="worker count or 'auto'")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--config", default=None, help="TOML config or metadata.json")
        p.add_argument(
            "--override",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (repeatable)",
        )
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_run = sub.add_parser("run", help="single spec point")
    common(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep a generic axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", choices=("alpha", "N", "N_cp", "L_B", "P"))
    p_sweep.add_argument("--values", help="comma-separated sweep values")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_fig = sub.add_parser("figure", help="run a figure preset")
    common(p_fig)
    p_fig.add_argument("--which", required=True, choices=FIGURE_NAMES)
    p_fig.set_defaults(fn=_cmd_figure)

    p_val = sub.add_parser("validate", help="run the library invariant suite")
    p_val.add_argument("--quick", action="store_true", help="reduced realization counts")
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"anofdm: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help and friends
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
