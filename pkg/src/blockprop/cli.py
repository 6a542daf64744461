"""Command-line entry point: ``blockprop <subcommand> [--config F] [--out D] ...``.

Values resolve as preset defaults, then config-file keys, then flags.
Exit codes: 0 success, 1 invalid input, 2 failure while running.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .experiments import (
    ExperimentKind,
    default_spec,
    list_experiments,
    preset,
    run_experiment,
    validate_spec,
)
from .params import ParameterError, load_config

log = logging.getLogger("blockprop")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

SUBCOMMANDS = {
    "aobi-sweep": ExperimentKind.AOBI_SWEEP,
    "epidemic": ExperimentKind.EPIDEMIC_RUN,
    "steady-state": ExperimentKind.STEADY_STATE_SURFACE,
    "evogame": ExperimentKind.GAME_PORTRAIT,
    "abm": ExperimentKind.ABM_RUN,
    "compare": ExperimentKind.MECHANISM_COMPARE,
}


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--seeds expects comma-separated integers, got {text!r}") from exc


def _decode(value):
    """Config strings may hold JSON (lists, objects) or comma-separated numbers."""
    if not isinstance(value, str):
        return value
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        pass
    if "," in value:
        try:
            return [float(v) for v in value.split(",") if v.strip()]
        except ValueError:
            pass
    return value


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="flat key = value or JSON file")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seeds", type=_seed_list, help="comma-separated seeds, e.g. 0,1,2")
    p.add_argument("--step", type=float, help="integration step")
    p.add_argument("--horizon", type=float, help="integration horizon")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockprop",
                                     description="Block propagation models and experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in SUBCOMMANDS.items():
        _common(sub.add_parser(name, help=f"run a {kind.value} experiment"))
    pp = sub.add_parser("preset", help="run a named preset")
    pp.add_argument("name")
    _common(pp)
    sub.add_parser("list", help="list presets")
    return parser


def resolve_spec(args: argparse.Namespace):
    if args.command == "preset":
        spec = preset(args.name, args.out)
    else:
        spec = default_spec(SUBCOMMANDS[args.command], args.out)
    if args.config is not None:
        try:
            cfg = {k: _decode(v) for k, v in load_config(args.config).items()}
        except OSError as exc:
            raise ParameterError("config", f"cannot read {args.config}: {exc}") from exc
        seeds = cfg.pop("seeds", None)
        if seeds is not None:
            spec.seeds = [int(s) for s in (seeds if isinstance(seeds, list) else [seeds])]
        if "vary" in cfg or any(k in spec.parameters.get("vary", {}) for k in cfg):
            spec.parameters.pop("vary", None)
        spec.parameters.update(cfg)
    if args.seeds is not None:
        spec.seeds = args.seeds
    if args.step is not None:
        spec.parameters["step"] = args.step
    if args.horizon is not None:
        spec.parameters["horizon"] = args.horizon
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; that is an input problem here
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.command == "list":
        for name, desc in list_experiments().items():
            print(f"{name:18s} {desc}")
        return EXIT_OK
    try:
        spec = resolve_spec(args)
        validate_spec(spec)
    except (ParameterError, ValueError, KeyError, TypeError) as exc:
        log.error("invalid experiment: %s", exc)
        return EXIT_INVALID
    log.info("running %s (%s) -> %s", spec.name, spec.kind.value, spec.output_dir)
    try:
        manifest = run_experiment(spec)
    except ParameterError as exc:
        log.error("invalid experiment: %s", exc)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any model failure is a runtime failure
        log.error("run failed: %s", exc)
        return EXIT_RUNTIME
    for f in manifest["files"]:
        log.info("wrote %s", Path(spec.output_dir) / f)
    log.info("done in %.2f s", manifest["wall_time_s"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
