"""Command line entry point: ``legtrainer {sweep,simulate,torque,validate}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .configio import ConfigError, RunConfig, parse_config, render_manifest
from .dynamics import DynamicsError
from .kinematics import KinematicsError
from .mechanism import validate
from .output import PLOT_KINDS, atomic_write, emit_csv, emit_plot
from .simulate import SimulationError, desired_log, run

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2
PLOTS_BY_COMMAND = {
    "sweep": ("angles", "velocities", "trace"),
    "simulate": PLOT_KINDS,
    "torque": PLOT_KINDS,
}


class InputError(Exception):
    pass


def _fail(kind: str, message: str, **fields) -> None:
    record = {"error": kind, "message": message, **fields}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def load(config_arg: str, cycles: int | None) -> tuple[RunConfig, str]:
    if config_arg == "default":
        text = ""
    else:
        try:
            text = Path(config_arg).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read config {config_arg!r}: {exc.strerror}") from None
    overrides = {}
    if cycles is not None:
        if cycles < 1:
            raise InputError(f"--cycles must be at least 1, got {cycles}")
        overrides["cycles"] = cycles
    return parse_config(text, overrides), text


def _finalize(cfg: RunConfig, command: str) -> RunConfig:
    """Pin the mode and every run-time default so the manifest is complete."""
    settings = cfg.settings
    if command == "sweep":
        w1 = settings.initial_w1
        if w1 is None:
            w1 = 2 * math.pi * settings.cycles / settings.total_time(cfg.trajectory)
        settings = replace(settings, mode="kinematic_sweep", initial_w1=w1)
    else:
        if settings.initial_w1 is None:
            settings = replace(settings, initial_w1=0.0)
        settings = replace(settings, mode="closed_loop")
    values = dict(cfg.values, initial_w1=settings.initial_w1)
    return replace(cfg, settings=settings, values=values)


def execute(command: str, cfg: RunConfig, out: Path, csv: bool, svg: bool, config_text: str) -> None:
    cfg = _finalize(cfg, command)
    if command == "torque":
        log = desired_log(cfg.mechanism, cfg.trajectory, cfg.settings.dt, cfg.settings.cycles)
    else:
        log = run(cfg.mechanism, cfg.settings, cfg.trajectory, cfg.gains)

    out.mkdir(parents=True, exist_ok=True)
    header = {
        "tool": f"legtrainer {__version__}",
        "command": command,
        "mode": cfg.settings.mode if command != "torque" else "inverse_dynamics",
        "config sha256": hashlib.sha256(config_text.encode("utf-8")).hexdigest(),
    }
    atomic_write(out / "config.txt", config_text.encode("utf-8"))
    atomic_write(out / "manifest.txt", render_manifest(cfg, header).encode("utf-8"))
    if csv:
        emit_csv(log, out / "log.csv")
    if svg:
        for kind in PLOTS_BY_COMMAND[command]:
            emit_plot(log, kind, out / f"{kind}.svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="legtrainer", description="Leg-trainer linkage simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "turn the crank kinematically and trace the knee and ankle",
        "simulate": "closed-loop computed-torque tracking of the crank trajectory",
        "torque": "feed-forward motor torque along the trajectory",
        "validate": "check the configuration only",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default="default", help="config file, or 'default'")
        if name != "validate":
            p.add_argument("--out", default="legtrainer_out", type=Path, help="output directory")
            p.add_argument("--csv", action="store_true", help="write log.csv")
            p.add_argument("--svg", action="store_true", help="write SVG plots")
            p.add_argument("--cycles", type=int, help="number of trajectory cycles")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, text = load(args.config, getattr(args, "cycles", None))
        diagnostics = validate(cfg.mechanism)
        if diagnostics:
            _fail("input", diagnostics[0], diagnostics=diagnostics)
            return EXIT_INPUT
    except ConfigError as exc:
        _fail("input", str(exc), line=exc.line)
        return EXIT_INPUT
    except InputError as exc:
        _fail("input", str(exc))
        return EXIT_INPUT

    if args.command == "validate":
        print("valid")
        return EXIT_OK

    csv, svg = args.csv, args.svg
    if not (csv or svg):
        csv = svg = True
    try:
        execute(args.command, cfg, args.out, csv, svg, text)
    except (SimulationError, KinematicsError, DynamicsError) as exc:
        _fail("runtime", str(exc), step=getattr(exc, "step", None))
        return EXIT_RUNTIME
    except OSError as exc:
        _fail("input", f"cannot write output: {exc}")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
