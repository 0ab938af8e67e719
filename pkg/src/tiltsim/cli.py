"""``tiltsim`` command-line front end.

Exit codes: 0 success, 2 config error, 3 diverged simulation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .allocation import analyze_actuation, build_allocation
from .config import ConfigError, load_document, scenario_from_dict
from .platform import PRESETS
from .simlog import atomic_write_text, compute_metrics, delta_omega_csv_text, write_csv
from .simulation import SimulationDiverged, run_layer
from .trajectory import ManeuverPlan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _error(msg: str) -> None:
    print(f"tiltsim: error: {msg}", file=sys.stderr)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_simulate(args) -> int:
    try:
        doc = load_document(args.config)
        scenario, layer = scenario_from_dict(doc)
        if args.layer is not None:
            layer = args.layer
        if args.dt is not None:
            scenario.dt = args.dt
        if args.duration is not None:
            scenario.duration = args.duration
        layers = ["analytical", "physics"] if layer == "both" else [layer]
        # validates dt, duration and the dt guard before anything runs
        for name in layers:
            scenario.sim_config(name)
        if scenario.horizon > scenario.plan.total + 1e-9:
            raise ConfigError(
                f"duration {scenario.horizon} exceeds the maneuver length {scenario.plan.total}"
            )
    except (ConfigError, ValueError) as exc:
        _error(str(exc))
        return EXIT_CONFIG

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logs = {}
    for name in layers:
        try:
            logs[name] = run_layer(scenario, name)
        except SimulationDiverged as exc:
            _error(f"{name} layer: {exc}")
            return EXIT_DIVERGED
        write_csv(logs[name], out / f"log_{name}.csv")

    metrics = {
        "version": __version__,
        "config": str(args.config),
        "layers": {name: scenario.describe(name) for name in layers},
        "gains": scenario.gains.to_dict(),
        "mean_abs_errors": {name: compute_metrics(log) for name, log in logs.items()},
    }
    if len(logs) == 2:
        report = compute_metrics(logs["analytical"], logs["physics"])
        switches = scenario.plan.phase_switches
        comparison = report.to_dict()
        comparison["phase_switches"] = list(switches)
        comparison["max_abs_delta_omega_outside_switch_windows"] = (
            report.max_abs_delta_omega_outside(switches, 0.5).tolist()
        )
        metrics["comparison"] = comparison
        atomic_write_text(out / "comparison.json", _json(comparison))
        atomic_write_text(out / "delta_omega.csv", delta_omega_csv_text(report))
    atomic_write_text(out / "metrics.json", _json(metrics))
    print(f"wrote {', '.join(sorted(p.name for p in out.iterdir()))} to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        scenario, _ = scenario_from_dict(load_document(args.config))
    except ConfigError as exc:
        _error(str(exc))
        return EXIT_CONFIG
    model = scenario.model
    report = analyze_actuation(build_allocation(model), model)
    d = {"platform": model.name, "n": model.n, **report.to_dict()}
    for key, value in d.items():
        if isinstance(value, bool):
            value = str(value).lower()
        print(f"{key}: {value}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for pid, info in PRESETS.items():
        print(f"{pid}: {info['description']} (n = {info['n']})")
        print(f"  params: {', '.join(info['params'])}")
    print("trajectory presets:")
    print(f"  figure8_usecase: {ManeuverPlan().total:g} s takeoff / figure-eight / landing")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiltsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one or both fidelity layers")
    sim.add_argument("--config", required=True)
    sim.add_argument("--layer", choices=("analytical", "physics", "both"))
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--duration", type=float)
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="actuation analysis of a platform")
    ana.add_argument("--config", required=True)
    ana.set_defaults(func=cmd_analyze)

    pre = sub.add_parser("presets", help="list platform presets")
    pre.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
