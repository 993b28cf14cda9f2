"""Command-line experiment runner.

Subcommands: solve / probe / diagnose / sweep take a YAML config (or a
bundled scenario name prefixed with '@'); `scenarios` lists or shows the
bundled configurations.  Exit codes: 0 on success (including scientific
non-convergence), 2 on configuration errors, 3 on numerical hard errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .config import ConfigError, load_config, parse_config
from .hjb import SolverError
from .runner import run_experiment
from .scenarios import bundled_scenarios, scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _load(source: str):
    if source.startswith("@"):
        try:
            return parse_config(scenario(source[1:]))
        except KeyError as exc:
            raise ConfigError(str(exc))
    return load_config(source)


def _apply_flags(config, args):
    tree = config.raw
    if args.seed is not None:
        tree["seed"] = args.seed
        if "seed" in tree.get("task", {}):
            tree["task"]["seed"] = args.seed
    if args.snapshot_every is not None:
        tree["snapshot_every"] = args.snapshot_every
    return parse_config(tree)


def _force_task(config, kind: str, extra=None):
    tree = config.raw
    if tree.get("task", {}).get("kind") != kind:
        tree["task"] = {"kind": kind, **(extra or {})}
    return parse_config(tree)


def _run(config, args) -> int:
    out = Path(args.out)
    try:
        manifest = run_experiment(config, out, workers=args.workers)
    except SolverError as exc:
        failure = {"schema_version": 1, "config": config.raw,
                   "config_hash": config.config_hash(),
                   "task": config.task["kind"],
                   "error": str(exc)}
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(json.dumps(failure, indent=2,
                                                      sort_keys=True) + "\n")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    run = manifest.get("run")
    if run is not None:
        state = "converged" if run["converged"] else "did not converge"
        print(f"{state} after {run['iterations']} iterations "
              f"(residual {run['residual']:.3e})")
    if "multistart" in manifest:
        ms = manifest["multistart"]
        print(f"multistart: {ms['n_converged']}/{ms['n_starts']} converged, "
              f"max pairwise distance {ms['max_pairwise_distance']}, "
              f"verdict: {ms['verdict']}")
    if "sweep" in manifest:
        sw = manifest["sweep"]
        for v, psi, conv in zip(sw["values"], sw["psi"], sw["converged"]):
            print(f"{sw['parameter']} = {v}: psi = {psi:.6g}, "
                  f"converged = {conv}")
    if "mms" in manifest:
        mms = manifest["mms"]
        print("temporal orders:", [f"{o:.3f}" for o in mms["temporal"]["orders"]])
        print("spatial orders:", [f"{o:.3f}" for o in mms["spatial"]["orders"]])
    print(f"manifest written to {out / 'manifest.json'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mfgkit",
        description="Mean field game solver and uniqueness probes")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="YAML config path or @scenario-name")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--snapshot-every", type=int, default=None)
        return p

    add_run_command("solve", "solve the coupled system by damped fixed point")
    add_run_command("probe", "multistart uniqueness probe")
    add_run_command("diagnose", "solve and compute the certificate report")
    add_run_command("sweep", "parameter sweep with per-run diagnostics")

    p_sc = sub.add_parser("scenarios", help="list or show bundled scenarios")
    p_sc.add_argument("action", choices=["list", "show"])
    p_sc.add_argument("name", nargs="?")

    args = parser.parse_args(argv)

    if args.command == "scenarios":
        if args.action == "list":
            for name in bundled_scenarios():
                print(name)
            return EXIT_OK
        if not args.name:
            print("scenarios show requires a name", file=sys.stderr)
            return EXIT_CONFIG
        try:
            print(yaml.safe_dump(scenario(args.name), sort_keys=False), end="")
        except KeyError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        config = _load(args.config)
        config = _apply_flags(config, args)
        if args.command == "probe":
            config = _force_task(config, "multistart",
                                 {"n_starts": 4, "seed": config.seed})
        elif args.command == "sweep":
            if config.task["kind"] != "sweep":
                raise ConfigError("task.kind: sweep command requires a "
                                  "sweep task in the config")
        elif args.command == "diagnose":
            config = _force_task(config, "diagnose")
        elif args.command == "solve" and config.task["kind"] not in (
                "solve", "mms"):
            config = _force_task(config, "solve")
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _run(config, args)


if __name__ == "__main__":
    sys.exit(main())
