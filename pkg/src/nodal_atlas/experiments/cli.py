"""Command line entry point: ``nodal-atlas <experiment> --config f.json``.

Exit codes: 0 when every report item passes, 1 when any item fails, 2 for
configuration errors (unknown experiment, invalid config, missing preset).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError, InputError
from .common import log, setup_logging
from .runner import REGISTRY, experiment_kind, load_config, run_experiment

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser():
    p = argparse.ArgumentParser(prog="nodal-atlas", description="Run a numerical experiment and write its report.")
    p.add_argument("experiment", help=f"one of: {', '.join(sorted(REGISTRY))}")
    p.add_argument("--config", required=True, help="JSON config file or the name of a shipped config")
    p.add_argument("--out", default=None, help="output directory (overrides the config's output_dir)")
    p.add_argument("--dry-run", action="store_true", help="validate and print the plan without computing")
    p.add_argument("--quiet", action="store_true", help="only log warnings")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging(30 if args.quiet else 20)
    try:
        if args.experiment not in REGISTRY:
            raise ConfigError(f"unknown experiment {args.experiment!r}; registered: {sorted(REGISTRY)}")
        cfg = load_config(args.config)
        kind = experiment_kind(cfg)
        if kind != args.experiment:
            raise ConfigError(f"config {cfg.name!r} is for experiment {kind!r}, not {args.experiment!r}")
        out = Path(args.out if args.out is not None else cfg.output_dir)
        rep = run_experiment(cfg, dry_run=args.dry_run, out_dir=out, kind=kind)
    except ConfigError as exc:
        log("config-error", message=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        log("input-error", message=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dry_run:
        import json
        print(json.dumps(rep.info, indent=2, sort_keys=True, default=str))
        return EXIT_PASS
    rep.write(out)
    log("written", out=str(out), tables=len(rep.tables), passed=rep.passed)
    for it in rep.items:
        print(f"{'PASS' if it.passed else 'FAIL'} {it.id} value={it.value} threshold={it.threshold}"
              + (f" status={it.status}" if it.status else ""))
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
