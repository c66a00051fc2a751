"""Command-line front end.

Every subcommand writes ``results.csv`` and ``manifest.json`` into ``--out``.
Exit status is 0 on success, 1 when a validation check fails and 2 for
usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, parse_config
from .quadrature import QuadratureError
from .simulation import bound_report, sweep

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE = 0, 1, 2

SWEEP_COLUMNS = ("axis_value", "mean_rate", "stderr", "trials",
                 "bound_theorem1", "bound_limit")
BOUND_COLUMNS = ("finite_surface", "high_power", "ue_hwi", "bs_hwi", "pse",
                 "ue_hwi_limit", "bs_hwi_limit", "pse_limit",
                 "infinite_surface", "zeta", "epsilon")
VALIDATE_COLUMNS = ("check", "value", "tolerance", "passed")

DEFAULT_VALUES = {
    "sweep-power": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    "sweep-density": [2.5e-4, 5e-4, 1e-3, 2e-3, 4e-3],
    "sweep-elements": [8, 16, 32, 64],
}
SWEEP_AXIS = {"sweep-power": "power", "sweep-density": "density",
              "sweep-elements": "elements"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x):
    """17-significant-digit text; infinities are left blank."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{x:.17g}" if math.isfinite(x) else ""


def _values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat JSON config file")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (default: current)")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker threads; results do not depend on it")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="rhscellfree",
                     description="RHS-aided cell-free uplink simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SWEEP_AXIS:
        p = sub.add_parser(name, parents=[common], help=f"{name.split('-')[1]} sweep")
        p.add_argument("--values", type=_values,
                       help="comma-separated axis values"
                            + (" in dB" if name == "sweep-power" else ""))
    sub.add_parser("bounds", parents=[common], help="closed-form bounds only")
    sub.add_parser("validate", parents=[common], help="run the self-checks")
    return parser


def _overrides(args):
    out = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    if args.seed is not None:
        out["seed"] = args.seed
    if args.trials is not None:
        out["trials"] = args.trials
    return out


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


def _run_sweep(command, config, args):
    values = args.values or DEFAULT_VALUES[command]
    result = sweep(config, SWEEP_AXIS[command], values, jobs=args.jobs)
    rows = [dict(axis_value=p.axis_value, mean_rate=p.mean_rate, stderr=p.stderr,
                 trials=p.trials, bound_theorem1=p.sum_rate_bound,
                 bound_limit=p.bound_limit) for p in result.points]
    return SWEEP_COLUMNS, rows, EXIT_OK


def _run_bounds(config, args):
    r = bound_report(config)
    s = r.special
    row = dict(finite_surface=r.finite_surface, high_power=r.high_power,
               ue_hwi=s.ue_hwi, bs_hwi=s.bs_hwi, pse=s.pse, ue_hwi_limit=s.ue_hwi_limit,
               bs_hwi_limit=s.bs_hwi_limit, pse_limit=s.pse_limit,
               infinite_surface=r.infinite_surface, zeta=r.zeta, epsilon=r.epsilon)
    return BOUND_COLUMNS, [row], EXIT_OK


def _run_validate(config, args):
    from .validation import format_report, run_validation

    checks = run_validation(config)
    print(format_report(checks))
    rows = [dict(check=c.name, value=c.value, tolerance=c.tolerance, passed=c.passed)
            for c in checks]
    status = EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION
    return VALIDATE_COLUMNS, rows, status


def run_command(command, config, args):
    """Run one subcommand and write its artifacts; returns the exit status."""
    started = datetime.now(timezone.utc).isoformat()
    if command in SWEEP_AXIS:
        columns, rows, status = _run_sweep(command, config, args)
    elif command == "bounds":
        columns, rows, status = _run_bounds(config, args)
    else:
        columns, rows, status = _run_validate(config, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "results.csv", columns, rows)
    manifest = {
        "tool": "rhscellfree",
        "version": __version__,
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.digest(),
        "seed": config.seed,
        "trial_range": [0, config.trials] if command in SWEEP_AXIS else None,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "exit_status": status,
        "results": [{k: _jsonable(v) for k, v in r.items()} for r in rows],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return status


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        config = parse_config(args.config, _overrides(args))
        return run_command(args.command, config, args)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"rhscellfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, QuadratureError) as exc:
        print(f"rhscellfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
