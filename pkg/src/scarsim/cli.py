"""Command-line entry point: `scarsim run <config-file>`.

The config file is flat `key = value` text.  Command-line overrides are
applied on top of it: `--set key=value` first, then the dedicated flags
(`--experiment`, `--output-dir`, `--cache-dir`, `--threads`), which win.
Exit status: 0 on success (for the verify experiment, only when every
check passes), 1 on configuration problems or failed checks, 2 when a
requested size exceeds a hard capacity limit.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import parse_int, read_kv_file
from .errors import CapacityError, ConfigError
from .experiments import CONFIG_FIELDS, EXTRA_KEYS, RUNNERS, run_experiment

CONTROL_KEYS = ("experiment", "output_dir", "cache_dir", "threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scarsim",
        description="Scarred spin-1 lattice experiments: spectra, "
                    "quench dynamics, echo metrology, and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment from a config "
                                       "file")
    run_p.add_argument("config", help="flat `key = value` config file")
    run_p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="overrides",
                       help="override a config entry (repeatable)")
    run_p.add_argument("--experiment", help="experiment name (overrides "
                                            "the config file)")
    run_p.add_argument("--output-dir", help="directory for CSV and "
                                            "metadata output")
    run_p.add_argument("--cache-dir", help="cache directory (default: "
                                           "$SCARSIM_CACHE_DIR or "
                                           "~/.cache/scarsim)")
    run_p.add_argument("--threads", type=int,
                       help="max concurrent parameter points")
    return parser


def resolve_run_config(args) -> dict[str, str]:
    mapping = read_kv_file(args.config)
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        mapping[key.strip()] = value.strip()
    if args.experiment is not None:
        mapping["experiment"] = args.experiment
    if args.output_dir is not None:
        mapping["output_dir"] = args.output_dir
    if args.cache_dir is not None:
        mapping["cache_dir"] = args.cache_dir
    if args.threads is not None:
        mapping["threads"] = str(args.threads)
    return mapping


def validate_run_config(mapping: dict[str, str]):
    """Split the flat mapping into (experiment, params, control values)."""
    if "experiment" not in mapping:
        raise ConfigError("missing config key 'experiment'")
    experiment = mapping["experiment"]
    if experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from "
                          + ", ".join(sorted(RUNNERS)))
    allowed = set(CONFIG_FIELDS) | EXTRA_KEYS[experiment]
    params = {}
    for key, value in mapping.items():
        if key in CONTROL_KEYS:
            continue
        if key not in allowed:
            raise ConfigError(f"unknown config key {key!r} for experiment "
                              f"{experiment}")
        params[key] = value
    threads = parse_int(mapping.get("threads", "1"))
    if threads < 1:
        raise ConfigError("config key 'threads' must be a positive integer")
    out_dir = mapping.get("output_dir", ".")
    cache_dir = mapping.get("cache_dir")
    return experiment, params, out_dir, cache_dir, threads


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        mapping = resolve_run_config(args)
        experiment, params, out_dir, cache_dir, threads = \
            validate_run_config(mapping)
        ok, files = run_experiment(experiment, params, out_dir,
                                   cache_dir=cache_dir, threads=threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity limit: {exc}", file=sys.stderr)
        print("Reduce N (or the boson cutoff), or pick a backend suited "
              "to larger systems where the experiment supports one.",
              file=sys.stderr)
        return 2
    for path in files:
        print(path)
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
