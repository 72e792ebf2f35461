"""Command-line entry point: ``qaoa-ising --experiment NAME [--config FILE] [--seed S] [--out DIR]``.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import sys

from .experiments import EXPERIMENTS, OUT_ENV, ConfigError, load_config, run

log = logging.getLogger("qaoa_ising")


def _overrides(pairs):
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qaoa-ising", description=__doc__.splitlines()[0])
    ap.add_argument("--experiment", choices=EXPERIMENTS, help="experiment to run (overrides [run] experiment)")
    ap.add_argument("--config", help="INI file with a [run] section and one section per experiment")
    ap.add_argument("--seed", type=int, help="random seed (mandatory for stochastic experiments)")
    ap.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./results)")
    ap.add_argument("--threads", type=int, help="worker processes; changes wall time only")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one experiment parameter")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.experiment, args.seed, args.out, args.threads, _overrides(args.set))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    # the timestamp lives in the log only; output files stay byte-reproducible
    log.info("run %s config_hash=%s started %s", cfg.experiment, cfg.config_hash,
             datetime.datetime.now(datetime.timezone.utc).isoformat())
    result = run(cfg)
    for path in result["files"]:
        print(path)
    if cfg.experiment == "validate" and not result["ok"]:
        for c in result["checks"]:
            if not c["passed"]:
                print(f"FAILED {c['name']}: max_error={c['max_error']:.3e} tol={c['tol']:.1e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
