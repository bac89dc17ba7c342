"""Command line entry point.

    mhdlab <simulate|measure-smoothing|contraction|scaling|algebra-suite> --config PATH
           [--out DIR] [--seed N] [--grid N] [--threads K]

Exit codes: 0 pass, 2 configuration error, 3 divergence, 4 tolerance failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import scipy.fft as sfft

from .config import KINDS, ConfigError, load_config
from .experiments import EXIT_CONFIG, run_experiment


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mhdlab", description="Spectral MHD laboratory on the periodic torus.")
    ap.add_argument("experiment", choices=KINDS)
    ap.add_argument("--config", required=True, help="INI experiment file")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--seed", type=int, help="overrides [data] seed")
    ap.add_argument("--grid", type=int, help="grid points per side (overrides [grid] n)")
    ap.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, n=args.grid, out=args.out, kind=args.experiment)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except ConfigError as exc:
        print(f"mhdlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out)
    start = time.perf_counter()
    with sfft.set_workers(args.threads):
        code, manifest = run_experiment(cfg, out)
    (out / "timing.json").write_text(json.dumps({"wall_seconds": time.perf_counter() - start}) + "\n")
    print(f"{cfg.kind}: {manifest['status']} (exit {code}) -> {out / 'manifest.json'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
