#!/usr/bin/env python3
"""Particle-count sweep at four propagation variances, plus the figure.

Paper-scale by default (500 trials, 1000 steps); pass --preset ci for a
quick desk-scale pass. Output lands in --out-dir as sweep_particles.csv,
its manifest, and fig1.svg.
"""

import argparse
import pathlib
import subprocess
import sys

from sirpf.cli import dispatch

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", choices=("ci", "paper"), default="paper")
    parser.add_argument("--seed", type=int, default=77)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep_particles.csv"

    cli_args = ["sweep-particles", "--preset", args.preset,
                "--seed", str(args.seed),
                "--n-list", "20,30,40,50,60,80,100",
                "--q-prop-list", "1.0,1.1,1.2,1.5",
                "--out", str(csv_path)]
    if args.workers:
        cli_args += ["--workers", str(args.workers)]
    code = dispatch(cli_args)
    if code != 0:
        return code

    return subprocess.call([sys.executable, str(ROOT / "plots" / "render"),
                            "--kind", "fig1", "--in", str(csv_path),
                            "--out", str(out_dir / "fig1.svg")])


if __name__ == "__main__":
    sys.exit(main())
