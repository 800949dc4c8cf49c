#!/usr/bin/env python3
"""Variance-grid sweep at 50 particles, the variance estimate, and the figure.

Paper-scale by default (500 trials, 1000 steps, grid 0.5:4.0:0.1); pass
--preset ci for a quick desk-scale pass. Output lands in --out-dir as
sweep_q.csv, its manifest (which records q_hat), and fig2.svg.
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
    csv_path = out_dir / "sweep_q.csv"

    cli_args = ["estimate-q", "--preset", args.preset,
                "--seed", str(args.seed),
                "--n-particles", "50", "--q-grid", "0.5:4.0:0.1",
                "--out", str(csv_path)]
    if args.workers:
        cli_args += ["--workers", str(args.workers)]
    code = dispatch(cli_args)
    if code != 0:
        return code

    return subprocess.call([sys.executable, str(ROOT / "plots" / "render"),
                            "--kind", "fig2", "--in", str(csv_path),
                            "--out", str(out_dir / "fig2.svg")])


if __name__ == "__main__":
    sys.exit(main())
