"""Command-line front end: subcommand dispatch, CSV emission, run manifests.

Config precedence (lowest to highest): built-in defaults, JSON config file,
preset, explicit CLI flags. Every output CSV gets a sibling
``<out>.manifest.json`` recording the fully resolved config; re-running with
``--config <manifest>`` reproduces the output bit-exactly. The manifest
timestamp honours ``SOURCE_DATE_EPOCH`` so whole runs can be made
byte-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .experiments import (CampaignConfig, ExperimentReport, PRESETS, QGrid,
                          estimate_q, filter_stream, simulate_trajectory,
                          sweep_particles, sweep_q, trajectory_stream)
from .filtering import FilterConfig, run_filter
from .metrics import rms_discrepancy, rmse
from .models import MODEL_NAMES, make_model

REPORT_COLUMNS = {
    "sweep-q": ("q_prop", "mean_rmse", "se_rmse", "mean_rmsd", "se_rmsd",
                "mean_ess", "mean_unique_frac", "trials", "seed"),
    "sweep-particles": ("n_particles", "q_prop", "mean_rmse", "se_rmse",
                        "mean_rmsd", "se_rmsd", "mean_ess", "mean_unique_frac",
                        "trials", "seed"),
}

_DEFAULTS = {
    "model": "ungm",
    "seed": 0,
    "trials": 500,
    "horizon": 1000,
    "n_particles": 50,
    "q_true": 1.0,
    "q_prop": 1.0,
    "r": 1.0,
    "q_grid": "0.5:4.0:0.1",
    "n_list": "20,30,40,50,60,80,100",
    "q_prop_list": "1.0,1.1,1.2,1.5",
    "resampler": "systematic",
    "roughening": "direct",
    "sigma_r": 0.0,
    "fixed_trajectory": False,
    "workers": None,
    "out": None,
    "input": None,
}


class CliError(Exception):
    """Invalid configuration or I/O failure; exits with status 1."""


def _fmt(value) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_report_csv(report: ExperimentReport, path: str) -> None:
    """Write a sweep report with a fixed column order at 17 significant digits."""
    columns = REPORT_COLUMNS[report.kind]
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in report.rows:
                writer.writerow([_fmt(getattr(row, col)) for col in columns])
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def read_report_csv(path: str) -> tuple[tuple[str, ...], list[dict]]:
    """Parse a report CSV back into (columns, rows of converted values)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        rows = []
        for raw in reader:
            row = {}
            for col, text in zip(header, raw):
                row[col] = int(text) if col in ("n_particles", "trials",
                                                "seed") else float(text)
            rows.append(row)
    return header, rows


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = float(epoch) if epoch is not None else time.time()
    return datetime.fromtimestamp(moment, tz=timezone.utc).isoformat()


def _write_manifest(subcommand: str, cfg: dict, out_path: str,
                    extra: dict | None = None) -> str:
    manifest = {
        "tool": "sirpf",
        "version": __version__,
        "subcommand": subcommand,
        "master_seed": cfg["seed"],
        "timestamp": _timestamp(),
        "config": cfg,
        "outputs": [out_path],
    }
    if extra:
        manifest.update(extra)
    path = out_path + ".manifest.json"
    try:
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc
    return path


def _parse_grid(text: str) -> QGrid:
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise CliError(f"bad grid {text!r}; expected start:stop:step") from None
    return QGrid(start, stop, step)


def _parse_list(text: str, kind) -> tuple:
    try:
        return tuple(kind(part) for part in str(text).split(",") if part != "")
    except ValueError:
        raise CliError(f"bad list {text!r}") from None


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    if "config" in data and "subcommand" in data:  # manifest re-run
        data = data["config"]
    unknown = set(data) - set(_DEFAULTS) - {"preset"}
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _resolve(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    file_cfg = _load_config_file(args.config) if args.config else {}
    preset = getattr(args, "preset", None) or file_cfg.pop("preset", None)
    cfg.update(file_cfg)
    if preset:
        if preset not in PRESETS:
            raise CliError(f"unknown preset {preset!r}")
        cfg.update(PRESETS[preset])
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["model"] not in MODEL_NAMES:
        raise CliError(f"unknown model {cfg['model']!r}; "
                       f"choose from {', '.join(MODEL_NAMES)}")
    if cfg["out"] is None:
        raise CliError("--out is required")
    return cfg


def _campaign(cfg: dict) -> CampaignConfig:
    try:
        return CampaignConfig(
            model=cfg["model"], q_true=float(cfg["q_true"]), r=float(cfg["r"]),
            horizon=int(cfg["horizon"]), trials=int(cfg["trials"]),
            master_seed=int(cfg["seed"]), n_particles=int(cfg["n_particles"]),
            n_list=_parse_list(cfg["n_list"], int),
            q_prop_list=_parse_list(cfg["q_prop_list"], float),
            q_grid=_parse_grid(cfg["q_grid"]),
            resampler=cfg["resampler"], roughening=cfg["roughening"],
            sigma_r=float(cfg["sigma_r"]),
            fixed_trajectory=bool(cfg["fixed_trajectory"]),
            workers=int(cfg["workers"]) if cfg["workers"] else None,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _cmd_simulate(cfg: dict) -> int:
    model = make_model(cfg["model"], q_true=float(cfg["q_true"]),
                       r=float(cfg["r"]))
    stream = trajectory_stream(int(cfg["seed"]), trial_index=0)
    try:
        xs, ys = simulate_trajectory(model, model.q_true, int(cfg["horizon"]),
                                     stream)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    try:
        with open(cfg["out"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("k", "x_true", "y"))
            for k, (x, y) in enumerate(zip(xs, ys), start=1):
                writer.writerow((k, _fmt(x), _fmt(y)))
    except OSError as exc:
        raise CliError(f"cannot write {cfg['out']}: {exc}") from exc
    _write_manifest("simulate", cfg, cfg["out"])
    return 0


def _cmd_filter(cfg: dict) -> int:
    if not cfg["input"]:
        raise CliError("--in is required for the filter subcommand")
    try:
        with open(cfg["input"], newline="") as fh:
            reader = csv.DictReader(fh)
            ks, xs, ys = [], [], []
            for row in reader:
                ks.append(int(row["k"]))
                ys.append(float(row["y"]))
                if "x_true" in row:
                    xs.append(float(row["x_true"]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"cannot read trajectory {cfg['input']}: {exc}") from exc
    if not ys:
        raise CliError(f"trajectory {cfg['input']} has no rows")

    model = make_model(cfg["model"], q_true=float(cfg["q_true"]),
                       r=float(cfg["r"]))
    try:
        fc = FilterConfig(n_particles=int(cfg["n_particles"]),
                          q_prop=float(cfg["q_prop"]),
                          resampler=cfg["resampler"],
                          roughening=cfg["roughening"],
                          sigma_r=float(cfg["sigma_r"]))
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    stream = filter_stream(int(cfg["seed"]), fc.n_particles, fc.q_prop,
                           trial_index=0)
    out = run_filter(model, fc, np.asarray(ys), stream)

    try:
        with open(cfg["out"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("k", "estimate", "ess", "unique_ancestors"))
            for k, est, e, u in zip(ks, out.estimates, out.ess,
                                    out.unique_ancestors):
                writer.writerow((k, _fmt(est), _fmt(e), int(u)))
    except OSError as exc:
        raise CliError(f"cannot write {cfg['out']}: {exc}") from exc

    summary = {"rmsd": rms_discrepancy(ys, out.predicted_observations),
               "weight_underflows": out.weight_underflows}
    if xs:
        summary["rmse"] = rmse(xs, out.estimates)
    _write_manifest("filter", cfg, cfg["out"], {"summary": summary})
    return 0


def _cmd_sweep_particles(cfg: dict) -> int:
    report = sweep_particles(_campaign(cfg))
    write_report_csv(report, cfg["out"])
    _write_manifest("sweep-particles", cfg, cfg["out"])
    return 0


def _cmd_sweep_q(cfg: dict) -> int:
    report = sweep_q(_campaign(cfg))
    write_report_csv(report, cfg["out"])
    _write_manifest("sweep-q", cfg, cfg["out"])
    return 0


def _cmd_estimate_q(cfg: dict) -> int:
    result = estimate_q(_campaign(cfg))
    write_report_csv(result.report, cfg["out"])
    _write_manifest("estimate-q", cfg, cfg["out"],
                    {"q_hat": result.q_hat})
    print(f"q_hat = {_fmt(result.q_hat)}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "filter": _cmd_filter,
    "sweep-particles": _cmd_sweep_particles,
    "sweep-q": _cmd_sweep_q,
    "estimate-q": _cmd_estimate_q,
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=MODEL_NAMES, default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed (64-bit unsigned)")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument("--horizon", type=int, default=None,
                        help="number of time steps per trajectory")
    parser.add_argument("--n-particles", dest="n_particles", type=int,
                        default=None)
    parser.add_argument("--q-true", dest="q_true", type=float, default=None,
                        help="transition-noise variance driving the simulation")
    parser.add_argument("--q-prop", dest="q_prop", type=float, default=None,
                        help="propagation variance the filter uses")
    parser.add_argument("--r", type=float, default=None,
                        help="observation-noise variance")
    parser.add_argument("--q-grid", dest="q_grid", default=None,
                        metavar="START:STOP:STEP")
    parser.add_argument("--n-list", dest="n_list", default=None,
                        metavar="N1,N2,...")
    parser.add_argument("--q-prop-list", dest="q_prop_list", default=None,
                        metavar="Q1,Q2,...")
    parser.add_argument("--resampler", choices=("multinomial", "systematic"),
                        default=None)
    parser.add_argument("--roughening", choices=("none", "direct", "separate"),
                        default=None)
    parser.add_argument("--sigma-r", dest="sigma_r", type=float, default=None,
                        help="separate-roughening jitter variance")
    parser.add_argument("--fixed-trajectory", dest="fixed_trajectory",
                        action="store_true", default=None,
                        help="reuse trial 0's trajectory for every trial")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel trial workers (results are identical "
                             "for any worker count)")
    parser.add_argument("--preset", choices=tuple(PRESETS), default=None)
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--config", default=None,
                        help="JSON config file or a previously written manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirpf",
        description="Bootstrap SIR particle filter experiment harness")
    parser.add_argument("--version", action="version",
                        version=f"sirpf {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    descriptions = {
        "simulate": "simulate one trajectory and write k,x_true,y",
        "filter": "run one filter over a trajectory CSV",
        "sweep-particles": "mean RMSE/RMSD per (particle count, q_prop) pair",
        "sweep-q": "mean RMSE/RMSD per propagation variance on a grid",
        "estimate-q": "sweep the grid and report the RMSD-minimizing variance",
    }
    for name, text in descriptions.items():
        sp = sub.add_parser(name, help=text)
        _add_common_flags(sp)
        if name == "filter":
            sp.add_argument("--in", dest="input", default=None,
                            help="trajectory CSV from the simulate subcommand")
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.subcommand](cfg)
    except CliError as exc:
        print(f"sirpf: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
