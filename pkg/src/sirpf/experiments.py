"""Trajectory simulation, Monte Carlo campaigns, and the two parameter sweeps.

Seed discipline: trial j's trajectory stream is keyed by (master seed, j)
only, so every sweep row filters the same fresh-per-trial realizations
(common random numbers; configuration comparisons are paired). The filter
stream is keyed by the row's *identity* (particle count and the bit pattern
of the propagation variance), never by its position, so adding rows to a
campaign cannot perturb existing rows. Trials are independent and are
aggregated in trial-index order, so reports are bit-identical regardless of
worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .filtering import FilterConfig, run_filter
from .metrics import rms_discrepancy, rmse
from .models import StateSpaceModel, make_model
from .sampling import RandomStream, derive_trial_seed

__all__ = [
    "QGrid",
    "CampaignConfig",
    "TrialAggregate",
    "ReportRow",
    "ExperimentReport",
    "PRESETS",
    "simulate_trajectory",
    "trajectory_stream",
    "filter_stream",
    "trial_streams",
    "run_trials",
    "sweep_particles",
    "sweep_q",
    "estimate_q",
    "EstimateQResult",
    "rmsd_argmin",
]

_TRAJECTORY_TAG = 0
_FILTER_TAG = 1

PRESETS = {
    "ci": {"trials": 50, "horizon": 500},
    "paper": {"trials": 500, "horizon": 1000},
}


@dataclass(frozen=True)
class QGrid:
    """Inclusive variance grid; values are start + i*step (no accumulation)."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"grid step must be > 0, got {self.step}")
        if self.start > self.stop:
            raise ValueError("grid start must be <= stop")
        if self.start < 0:
            raise ValueError("grid values must be >= 0")

    def values(self) -> list[float]:
        n = int(round((self.stop - self.start) / self.step)) + 1
        return [self.start + i * self.step for i in range(n)]


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a sweep needs; defaults follow the full-scale profile."""

    model: str = "ungm"
    q_true: float = 1.0
    r: float = 1.0
    horizon: int = 1000
    trials: int = 500
    master_seed: int = 0
    n_particles: int = 50
    n_list: tuple[int, ...] = (20, 30, 40, 50, 60, 80, 100)
    q_prop_list: tuple[float, ...] = (1.0, 1.1, 1.2, 1.5)
    q_grid: QGrid = field(default_factory=lambda: QGrid(0.5, 4.0, 0.1))
    resampler: str = "systematic"
    roughening: str = "direct"
    sigma_r: float = 0.0
    resample_every_step: bool = True
    fixed_trajectory: bool = False
    workers: int | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ValueError("n_list must be a non-empty list of positive counts")
        if not self.q_prop_list or any(q < 0 for q in self.q_prop_list):
            raise ValueError("q_prop_list must be non-empty and non-negative")

    def build_model(self) -> StateSpaceModel:
        return make_model(self.model, q_true=self.q_true, r=self.r)

    def filter_template(self, n_particles: int, q_prop: float) -> FilterConfig:
        return FilterConfig(n_particles=n_particles, q_prop=q_prop,
                            resampler=self.resampler,
                            roughening=self.roughening, sigma_r=self.sigma_r,
                            resample_every_step=self.resample_every_step)


@dataclass
class TrialAggregate:
    """Mean and standard error of both metrics, plus diagnostics, over trials."""

    mean_rmse: float
    se_rmse: float
    mean_rmsd: float
    se_rmsd: float
    mean_ess: float
    mean_unique_frac: float
    trials: int
    weight_underflows: int = 0


@dataclass
class ReportRow:
    n_particles: int
    q_prop: float
    mean_rmse: float
    se_rmse: float
    mean_rmsd: float
    se_rmsd: float
    mean_ess: float
    mean_unique_frac: float
    trials: int
    seed: int


@dataclass
class ExperimentReport:
    """One row per swept configuration; kind is "sweep-q" or "sweep-particles"."""

    kind: str
    rows: list[ReportRow]
    master_seed: int


def simulate_trajectory(model: StateSpaceModel, q_true: float, horizon: int,
                        stream: RandomStream) -> tuple[np.ndarray, np.ndarray]:
    """Simulate (true states, observations) for steps 1..horizon.

    Draw order per step: transition noise, then observation noise.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if q_true < 0:
        raise ValueError(f"q_true must be >= 0, got {q_true}")
    xs = np.empty(horizon)
    ys = np.empty(horizon)
    x = model.x0
    for k in range(1, horizon + 1):
        x = model.transition(x, k, stream.gaussian(0.0, q_true))
        xs[k - 1] = x
        ys[k - 1] = model.observe(x, stream.gaussian(0.0, model.r))
    return xs, ys


def _float_key(x: float) -> int:
    """Stable 64-bit identity of a float, for seed derivation."""
    return int(np.float64(x).view(np.uint64))


def trajectory_stream(master_seed: int, trial_index: int = 0) -> RandomStream:
    """The stream that generates trial `trial_index`'s trajectory."""
    root = derive_trial_seed(master_seed, _TRAJECTORY_TAG)
    return RandomStream(derive_trial_seed(root, trial_index))


def filter_stream(master_seed: int, n_particles: int, q_prop: float,
                  trial_index: int = 0) -> RandomStream:
    """The stream driving the filter in trial `trial_index` of one row."""
    root = derive_trial_seed(
        derive_trial_seed(derive_trial_seed(master_seed, _FILTER_TAG),
                          n_particles),
        _float_key(q_prop))
    return RandomStream(derive_trial_seed(root, trial_index))


def trial_streams(master_seed: int, n_particles: int, q_prop: float,
                  trial_index: int, fixed_trajectory: bool = False
                  ) -> tuple[RandomStream, RandomStream]:
    """The (trajectory, filter) streams one trial uses.

    The trajectory stream depends only on (master seed, trial index) — or on
    the master seed alone under `fixed_trajectory` — so rows that differ in
    filter configuration face identical realizations. The filter stream is
    additionally keyed by the configuration identity (n_particles, q_prop).
    """
    traj = trajectory_stream(master_seed, 0 if fixed_trajectory else trial_index)
    filt = filter_stream(master_seed, n_particles, q_prop, trial_index)
    return traj, filt


def _trial_metrics(model: StateSpaceModel, config: FilterConfig, q_true: float,
                   horizon: int, master_seed: int, fixed_trajectory: bool,
                   trial_index: int) -> tuple[float, float, float, float, int]:
    traj_stream, filt_stream = trial_streams(master_seed, config.n_particles,
                                             config.q_prop, trial_index,
                                             fixed_trajectory)
    xs, ys = simulate_trajectory(model, q_true, horizon, traj_stream)
    out = run_filter(model, config, ys, filt_stream)
    return (rmse(xs, out.estimates),
            rms_discrepancy(ys, out.predicted_observations),
            float(out.ess.mean()),
            float(out.unique_ancestors.mean()) / config.n_particles,
            out.weight_underflows)


@contextmanager
def _trial_mapper(workers: int | None):
    """Yield a mapper(fn, items) that preserves item order."""
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = 8
            yield lambda fn, items: list(pool.map(fn, items, chunksize=chunk))
    else:
        yield lambda fn, items: [fn(j) for j in items]


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def run_trials(model: StateSpaceModel, filter_config: FilterConfig,
               q_true: float, horizon: int, trials: int, master_seed: int, *,
               first_trial: int = 0, fixed_trajectory: bool = False,
               workers: int | None = None, _mapper=None) -> TrialAggregate:
    """Run `trials` independent simulate+filter trials and aggregate metrics.

    Trial j (globally numbered first_trial + j) always uses the same derived
    seeds, so disjoint batches reproduce exactly the trials a single big run
    would have executed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    fn = partial(_trial_metrics, model, filter_config, q_true, horizon,
                 master_seed, fixed_trajectory)
    indices = range(first_trial, first_trial + trials)
    if _mapper is None:
        with _trial_mapper(workers) as mapper:
            results = mapper(fn, indices)
    else:
        results = _mapper(fn, indices)
    rmses, rmsds, esses, uniques, underflows = map(np.asarray, zip(*results))
    return TrialAggregate(
        mean_rmse=float(rmses.mean()), se_rmse=_stderr(rmses),
        mean_rmsd=float(rmsds.mean()), se_rmsd=_stderr(rmsds),
        mean_ess=float(esses.mean()),
        mean_unique_frac=float(uniques.mean()),
        trials=trials,
        weight_underflows=int(underflows.sum()),
    )


def _aggregate_to_row(agg: TrialAggregate, n_particles: int, q_prop: float,
                      master_seed: int) -> ReportRow:
    return ReportRow(n_particles=n_particles, q_prop=q_prop,
                     mean_rmse=agg.mean_rmse, se_rmse=agg.se_rmse,
                     mean_rmsd=agg.mean_rmsd, se_rmsd=agg.se_rmsd,
                     mean_ess=agg.mean_ess,
                     mean_unique_frac=agg.mean_unique_frac,
                     trials=agg.trials, seed=master_seed)


def _run_sweep(config: CampaignConfig, kind: str,
               row_specs: list[tuple[int, float]]) -> ExperimentReport:
    model = config.build_model()
    rows = []
    with _trial_mapper(config.workers) as mapper:
        for n_particles, q_prop in row_specs:
            agg = run_trials(model, config.filter_template(n_particles, q_prop),
                             config.q_true, config.horizon, config.trials,
                             config.master_seed,
                             fixed_trajectory=config.fixed_trajectory,
                             _mapper=mapper)
            rows.append(_aggregate_to_row(agg, n_particles, q_prop,
                                          config.master_seed))
    return ExperimentReport(kind=kind, rows=rows, master_seed=config.master_seed)


def sweep_particles(config: CampaignConfig) -> ExperimentReport:
    """One row per (particle count, propagation variance) pair."""
    specs = [(n, q) for n in config.n_list for q in config.q_prop_list]
    return _run_sweep(config, "sweep-particles", specs)


def sweep_q(config: CampaignConfig) -> ExperimentReport:
    """One row per grid variance, at the fixed particle count."""
    specs = [(config.n_particles, q) for q in config.q_grid.values()]
    return _run_sweep(config, "sweep-q", specs)


def rmsd_argmin(report: ExperimentReport) -> float:
    """Grid variance minimizing mean RMSD; ties break toward the smallest."""
    best = None
    for row in report.rows:
        if best is None or row.mean_rmsd < best.mean_rmsd:
            best = row
    return best.q_prop


@dataclass
class EstimateQResult:
    q_hat: float
    report: ExperimentReport


def estimate_q(config: CampaignConfig) -> EstimateQResult:
    """Offline estimate of the transition-noise variance: RMSD argmin over the grid."""
    report = sweep_q(config)
    return EstimateQResult(q_hat=rmsd_argmin(report), report=report)
