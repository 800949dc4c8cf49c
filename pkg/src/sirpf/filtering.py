"""Bootstrap SIR particle filter with configurable roughening.

The filter propagates particles through the state transition using a
configurable noise variance ``q_prop``. Setting ``q_prop`` above the true
transition-noise variance is the *direct* roughening route: a single inflated
propagation draw is distributionally identical to adding an independent
zero-mean jitter on top of the true noise, so one knob covers both. The
*separate* route instead jitters particles after resampling with variance
``sigma_r``.

Step order inside :func:`run_filter` (k = 1..T):
propagate -> weight update -> normalize -> state estimate -> resample ->
separate roughening. The state estimate is the weighted mean taken before
resampling.

Stream-draw order, fixed so seed-replay tests stay stable: particle
initialisation consumes N normals; each step consumes N propagation normals,
then the resampler's draws (systematic: one uniform; multinomial: N uniforms),
then N roughening normals when separate roughening is configured.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .models import StateSpaceModel
from .sampling import RandomStream

__all__ = [
    "ParticleEnsemble",
    "FilterConfig",
    "StepDiagnostics",
    "FilterOutput",
    "WeightUnderflowWarning",
    "propagate",
    "weight_update",
    "normalize",
    "ess",
    "multinomial_resample",
    "systematic_resample",
    "separate_roughen",
    "unique_ancestor_count",
    "estimate_state",
    "run_filter",
]

RESAMPLERS = ("systematic", "multinomial")
ROUGHENING_MODES = ("none", "direct", "separate")


class WeightUnderflowWarning(RuntimeWarning):
    """All importance weights underflowed to zero; weights were reset to uniform."""


@dataclass(eq=False)
class ParticleEnsemble:
    """Particle states and their (possibly unnormalized) weights."""

    states: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.states.shape != self.weights.shape:
            raise ValueError("states and weights must have equal length")
        if self.states.size < 1:
            raise ValueError("ensemble needs at least one particle")

    @property
    def n(self) -> int:
        return self.states.size


@dataclass(frozen=True)
class FilterConfig:
    """Knobs of one filter run.

    ``q_prop`` is the propagation variance the filter actually uses; under
    direct roughening it is the total (true + jitter) variance. With
    ``resample_every_step`` off, resampling triggers when the effective
    sample size drops below ``ess_threshold * n_particles``.
    """

    n_particles: int
    q_prop: float
    resampler: str = "systematic"
    roughening: str = "none"
    sigma_r: float = 0.0
    resample_every_step: bool = True
    ess_threshold: float = 0.5

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.q_prop < 0:
            raise ValueError(f"q_prop must be >= 0, got {self.q_prop}")
        if self.resampler not in RESAMPLERS:
            raise ValueError(f"resampler must be one of {RESAMPLERS}")
        if self.roughening not in ROUGHENING_MODES:
            raise ValueError(f"roughening must be one of {ROUGHENING_MODES}")
        if self.sigma_r < 0:
            raise ValueError(f"sigma_r must be >= 0, got {self.sigma_r}")
        if self.sigma_r > 0 and self.roughening != "separate":
            raise ValueError("sigma_r > 0 requires roughening='separate'")
        if not 0 <= self.ess_threshold <= 1:
            raise ValueError("ess_threshold must be in [0, 1]")


class StepDiagnostics(NamedTuple):
    ess: float
    unique_ancestors: int


@dataclass
class FilterOutput:
    """Per-step estimates and impoverishment diagnostics of one filter run.

    ``predicted_observations`` holds the posterior-predictive mean of the
    noise-free observation at each step (the weight-averaged observation map
    over the ensemble). It is the observation-space prediction used by the
    campaign discrepancy metric; unlike evaluating the observation map at the
    state estimate, it is immune to sign cancellation when the posterior is
    bimodal under an even observation map.
    """

    estimates: np.ndarray
    ess: np.ndarray
    unique_ancestors: np.ndarray
    predicted_observations: np.ndarray
    weight_underflows: int = 0

    @property
    def diagnostics(self) -> list[StepDiagnostics]:
        return [StepDiagnostics(float(e), int(u))
                for e, u in zip(self.ess, self.unique_ancestors)]


def propagate(ensemble: ParticleEnsemble, model: StateSpaceModel,
              q_prop: float, k: int, stream: RandomStream) -> ParticleEnsemble:
    """Advance every particle one step with independent N(0, q_prop) noise."""
    if q_prop < 0:
        raise ValueError(f"q_prop must be >= 0, got {q_prop}")
    noise = stream.gaussian(0.0, q_prop, ensemble.n)
    return ParticleEnsemble(model.transition(ensemble.states, k, noise),
                            ensemble.weights)


def _likelihood(y: float, predicted: np.ndarray, r: float) -> np.ndarray:
    return np.exp(-0.5 * (y - predicted) ** 2 / r) / np.sqrt(2.0 * np.pi * r)


def weight_update(ensemble: ParticleEnsemble, y: float,
                  model: StateSpaceModel) -> ParticleEnsemble:
    """Multiply weights by the observation likelihood; no normalization."""
    if model.r <= 0:
        raise ValueError("weight_update requires observation variance r > 0")
    predicted = model.observe(ensemble.states, 0.0)
    return ParticleEnsemble(ensemble.states,
                            ensemble.weights * _likelihood(y, predicted, model.r))


def normalize(weights: np.ndarray) -> np.ndarray:
    """Scale weights to sum to 1; all-zero input falls back to uniform."""
    w = np.asarray(weights, dtype=float)
    if (w < 0).any():
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total == 0.0:
        warnings.warn("all importance weights underflowed to zero; "
                      "falling back to uniform weights", WeightUnderflowWarning)
        return np.full(w.size, 1.0 / w.size)
    return w / total


def ess(weights: np.ndarray) -> float:
    """Effective sample size 1 / sum(w^2) of normalized weights."""
    w = np.asarray(weights, dtype=float)
    return float(1.0 / np.dot(w, w))


def multinomial_resample(weights: np.ndarray, n_out: int,
                         stream: RandomStream) -> np.ndarray:
    """n_out ancestor indices drawn i.i.d. with probability w_i each."""
    cum = np.cumsum(weights)
    cum[-1] = 1.0  # guard cumulative round-off
    u = stream.uniform(n_out)
    return np.searchsorted(cum, u, side="right")


def systematic_resample(weights: np.ndarray, n_out: int, u: float) -> np.ndarray:
    """Low-variance resampling from one uniform offset u in [0, 1).

    Maps the stratified positions (j + u) / n_out through the cumulative
    weight function; per-index counts are floor(n_out * w_i) or
    ceil(n_out * w_i), and the output is sorted by position.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must be in [0, 1), got {u}")
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    positions = (np.arange(n_out) + u) / n_out
    return np.searchsorted(cum, positions, side="right")


def separate_roughen(states: np.ndarray, sigma_r: float,
                     stream: RandomStream) -> np.ndarray:
    """Add independent N(0, sigma_r) jitter to every state."""
    if sigma_r < 0:
        raise ValueError(f"sigma_r must be >= 0, got {sigma_r}")
    return states + stream.gaussian(0.0, sigma_r, np.asarray(states).size)


def unique_ancestor_count(indices: np.ndarray) -> int:
    """Number of distinct ancestors surviving a resampling step."""
    return int(np.unique(indices).size)


def estimate_state(ensemble: ParticleEnsemble) -> float:
    """Weighted particle mean (expects normalized weights)."""
    return float(np.dot(ensemble.weights, ensemble.states))


def run_filter(model: StateSpaceModel, config: FilterConfig,
               observations: np.ndarray, stream: RandomStream) -> FilterOutput:
    """Run the bootstrap SIR filter over a full observation sequence.

    Deterministic given (model, config, observations, stream seed).
    """
    ys = np.asarray(observations, dtype=float)
    if ys.ndim != 1 or ys.size < 1:
        raise ValueError("observations must be a non-empty 1-D array")
    if model.r <= 0:
        raise ValueError("filtering requires observation variance r > 0")

    n = config.n_particles
    horizon = ys.size
    states = stream.gaussian(model.x0, model.init_var, n)
    weights = np.full(n, 1.0 / n)

    estimates = np.empty(horizon)
    ess_trace = np.empty(horizon)
    unique_trace = np.empty(horizon, dtype=np.int64)
    predicted = np.empty(horizon)
    underflows = 0

    for k in range(1, horizon + 1):
        noise = stream.gaussian(0.0, config.q_prop, n)
        states = model.transition(states, k, noise)

        observed = model.observe(states, 0.0)
        weights = weights * _likelihood(ys[k - 1], observed, model.r)
        if weights.sum() == 0.0:
            underflows += 1
        weights = normalize(weights)

        estimates[k - 1] = np.dot(weights, states)
        predicted[k - 1] = np.dot(weights, observed)
        step_ess = ess(weights)
        ess_trace[k - 1] = step_ess

        if config.resample_every_step or step_ess < config.ess_threshold * n:
            if config.resampler == "systematic":
                idx = systematic_resample(weights, n, stream.uniform())
            else:
                idx = multinomial_resample(weights, n, stream)
            states = states[idx]
            weights = np.full(n, 1.0 / n)
            unique_trace[k - 1] = unique_ancestor_count(idx)
        else:
            unique_trace[k - 1] = n

        if config.roughening == "separate":
            states = separate_roughen(states, config.sigma_r, stream)

    return FilterOutput(estimates, ess_trace, unique_trace, predicted,
                        underflows)
