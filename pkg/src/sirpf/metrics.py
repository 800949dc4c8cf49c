"""Accuracy metrics: RMSE against the truth, RMSD against the observations.

RMSE needs the true states and is therefore simulation-only. RMSD compares
the real observations with the observations predicted from the state
estimates, so it is computable in practice and serves as the offline
likelihood proxy for estimating the transition-noise variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import StateSpaceModel

__all__ = ["TrajectoryRecord", "rmse", "rmsd", "rms_discrepancy"]


@dataclass
class TrajectoryRecord:
    """One simulated trajectory with its filter estimates."""

    true_states: np.ndarray
    observations: np.ndarray
    estimates: np.ndarray

    def __post_init__(self):
        self.true_states = np.asarray(self.true_states, dtype=float)
        self.observations = np.asarray(self.observations, dtype=float)
        self.estimates = np.asarray(self.estimates, dtype=float)
        if not (self.true_states.shape == self.observations.shape
                == self.estimates.shape):
            raise ValueError("true_states, observations, estimates must have "
                             "equal length")
        if self.true_states.size < 1:
            raise ValueError("trajectory must have at least one step")


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 1:
        raise ValueError("metrics need at least one step")
    return a, b


def rmse(true_states: np.ndarray, estimates: np.ndarray) -> float:
    """Root mean square error between true states and estimates."""
    x, x_hat = _check_pair(true_states, estimates)
    return float(np.sqrt(np.mean((x - x_hat) ** 2)))


def rms_discrepancy(observations: np.ndarray,
                    predicted_observations: np.ndarray) -> float:
    """Root mean square discrepancy between real and predicted observations.

    The campaign runner feeds this with the filter's posterior-predictive
    observation means, which track the observations even when the state
    posterior is bimodal.
    """
    y, y_hat = _check_pair(observations, predicted_observations)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def rmsd(observations: np.ndarray, estimates: np.ndarray,
         model: StateSpaceModel) -> float:
    """RMS discrepancy with predictions taken at the point estimates.

    The predicted observation evaluates the observation map at the state
    estimate with zero noise. Under an even observation map this variant
    collapses when the estimate averages two sign-opposed posterior modes;
    campaign reports therefore use :func:`rms_discrepancy` over the filter's
    ensemble predictions instead.
    """
    y, x_hat = _check_pair(observations, estimates)
    y_hat = model.observe(x_hat, 0.0)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))
