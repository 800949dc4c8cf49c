"""State-space models: 1-D benchmark and a linear-Gaussian reference.

A model is a pair of deterministic maps: ``transition(x, k, w)`` advances the
state with an explicit noise draw ``w``, and ``observe(x, v)`` produces an
observation with noise draw ``v``. All randomness enters through those
arguments, which keeps simulation and filtering seed-reproducible. The maps
are plain numpy expressions, so they accept scalars and arrays alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

__all__ = [
    "StateSpaceModel",
    "ungm_transition",
    "ungm_observe",
    "lg_transition",
    "lg_observe",
    "ungm",
    "linear_gaussian",
    "make_model",
    "MODEL_NAMES",
]


@dataclass(frozen=True)
class StateSpaceModel:
    """Scalar state-space model with additive-noise hooks.

    ``q_true`` is the variance of the transition noise that actually drives
    the simulated state; ``r`` is the observation-noise variance. Particles
    are initialised from N(x0, init_var).
    """

    transition: Callable[[float, int, float], float]
    observe: Callable[[float, float], float]
    q_true: float = 1.0
    r: float = 1.0
    x0: float = 0.0
    init_var: float = 2.0

    def __post_init__(self):
        if self.q_true < 0:
            raise ValueError(f"q_true must be >= 0, got {self.q_true}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        if self.init_var < 0:
            raise ValueError(f"init_var must be >= 0, got {self.init_var}")


def ungm_transition(x, k, w):
    """Univariate nonlinear growth dynamics with a forcing cosine term."""
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else x
    return 0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * np.cos(1.2 * (k - 1)) + w


def ungm_observe(x, v):
    """Quadratic observation map; even in x, so observations are bimodal."""
    return 0.05 * x * x + v


def lg_transition(x, k, w, a=0.9):
    return a * x + w


def lg_observe(x, v, c=1.0):
    return c * x + v


def ungm(q_true: float = 1.0, r: float = 1.0, x0: float = 0.0,
         init_var: float = 2.0) -> StateSpaceModel:
    """The 1-D nonlinear benchmark model."""
    return StateSpaceModel(ungm_transition, ungm_observe,
                           q_true=q_true, r=r, x0=x0, init_var=init_var)


def linear_gaussian(a: float = 0.9, c: float = 1.0, q_true: float = 1.0,
                    r: float = 1.0, x0: float = 0.0,
                    init_var: float = 2.0) -> StateSpaceModel:
    """Stable scalar linear-Gaussian model, used as the exact-filter oracle."""
    return StateSpaceModel(partial(lg_transition, a=a), partial(lg_observe, c=c),
                           q_true=q_true, r=r, x0=x0, init_var=init_var)


_FACTORIES: dict[str, Callable[..., StateSpaceModel]] = {
    "ungm": ungm,
    "linear-gaussian": linear_gaussian,
}

MODEL_NAMES = tuple(_FACTORIES)


def make_model(name: str, **kwargs) -> StateSpaceModel:
    """Build a model by its registered name ("ungm", "linear-gaussian")."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; known models: {', '.join(MODEL_NAMES)}"
        ) from None
    return factory(**kwargs)
