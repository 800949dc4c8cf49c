"""Bootstrap SIR particle filter and the propagation-noise bias harness."""

__version__ = "0.1.0"

from .filtering import FilterConfig, FilterOutput, run_filter
from .models import StateSpaceModel, linear_gaussian, make_model, ungm
from .sampling import RandomStream, derive_trial_seed, gaussian_draw

__all__ = [
    "__version__",
    "FilterConfig",
    "FilterOutput",
    "run_filter",
    "StateSpaceModel",
    "linear_gaussian",
    "make_model",
    "ungm",
    "RandomStream",
    "derive_trial_seed",
    "gaussian_draw",
]
