"""Seasonally persistent GARMA processes: simulation, demodulated Whittle estimation and baselines."""

from .errors import (
    ConfigError,
    DataError,
    EstimationError,
    GridError,
    IOFailure,
    NumericError,
    ParameterError,
    SeaperError,
)
from .spectral import GarmaParams, acv, f_dagger, sdf
from .demod import build_grid, demod_periodogram
from .constants import b_pole, ci_half_width, finite_sample_constants
from .likelihood import demod_loglik, whittle_loglik
from .estimation import FitResult, SearchConfig, fit, select_model
from .gph import gph_estimate, gph_pole_search
from .simulation import McConfig, run_mc, simulate
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DataError",
    "EstimationError",
    "FitResult",
    "GarmaParams",
    "GridError",
    "IOFailure",
    "McConfig",
    "NumericError",
    "ParameterError",
    "SearchConfig",
    "SeaperError",
    "acv",
    "b_pole",
    "build_grid",
    "ci_half_width",
    "demod_loglik",
    "demod_periodogram",
    "f_dagger",
    "finite_sample_constants",
    "fit",
    "gph_estimate",
    "gph_pole_search",
    "run_mc",
    "sdf",
    "select_model",
    "simulate",
    "whittle_loglik",
]
