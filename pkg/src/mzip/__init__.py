"""Bayesian variable selection for multivariate zero-inflated Poisson counts."""
from .archive import ChainArchive
from .errors import InvalidArgument, InvalidState, NumericOverflow
from .model import Dataset, Hyperparameters, IdrQuery, ModelState, conditional_idr, marginal_idr, validate_state
from .sampler import SamplerConfig, run_chain, summarize_selection

__version__ = "0.1.0"

__all__ = [
    "ChainArchive", "Dataset", "Hyperparameters", "IdrQuery", "InvalidArgument", "InvalidState", "ModelState",
    "NumericOverflow", "SamplerConfig", "conditional_idr", "marginal_idr", "run_chain", "summarize_selection",
    "validate_state",
]
