from .ar1 import AR1CoKriging
from .base import (
    Dataset,
    FitConfig,
    FitError,
    InvalidConfigError,
    NotFittedError,
    ParamBounds,
    PredictiveDistribution,
    Standardizer,
    SurrogateModel,
)
from .dynamics import PHYSICS_KIND, DynamicsModel, fit_dynamics, predict_next_state, transitions_to_arrays
from .gp import CKA, GaussianProcess, GPBias, GPScale, PhysicsMeanGP, ZeroMeanGP
from .io import FORMAT_VERSION, ModelFormatError, load_model, save_model
from .registry import MODEL_KINDS, fit, make_model, predict
from .rra import RRA, SamplingError

__all__ = [
    "AR1CoKriging",
    "CKA",
    "Dataset",
    "DynamicsModel",
    "FORMAT_VERSION",
    "FitConfig",
    "FitError",
    "GPBias",
    "GPScale",
    "GaussianProcess",
    "InvalidConfigError",
    "MODEL_KINDS",
    "ModelFormatError",
    "PHYSICS_KIND",
    "NotFittedError",
    "ParamBounds",
    "PhysicsMeanGP",
    "PredictiveDistribution",
    "RRA",
    "SamplingError",
    "Standardizer",
    "SurrogateModel",
    "ZeroMeanGP",
    "fit",
    "fit_dynamics",
    "load_model",
    "predict_next_state",
    "save_model",
    "transitions_to_arrays",
    "make_model",
    "predict",
]
