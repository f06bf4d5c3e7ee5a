from .kernels import KernelParams, NoiseParam, rbf_kernel, rbf_kernel_and_grads
from .likelihood import nlml, nlml_and_gradient, nlml_gradient
from .linalg import CholeskyFactor, NumericalFailure, cholesky, cholesky_solve
from .optim import OptimizationFailure, OptimizerConfig, OptimizeResult, optimize_hyperparams
from .rff import RFFMap, make_rff_map, rff_features

__all__ = [
    "CholeskyFactor",
    "KernelParams",
    "NoiseParam",
    "NumericalFailure",
    "OptimizationFailure",
    "OptimizeResult",
    "OptimizerConfig",
    "RFFMap",
    "cholesky",
    "cholesky_solve",
    "make_rff_map",
    "nlml",
    "nlml_and_gradient",
    "nlml_gradient",
    "optimize_hyperparams",
    "rbf_kernel",
    "rbf_kernel_and_grads",
    "rff_features",
]
