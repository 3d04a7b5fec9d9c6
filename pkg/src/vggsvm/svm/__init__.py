from .kernels import KernelSpec, kernel_eval, kernel_matrix, gram_matrix
from .smo import SmoResult, solve_dual, dual_objective, kkt_violations
from .model import (
    HARD_MARGIN_C,
    DegenerateMarginWarning,
    SvmModel,
    SvmTrainConfig,
    load_svm,
    save_svm,
    train_svm,
)

__all__ = [
    "KernelSpec",
    "kernel_eval",
    "kernel_matrix",
    "gram_matrix",
    "SmoResult",
    "solve_dual",
    "dual_objective",
    "kkt_violations",
    "HARD_MARGIN_C",
    "DegenerateMarginWarning",
    "SvmModel",
    "SvmTrainConfig",
    "load_svm",
    "save_svm",
    "train_svm",
]
