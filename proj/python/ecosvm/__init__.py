"""SVM and SVDD training through Lotka-Volterra ecosystem dynamics.

Training points act as species whose abundances are the dual KKT multipliers;
the survivors of the ecological dynamics are the support vectors. Online
learning accepts or discards each arriving point by its invasion growth rate.
"""

from ._ecosvm import (
    ConvergenceError,
    DivergenceError,
    KernelSpec,
    OnlineSvm,
    SvddModel,
    SvmModel,
    __version__,
    center_similarity,
    fit_svdd,
    fit_svm,
    gen_gaussian_blob,
    gen_toy_linear,
    gen_toy_nonlinear,
    gram_matrix,
    kernel_eval,
)

__all__ = [
    "ConvergenceError",
    "DivergenceError",
    "KernelSpec",
    "OnlineSvm",
    "SvddModel",
    "SvmModel",
    "__version__",
    "center_similarity",
    "fit_svdd",
    "fit_svm",
    "gen_gaussian_blob",
    "gen_toy_linear",
    "gen_toy_nonlinear",
    "gram_matrix",
    "kernel_eval",
]
