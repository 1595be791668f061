"""Spectral transfer learning for multi-task low-rank linear regression.

Thin Python wrapper over the compiled core. The main entry points are
:func:`smart_fit` (the ADMM estimator), the initializers (:func:`lasso_fit`,
:func:`ridge_fit`, :func:`ols_fit`, :func:`warm_start`), and
:func:`select_rank`.
"""

from ._core import (  # noqa: F401
    FitReport,
    SmartFactors,
    SolverConfig,
    SvdTriple,
    complete_basis,
    default_lasso_lambda,
    lasso_fit,
    norm_frob_error,
    ols_fit,
    qr_orthonormalize,
    ridge_fit,
    select_rank,
    smart_fit,
    soft_threshold,
    svd,
    warm_start,
)

__all__ = [
    "FitReport",
    "SmartFactors",
    "SolverConfig",
    "SvdTriple",
    "complete_basis",
    "default_lasso_lambda",
    "lasso_fit",
    "norm_frob_error",
    "ols_fit",
    "qr_orthonormalize",
    "ridge_fit",
    "select_rank",
    "smart_fit",
    "soft_threshold",
    "svd",
    "warm_start",
]
