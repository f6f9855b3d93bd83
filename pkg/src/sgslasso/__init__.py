"""Constrained sparse group square-root Lasso solvers.

A dual augmented Lagrangian method with semismooth Newton inner solves
(``alm_solve``), a semi-proximal ADMM baseline (``admm_solve``), and the
benchmark front end (``sgslasso.cli``).
"""

from .backend import HAVE_COMPILED, available_backends, backend_name
from .prox import (
    GroupPartition,
    PenaltyParams,
    penalty_value,
    prox_h,
    prox_h_conjugate,
    prox_p,
    prox_p_conjugate,
)
from .problems import (
    GeneratorSpec,
    Problem,
    generate,
    lambda_settings,
    load_sparse_regression,
    save_sparse_regression,
)
from .alm import (
    AlmParams,
    KktResiduals,
    PrimalDualPoint,
    SolveReport,
    alm_solve,
    compute_kkt_residuals,
    count_nnz,
)
from .admm import AdmmParams, admm_solve, factorize_M
from .ssn import SsnParams, ssn_minimize

__version__ = "0.1.0"

__all__ = [
    "AdmmParams",
    "AlmParams",
    "GeneratorSpec",
    "GroupPartition",
    "HAVE_COMPILED",
    "KktResiduals",
    "PenaltyParams",
    "PrimalDualPoint",
    "Problem",
    "SolveReport",
    "SsnParams",
    "admm_solve",
    "alm_solve",
    "available_backends",
    "backend_name",
    "compute_kkt_residuals",
    "count_nnz",
    "factorize_M",
    "generate",
    "lambda_settings",
    "load_sparse_regression",
    "penalty_value",
    "prox_h",
    "prox_h_conjugate",
    "prox_p",
    "prox_p_conjugate",
    "save_sparse_regression",
    "ssn_minimize",
]
