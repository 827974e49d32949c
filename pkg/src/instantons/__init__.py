"""Numerical construction and verification of Yang-Mills instantons on R^4."""

from .adhm import (
    ADHMData,
    adhm_connection,
    adhm_curvature,
    adhm_curvature_field,
    adhm_residuals,
    basic_adhm_data,
    framed_tangent_dimension,
    is_costable,
    is_regular,
    is_stable,
    random_adhm_data,
    regularity_report,
    solve_adhm,
)
from .core import Quaternion, hodge_star_4, pointwise_norm_sq, split_sd_asd, wedge_trace_density
from .errors import (
    EigenspaceBreakdownError,
    FrameJumpError,
    InstantonError,
    InvalidParameterError,
    NonConvergenceError,
    NonRegularDataError,
    PoleEncounteredError,
    SingularPointError,
    TailFitError,
    ToleranceNotMetError,
)
from .explicit import Connection, ThooftParams, basic_instanton, scaled_instanton, thooft_connection
from .fields import (
    CurvatureField,
    GridSpec,
    asd_residual,
    decay_fit,
    topological_charge,
    yang_mills_value,
)
from .moduli import ModuliQuery, adhm_framed_dim, moduli_dimension, thooft_family_dim
from .reductions import (
    HitchinConfig,
    MonopoleConfig,
    NahmTriple,
    bogomolny_residual,
    hitchin_residual,
    lift_to_4d,
    nahm_integrate,
    nahm_invariants,
    nahm_rhs,
)

__version__ = "0.1.0"

__all__ = [
    "ADHMData",
    "Connection",
    "CurvatureField",
    "EigenspaceBreakdownError",
    "FrameJumpError",
    "GridSpec",
    "HitchinConfig",
    "InstantonError",
    "InvalidParameterError",
    "ModuliQuery",
    "MonopoleConfig",
    "NahmTriple",
    "NonConvergenceError",
    "NonRegularDataError",
    "PoleEncounteredError",
    "Quaternion",
    "SingularPointError",
    "TailFitError",
    "ThooftParams",
    "ToleranceNotMetError",
    "adhm_connection",
    "adhm_curvature",
    "adhm_curvature_field",
    "adhm_framed_dim",
    "adhm_residuals",
    "asd_residual",
    "basic_adhm_data",
    "basic_instanton",
    "bogomolny_residual",
    "decay_fit",
    "framed_tangent_dimension",
    "hitchin_residual",
    "hodge_star_4",
    "is_costable",
    "is_regular",
    "is_stable",
    "lift_to_4d",
    "moduli_dimension",
    "nahm_integrate",
    "nahm_invariants",
    "nahm_rhs",
    "pointwise_norm_sq",
    "random_adhm_data",
    "regularity_report",
    "scaled_instanton",
    "solve_adhm",
    "split_sd_asd",
    "thooft_connection",
    "thooft_family_dim",
    "topological_charge",
    "wedge_trace_density",
    "yang_mills_value",
]
