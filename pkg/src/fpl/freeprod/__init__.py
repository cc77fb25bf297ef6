"""Reduced free products of finite-dimensional and Haar-unitary factors."""

from .factors import FactorSpec, FiniteDim, HaarUnitary
from .lazy import LazyVec, apply_poly, evaluate_moment
from .poly import GROUP, Letter, NcPoly, letter
from .rep import (
    DEFAULT_MEM_BUDGET,
    MemoryBudgetError,
    SolverError,
    TruncatedFreeRep,
    build_free_rep,
    compressed_norm,
    factor_operator,
    operator_norm,
)
from .words import GRADINGS, FactorShape, WordBasis, count_words

__all__ = [
    "DEFAULT_MEM_BUDGET", "FactorShape", "FactorSpec", "FiniteDim", "GRADINGS", "GROUP",
    "HaarUnitary", "LazyVec", "Letter", "MemoryBudgetError", "NcPoly", "SolverError",
    "TruncatedFreeRep", "WordBasis", "apply_poly", "build_free_rep", "compressed_norm",
    "count_words", "evaluate_moment", "factor_operator", "letter", "operator_norm",
]

from .checks import (  # noqa: E402
    BasisMismatchError,
    HaarReport,
    NonUnitaryError,
    free_rep_distance,
    freeness_check,
    haar_check,
)

__all__ += [
    "BasisMismatchError", "HaarReport", "NonUnitaryError", "free_rep_distance",
    "freeness_check", "haar_check",
]
