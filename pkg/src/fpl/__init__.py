"""Numerical workbench for reduced free products of finite-dimensional C*-algebras."""

from .algebra import (
    AlgElement,
    FdAlgebra,
    TracialState,
    approx_rational_trace,
    eval_trace,
    tensor_elements,
    tensor_min,
)
from .gns import GnsBasis, GnsRep, SingularGramError, build_gns, canonical_basis, gram_schmidt, rep_perturbation

__version__ = "0.1.0"
