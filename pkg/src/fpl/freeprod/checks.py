"""Freeness, Haar-unitarity and representation-distance diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lazy import LazyVec, apply_poly, check_poly, evaluate_moment
from .poly import Letter, NcPoly
from .rep import TruncatedFreeRep, build_free_rep, compressed_norm, factor_operator, operator_norm


class NonUnitaryError(ValueError):
    """The word passed to :func:`haar_check` is not unitary."""


class BasisMismatchError(ValueError):
    """Two truncated representations do not live on the same word basis."""


def _family(fam) -> list[NcPoly]:
    """A family is a list of polynomials/letters or a ``(factor, handles)`` pair."""
    if isinstance(fam, tuple) and len(fam) == 2 and isinstance(fam[0], (int, np.integer)):
        i, handles = fam
        return [NcPoly.of(Letter(int(i), h)) for h in handles]
    return [NcPoly.of(p) for p in fam]


def freeness_check(factors, families, D: int) -> float:
    """Largest ``|tau(z_1 ... z_k)|`` over alternating centered products, ``k <= D``.

    ``z = P - tau(P)`` for ``P`` drawn from ``families``; consecutive factors
    come from different families. Using the same algebra factor for two
    families gives a non-free control.
    """
    if D < 2:
        raise ValueError("D must be >= 2")
    fams = [_family(f) for f in families]
    for fam in fams:
        for P in fam:
            check_poly(factors, P)
    means = [[evaluate_moment(factors, P) for P in fam] for fam in fams]
    worst = 0.0
    # products are built right to left, sharing the vector of the common suffix
    stack = [(LazyVec.xi(), -1, 0)]
    while stack:
        vec, last, k = stack.pop()
        if k == D:
            continue
        for f, fam in enumerate(fams):
            if f == last:
                continue
            for P, m in zip(fam, means[f]):
                w = apply_poly(P, vec, factors) + vec * (-m)
                worst = max(worst, abs(w[()]))
                stack.append((w, f, k + 1))
    return float(worst)


@dataclass(frozen=True)
class HaarReport:
    """Moments ``tau(w^m)`` for ``m = 1..N`` and the unitarity data."""

    moments: np.ndarray
    max_moment: float
    norm_moment: complex  # tau(w* w)
    compressed_norm: float
    norm_level: int
    is_haar: bool


def haar_check(factors, w, N: int, tol: float = 1e-10, norm_level: int | None = None) -> HaarReport:
    """Exact moments of a unitary word; raises :class:`NonUnitaryError` otherwise.

    Unitarity is tested through ``tau(w* w) = 1`` and the compressed norm of
    ``w`` at weight ``norm_level`` (default: the degree of ``w``).
    """
    w = NcPoly.of(w)
    check_poly(factors, w)
    ww = evaluate_moment(factors, w.adjoint() * w)
    level = w.degree if norm_level is None else norm_level
    nrm = compressed_norm(build_free_rep(factors, level), w)
    if abs(ww - 1) > 1e-10 or nrm > 1 + 1e-6:
        raise NonUnitaryError(f"word is not unitary: tau(w*w)={ww:.3g}, norm={nrm:.6g}")
    moments = np.zeros(N, dtype=complex)
    v = LazyVec.xi()
    for m in range(N):
        v = apply_poly(w, v, factors)
        moments[m] = v[()]
    top = float(np.abs(moments).max()) if N else 0.0
    return HaarReport(moments, top, ww, nrm, level, top <= tol)


def _as_letter(h) -> Letter:
    if isinstance(h, Letter):
        return h
    if isinstance(h, tuple) and len(h) == 2:
        return Letter(int(h[0]), h[1])
    raise TypeError(f"handle must be a Letter or (factor, element), got {type(h).__name__}")


def free_rep_distance(repA: TruncatedFreeRep, repB: TruncatedFreeRep, handles) -> float:
    """Max over ``handles`` of ``||lambda_A(x) - lambda_B(x)||`` on the shared truncated space."""
    if (repA.shapes != repB.shapes or repA.L != repB.L or repA.grading != repB.grading):
        raise BasisMismatchError("representations are built on different word bases")
    best = 0.0
    for h in handles:
        l = _as_letter(h)
        diff = factor_operator(repA, l.factor, l) - factor_operator(repB, l.factor, l)
        diff.eliminate_zeros()
        if diff.nnz:
            best = max(best, operator_norm(diff))
    return float(best)
