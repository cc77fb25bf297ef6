"""Trace-orthonormal bases and explicit GNS matrix representations.

For a faithful trace ``psi`` on a block algebra ``B`` the inner product
``<x, y> = psi(y* x)`` turns ``B`` into a ``d``-dimensional Hilbert space.
Orthonormalizing a basis ``1, b_1, ..., b_{d-1}`` gives ``p_1 = 1, ..., p_d``
and the representation ``rho(x)[s, t] = <x p_t, p_s>`` with cyclic vector
``e_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgElement, FdAlgebra, TracialState, eval_trace

GRAM_COND_LIMIT = 1e12


class SingularGramError(ValueError):
    """The Gram matrix is numerically singular (dependent input or non-faithful trace)."""


def canonical_basis(algebra: FdAlgebra) -> list[AlgElement]:
    """Unit first, then matrix units in (block, row, column) order.

    The last diagonal unit of the last block is dropped; it equals the unit
    minus the other diagonal units.
    """
    out = [algebra.identity()]
    last = algebra.num_blocks - 1
    for b, n in enumerate(algebra.block_sizes):
        for j in range(n):
            for k in range(n):
                if b == last and j == k == n - 1:
                    continue
                out.append(algebra.matrix_unit(b, j, k))
    return out


def _weights(algebra: FdAlgebra, trace: TracialState) -> np.ndarray:
    """Per-coordinate weights ``alpha_i / n_i``: ``psi(y* x) = sum w * x * conj(y)``."""
    if len(trace.weights) != algebra.num_blocks:
        raise ValueError("trace/algebra block count mismatch")
    return np.concatenate(
        [np.full(n * n, a / n) for n, a in zip(algebra.block_sizes, trace.weights)]
    )


def _from_coords(algebra: FdAlgebra, c: np.ndarray) -> AlgElement:
    blocks, pos = [], 0
    for n in algebra.block_sizes:
        blocks.append(c[pos:pos + n * n].reshape(n, n))
        pos += n * n
    return AlgElement(algebra, tuple(blocks))


def _left_mult(x: AlgElement) -> np.ndarray:
    """Matrix of ``y -> x y`` on row-major block coordinates."""
    d = x.algebra.dim
    out = np.zeros((d, d), dtype=complex)
    pos = 0
    for a in x.blocks:
        n = a.shape[0]
        out[pos:pos + n * n, pos:pos + n * n] = np.kron(a, np.eye(n))
        pos += n * n
    return out


@dataclass(frozen=True, eq=False)
class GnsBasis:
    """Orthonormal basis ``p_1 = 1, p_2, ...`` of ``L^2(B, psi)``."""

    algebra: FdAlgebra
    trace: TracialState
    elements: tuple[AlgElement, ...]
    coords: np.ndarray = field(repr=False)  # column m = block coordinates of p_m
    weights: np.ndarray = field(repr=False)

    def inner(self, x: AlgElement, y: AlgElement) -> complex:
        return eval_trace(self.trace, y.adjoint() * x)

    @property
    def spans_algebra(self) -> bool:
        return len(self.elements) == self.algebra.dim


def gram_schmidt(vectors: list[AlgElement], trace: TracialState) -> GnsBasis:
    """Orthonormalize ``vectors`` under ``<x, y> = psi(y* x)``.

    Modified Gram-Schmidt with one reorthogonalization pass. The sign and
    phase of each ``p_m`` are pinned by ``<p_m, y_m> > 0``, which is the
    normalization of the determinant construction of the same basis.

    Raises
    ------
    SingularGramError
        If the Gram matrix has condition number above ``1e12``.
    """
    if not vectors:
        raise ValueError("empty vector list")
    algebra = vectors[0].algebra
    if not vectors[0].allclose(algebra.identity()):
        raise ValueError("first vector must be the identity")
    if len(vectors) > algebra.dim:
        raise SingularGramError(f"{len(vectors)} vectors in a {algebra.dim}-dimensional algebra")
    # unscaled coordinates with a diagonal weight keep dyadic traces exact
    w = _weights(algebra, trace)
    C = np.column_stack([v.coords() for v in vectors])
    gram = C.conj().T @ (w[:, None] * C)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise SingularGramError(f"Gram condition number {cond:.3g} exceeds {GRAM_COND_LIMIT:g}")

    Q = np.zeros_like(C)
    Q[:, 0] = C[:, 0]  # tau(1) = 1: the unit is already normalized
    for m in range(1, C.shape[1]):
        v = C[:, m].copy()
        for _ in range(2):
            for j in range(m):
                v -= ((w * Q[:, j].conj()) @ v) * Q[:, j]
        Q[:, m] = v / np.sqrt(np.real(w @ np.abs(v) ** 2))
    elements = [algebra.identity()]
    elements += [_from_coords(algebra, Q[:, m]) for m in range(1, Q.shape[1])]
    Q.setflags(write=False)
    w.setflags(write=False)
    return GnsBasis(algebra, trace, tuple(elements), Q, w)


@dataclass(frozen=True, eq=False)
class GnsRep:
    """``d x d`` matrix realization ``rho`` of ``(B, psi)`` with cyclic vector ``e_1``.

    ``matrices[i]`` is ``rho(b_i)`` for the ``i``-th canonical basis element.
    """

    basis: GnsBasis
    matrices: tuple[np.ndarray, ...]
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.basis.coords.shape[1]

    def _raw(self, x: AlgElement) -> np.ndarray:
        Q = self.basis.coords
        return Q.conj().T @ (self.basis.weights[:, None] * (_left_mult(x) @ Q))

    def rho(self, x: AlgElement) -> np.ndarray:
        """Matrix of ``x``; exact identity for the unit and exact adjoint pairs."""
        if x.algebra != self.basis.algebra:
            raise ValueError("element belongs to a different algebra")
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        if x.is_identity():
            out = np.eye(self.dim, dtype=complex)
        else:
            xa = x.adjoint()
            if xa == x:
                r = self._raw(x)
                out = (r + r.conj().T) / 2
            elif x._hash_key() <= xa._hash_key():
                out = self._raw(x)
            else:
                out = self.rho(xa).conj().T
        out.setflags(write=False)
        self._cache[x] = out
        return out

    def state(self, x: AlgElement) -> complex:
        """``<rho(x) e_1, e_1>``."""
        return complex(self.rho(x)[0, 0])


def build_gns(algebra: FdAlgebra, trace: TracialState) -> GnsRep:
    """GNS representation built on the canonical basis."""
    basis = gram_schmidt(canonical_basis(algebra), trace)
    rep = GnsRep(basis, ())
    mats = tuple(rep.rho(b) for b in canonical_basis(algebra))
    return GnsRep(basis, mats, rep._cache)


def law_defects(rep: GnsRep, rng: np.random.Generator, samples: int = 10) -> dict[str, float]:
    """Max homomorphism, adjoint and state-recovery defects on random elements."""
    alg, tr = rep.basis.algebra, rep.basis.trace
    hom = adj = st = 0.0
    for _ in range(samples):
        x, y = alg.random_element(rng), alg.random_element(rng)
        rx, ry = rep._raw(x), rep._raw(y)
        hom = max(hom, np.linalg.norm(rep._raw(x * y) - rx @ ry, 2))
        adj = max(adj, np.linalg.norm(rep._raw(x.adjoint()) - rx.conj().T, 2))
        st = max(st, abs(eval_trace(tr, x) - rx[0, 0]))
    return {"homomorphism": float(hom), "adjoint": float(adj), "state": float(st)}


@dataclass(frozen=True)
class PerturbationReport:
    """Per canonical basis element: ``||rho_t'(b_i) - rho_t(b_i)||`` and ``d^2 max |entry diff|``."""

    norm_diffs: np.ndarray
    entry_bounds: np.ndarray

    @property
    def max_norm_diff(self) -> float:
        return float(self.norm_diffs.max())


def rep_perturbation(algebra: FdAlgebra, t: TracialState, t_prime: TracialState) -> PerturbationReport:
    """Compare the GNS matrices of two faithful traces on the same canonical basis."""
    ra, rb = build_gns(algebra, t), build_gns(algebra, t_prime)
    d = ra.dim
    norms, bounds = [], []
    for a, b in zip(ra.matrices, rb.matrices):
        diff = b - a
        norms.append(np.linalg.norm(diff, 2))
        bounds.append(d * d * np.abs(diff).max())
    return PerturbationReport(np.array(norms), np.array(bounds))
