"""Truncated free-product Hilbert space and compressed operators.

The domain is spanned by alternating words of weight ``<= L``. A polynomial
is applied exactly on a larger *workspace* (weight ``L + ext`` and Haar
cutoffs ``K + ext_K``), deep enough that no intermediate word which could
return to the domain is dropped; the result is then compressed to the domain.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .. import kernels
from .factors import FiniteDim, HaarUnitary, check_letter
from .poly import Letter, NcPoly
from .words import GRADINGS, FactorShape, WordBasis, count_words

DEFAULT_MEM_BUDGET = 2 * 1024**3
DENSE_LIMIT = 600


class MemoryBudgetError(MemoryError):
    """The estimated footprint of a word basis exceeds the configured budget."""


class SolverError(RuntimeError):
    """The iterative norm solver did not converge; ``best`` is the best bound seen."""

    def __init__(self, msg: str, best: float):
        super().__init__(msg)
        self.best = best


def _shapes(factors, L: int, haar_extra: int = 0) -> tuple[FactorShape, ...]:
    out = []
    for f in factors:
        if isinstance(f, FiniteDim):
            out.append(FactorShape("fd", f.gns_dim))
        elif isinstance(f, HaarUnitary):
            K = f.cutoff if f.cutoff is not None else max(L, 1)
            out.append(FactorShape("haar", K + haar_extra))
        else:
            raise TypeError(f"unsupported factor {f!r}")
    return tuple(out)


def estimate_bytes(shapes, max_level: int, grading: str) -> int:
    """Rough footprint of a word basis plus one sparse operator on it."""
    n = sum(count_words(shapes, max_level, grading))
    # enumeration arrays plus COO triplets and CSR storage of one letter operator
    per_word = 8 * (6 + len(shapes)) + 2 * 32
    return n * per_word


class _Space:
    """A word basis together with the slot data needed to assemble letter operators."""

    def __init__(self, factors, shapes, level, grading, backend):
        self.factors = factors
        self.shapes = shapes
        self.basis = WordBasis(shapes, level, grading, backend)
        self.backend = kernels.get_backend(backend)
        self._ops: dict = {}
        self._slots: dict = {}

    def _slot_maps(self, i: int):
        hit = self._slots.get(i)
        if hit is not None:
            return hit
        sh = self.shapes[i]
        b = self.basis
        offset = sh.size if sh.kind == "haar" else 0
        nslots = 2 * sh.size + 1 if sh.kind == "haar" else sh.size
        slot_of_letter = np.full(len(b.letters), -1, dtype=np.int64)
        slot_letter = np.full(nslots, -1, dtype=np.int64)
        for idx, (f, c) in enumerate(b.letters):
            if f == i:
                slot_of_letter[idx] = c + offset
                slot_letter[c + offset] = idx
        hit = (slot_of_letter, slot_letter, offset)
        self._slots[i] = hit
        return hit

    def _slot_csc(self, letter: Letter) -> sp.csc_matrix:
        sh = self.shapes[letter.factor]
        if sh.kind == "haar":
            K, m = sh.size, letter.handle
            n = 2 * K + 1
            src = np.arange(n)
            tgt = src + m
            ok = (tgt >= 0) & (tgt < n)
            return sp.csc_matrix((np.ones(ok.sum(), dtype=complex), (tgt[ok], src[ok])), shape=(n, n))
        return sp.csc_matrix(self.factors[letter.factor].slot_matrix(letter))

    def letter_op(self, letter: Letter) -> sp.csr_matrix:
        hit = self._ops.get(letter)
        if hit is not None:
            return hit
        check_letter(self.factors, letter)
        i = letter.factor
        slot_of_letter, slot_letter, xi_slot = self._slot_maps(i)
        T = self._slot_csc(letter)
        T.sort_indices()
        b = self.basis
        rows, cols, data = self.backend.assemble_action(
            b.arrays, b.letter_weight, b.max_level, i, slot_of_letter, slot_letter, xi_slot,
            T.indptr.astype(np.int64), T.indices.astype(np.int64), T.data.astype(complex),
        )
        op = sp.csr_matrix((data, (rows, cols)), shape=(b.size, b.size))
        self._ops[letter] = op
        return op


def _extensions(P: NcPoly, grading: str) -> tuple[int, int]:
    """Extra weight and Haar cutoff needed for exact evaluation of ``P`` on the domain.

    An intermediate word can only come back to the domain if the letters
    still to be applied can undo its excursion, so the overshoot after ``j``
    letters is bounded by ``min(prefix, suffix)`` of the per-letter steps.
    """
    ext = ext_k = 0
    for mono, _ in P:
        steps = [abs(l.handle) if (l.is_power and grading == "weighted") else 1 for l in mono]
        hsteps = [abs(l.handle) if l.is_power else 0 for l in mono]
        for s, target in ((steps, "w"), (hsteps, "k")):
            tot, pre, best = sum(s), 0, 0
            for x in s[:-1]:
                pre += x
                best = max(best, min(pre, tot - pre))
            if target == "w":
                ext = max(ext, best)
            else:
                ext_k = max(ext_k, best)
    return ext, ext_k


class TruncatedFreeRep:
    """Reduced free product of ``factors`` truncated to words of weight ``<= L``.

    Parameters
    ----------
    factors : list of FiniteDim or HaarUnitary
    L : int
        Weight cutoff of the domain.
    grading : {"syllable", "weighted"}
        ``"syllable"`` counts letters; ``"weighted"`` counts a Haar letter
        ``e_k`` as ``|k|`` (group word length).
    mem_budget : int
        Byte budget checked before any basis is allocated.
    backend : str, optional
        Kernel backend override (``"cython"`` or ``"numpy"``).
    """

    def __init__(self, factors, L: int, grading: str = "syllable",
                 mem_budget: int = DEFAULT_MEM_BUDGET, backend: str | None = None):
        if len(factors) < 1:
            raise ValueError("at least one factor is required")
        if L < 0:
            raise ValueError("L must be >= 0")
        if grading not in GRADINGS:
            raise ValueError(f"unknown grading {grading!r}")
        self.factors = tuple(factors)
        self.L = int(L)
        self.grading = grading
        self.mem_budget = int(mem_budget)
        self.backend = backend
        self.shapes = _shapes(self.factors, self.L)
        self._spaces: dict = {}
        self.domain = self._space(0, 0)

    # -- spaces -----------------------------------------------------------
    def _space(self, ext: int, ext_k: int) -> _Space:
        key = (ext, ext_k)
        hit = self._spaces.get(key)
        if hit is None:
            shapes = _shapes(self.factors, self.L, ext_k)
            need = estimate_bytes(shapes, self.L + ext, self.grading)
            if need > self.mem_budget:
                raise MemoryBudgetError(
                    f"word basis at level {self.L + ext} needs ~{need} bytes, budget {self.mem_budget}"
                )
            hit = _Space(self.factors, shapes, self.L + ext, self.grading, self.backend)
            self._spaces[key] = hit
        return hit

    @property
    def basis(self) -> WordBasis:
        return self.domain.basis

    @property
    def dim(self) -> int:
        return self.domain.basis.size

    def cutoffs(self) -> list[int | None]:
        return [sh.size if sh.kind == "haar" else None for sh in self.shapes]

    def xi(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    # -- operators --------------------------------------------------------
    def letter_operator(self, letter: Letter) -> sp.csr_matrix:
        """Compression of a single letter (exact action, overflow dropped)."""
        return self.domain.letter_op(letter)

    def poly_operator(self, P) -> sp.csr_matrix:
        """``Q_L lambda(P) Q_L`` evaluated exactly through a deep enough workspace."""
        P = NcPoly.of(P)
        for l in P.letters():
            check_letter(self.factors, l)
        ext, ext_k = _extensions(P, self.grading)
        ws = self._space(ext, ext_k)
        N = self.dim
        if ws is self.domain:
            emb = np.arange(N)
        else:
            emb = self.basis.embed(ws.basis)
        E = sp.csr_matrix((np.ones(N, dtype=complex), (emb, np.arange(N))), shape=(ws.basis.size, N))
        total = sp.csr_matrix((N, N), dtype=complex)
        for mono, c in P:
            V = E
            for l in reversed(mono):
                V = ws.letter_op(l) @ V
            total = total + c * V[emb, :]
        total.sum_duplicates()
        total.eliminate_zeros()
        return total.tocsr()


def build_free_rep(factors, L: int, grading: str = "syllable",
                   mem_budget: int = DEFAULT_MEM_BUDGET, backend: str | None = None) -> TruncatedFreeRep:
    return TruncatedFreeRep(factors, L, grading, mem_budget, backend)


def factor_operator(rep: TruncatedFreeRep, i: int, x) -> sp.csr_matrix:
    """Compressed ``lambda_i(x)``; ``x`` is an algebra element or a Haar power."""
    if isinstance(x, Letter):
        letter = x
    else:
        letter = Letter(i, x)
    if letter.factor != i:
        raise ValueError("letter factor does not match i")
    if not letter.is_power and letter.handle.is_identity():
        return sp.identity(rep.dim, dtype=complex, format="csr")
    return rep.letter_operator(letter)


def _real_if_possible(T):
    if T.dtype.kind == "c" and not np.any(T.data.imag):
        return T.real.astype(float)
    return T


def operator_norm(T, hermitian: bool = False, seed: int = 0, tol: float = 1e-9,
                  ncv: int | None = None) -> float:
    """Spectral norm of a sparse matrix (dense below ``DENSE_LIMIT``)."""
    n = T.shape[0]
    if n == 0:
        return 0.0
    if n <= DENSE_LIMIT:
        return float(np.linalg.norm(T.toarray(), 2))
    T = _real_if_possible(T.tocsr())
    A = T if hermitian else (T.conj().T @ T).tocsr()
    best = 0.0
    for attempt in range(2):
        rng = np.random.default_rng(seed + attempt)
        v0 = rng.standard_normal(n)
        if A.dtype.kind == "c":
            v0 = v0 + 1j * rng.standard_normal(n)
        try:
            vals = spla.eigsh(A, k=2, which="LM", tol=tol, v0=v0,
                              ncv=ncv or min(n - 1, 32), maxiter=10 * n,
                              return_eigenvectors=False)
        except spla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues):
                best = max(best, float(np.max(np.abs(exc.eigenvalues))))
            continue
        top = float(np.max(np.abs(vals)))
        return top if hermitian else float(np.sqrt(max(top, 0.0)))
    best = best if hermitian else float(np.sqrt(best))
    raise SolverError("norm solver did not converge after one restart", best)


def compressed_norm(rep: TruncatedFreeRep, P, seed: int = 0, tol: float = 1e-9) -> float:
    """``||Q_L lambda(P) Q_L||``, a lower bound on ``||lambda(P)||`` nondecreasing in ``L``."""
    P = NcPoly.of(P)
    T = rep.poly_operator(P)
    return operator_norm(T, hermitian=P.is_self_adjoint(1e-12), seed=seed, tol=tol)
