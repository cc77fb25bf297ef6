"""Reduced crossed products of truncated free products by finite cyclic groups.

The crossed-product space is ``H (x) C^n`` with basis index
``word_index * n + h``. The group generator acts as ``sigma(v) = I (x) S``
with ``S e_h = e_{h+1}``, and an element as
``sigma(x) = sum_h lambda(alpha^{-h}(x)) (x) E_h``, so that
``sigma(v) sigma(x) sigma(v)^* = sigma(alpha(x))``. Letters of factor
``GROUP`` denote powers of ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .algebra import AlgElement, FdAlgebra, TracialState
from .freeprod.factors import FiniteDim, HaarUnitary
from .freeprod.lazy import LazyVec
from .freeprod.poly import GROUP, Letter, NcPoly
from .freeprod.rep import TruncatedFreeRep, build_free_rep, operator_norm


def cyclic_algebra(n: int) -> tuple[FdAlgebra, TracialState, AlgElement]:
    """``C*(Z_n)`` as ``C^n`` with the uniform trace and ``u = diag(gamma^k)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alg = FdAlgebra((1,) * n)
    trace = TracialState.from_fractions([Fraction(1, n)] * n)
    u = alg.diag(roots_of_unity(n))
    return alg, trace, u


def roots_of_unity(n: int) -> np.ndarray:
    """``gamma^k`` for ``k = 0..n-1``, with the real/imaginary parts of exact roots snapped."""
    z = np.exp(2j * np.pi * np.arange(n) / n)
    re, im = z.real.copy(), z.imag.copy()
    for a in (re, im):
        for exact in (0.0, 1.0, -1.0, 0.5, -0.5):
            a[np.abs(a - exact) < 1e-15] = exact
    return re + 1j * im


@dataclass(frozen=True)
class CyclicAction:
    """Action of ``Z_n`` on a free product, given by its generator ``alpha``.

    Parameters
    ----------
    n : int
        Group order.
    factor_permutation : tuple of int
        ``alpha`` maps factor ``j`` onto factor ``factor_permutation[j]``.
    block_permutations : dict
        For a finite-dimensional factor ``j``: ``alpha(x)`` has block ``i``
        equal to block ``perm[i]`` of ``x`` (taken in the target factor).
    haar_phases : dict
        For a Haar factor ``j``: ``alpha(u_j) = c_j u_{pi(j)}``.
    """

    n: int
    factor_permutation: tuple
    block_permutations: dict = field(default_factory=dict)
    haar_phases: dict = field(default_factory=dict)

    @classmethod
    def trivial(cls, n: int, n_factors: int) -> "CyclicAction":
        return cls(n, tuple(range(n_factors)))

    def apply(self, l: Letter, power: int = 1) -> tuple[complex, Letter]:
        """``alpha^power(l) = coeff * letter``."""
        coeff = 1.0 + 0j
        power %= self.n
        for _ in range(power):
            if l.factor == GROUP:
                continue
            j = l.factor
            tgt = self.factor_permutation[j]
            if l.is_power:
                coeff *= complex(self.haar_phases.get(j, 1.0)) ** l.handle
                l = Letter(tgt, l.handle)
            else:
                perm = self.block_permutations.get(j)
                x = l.handle
                if perm is not None:
                    x = x.algebra.element([x.blocks[p] for p in perm])
                l = Letter(tgt, x, l.adjoint)
        return coeff, l

    def validate(self, factors):
        if len(self.factor_permutation) != len(factors):
            raise ValueError("factor permutation has the wrong length")
        if sorted(self.factor_permutation) != list(range(len(factors))):
            raise ValueError("factor_permutation is not a permutation")
        for j, f in enumerate(factors):
            g = factors[self.factor_permutation[j]]
            if type(f) is not type(g):
                raise ValueError(f"action maps factor {j} to a factor of another kind")
            if isinstance(f, HaarUnitary):
                if f.cutoff != g.cutoff:
                    raise ValueError(f"action maps factor {j} to a Haar factor with another cutoff")
                c = complex(self.haar_phases.get(j, 1.0))
                if abs(abs(c) - 1) > 1e-12:
                    raise ValueError("Haar phases must have modulus 1")
            else:
                if f.algebra != g.algebra:
                    raise ValueError(f"action maps factor {j} to a different algebra")
                perm = self.block_permutations.get(j, tuple(range(f.algebra.num_blocks)))
                sizes, w = f.algebra.block_sizes, g.trace.weights
                for i, p in enumerate(perm):
                    if sizes[i] != sizes[p] or abs(w[i] - f.trace.weights[p]) > 1e-12:
                        raise ValueError(f"block permutation of factor {j} is not trace preserving")
        # alpha^n = id on the generators
        for j, f in enumerate(factors):
            gens = [Letter(j, 1)] if isinstance(f, HaarUnitary) else [
                Letter(j, f.algebra.matrix_unit(b, 0, 0)) for b in range(f.algebra.num_blocks)]
            for l in gens:
                c_n, l_n = 1.0, l
                for _ in range(self.n):
                    c1, l_n = self.apply(l_n, 1)
                    c_n *= c1
                same = l_n.factor == l.factor and (
                    l_n.handle == l.handle if l.is_power else l_n.handle.allclose(l.handle))
                if not same or abs(c_n - 1) > 1e-12:
                    raise ValueError("alpha^n is not the identity")


def twist(P: NcPoly, action: CyclicAction, power: int) -> NcPoly:
    """``alpha^power(P)`` for a polynomial without group letters."""
    out: dict = {}
    for mono, c in P:
        coeff, letters = complex(c), []
        for l in mono:
            k, l2 = action.apply(l, power)
            coeff *= k
            letters.append(l2)
        key = tuple(letters)
        out[key] = out.get(key, 0) + coeff
    return NcPoly(out)


def normal_form(P: NcPoly, action: CyclicAction) -> dict:
    """Rewrite ``P`` as ``sum_j Y_j v^j`` using ``v x = alpha(x) v``; returns ``{j: Y_j}``."""
    out: dict = {}
    for mono, c in P:
        p, coeff, letters = 0, complex(c), []
        for l in mono:
            if l.factor == GROUP:
                p += l.handle
                continue
            k, l2 = action.apply(l, p)
            coeff *= k
            letters.append(l2)
        p %= action.n
        Y = out.setdefault(p, {})
        Y[tuple(letters)] = Y.get(tuple(letters), 0) + coeff
    return {p: NcPoly(Y) for p, Y in out.items()}


class CrossedRep:
    """Covariant pair ``(sigma, v)`` on ``H_L (x) C^n``."""

    def __init__(self, base: TruncatedFreeRep, action: CyclicAction):
        action.validate(base.factors)
        self.base = base
        self.action = action
        self.n = action.n
        self._letters: dict = {}

    @property
    def dim(self) -> int:
        return self.base.dim * self.n

    def state_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def _shift(self, j: int) -> sp.csr_matrix:
        n = self.n
        S = sp.csr_matrix((np.ones(n), ((np.arange(n) + j) % n, np.arange(n))), shape=(n, n))
        return sp.kron(sp.identity(self.base.dim), S, format="csr")

    def _diag_blocks(self, ops) -> sp.csr_matrix:
        n = self.n
        out = None
        for h, A in enumerate(ops):
            E = sp.csr_matrix(([1.0], ([h], [h])), shape=(n, n))
            term = sp.kron(A, E, format="csr")
            out = term if out is None else out + term
        return out.tocsr()

    def letter_operator(self, l: Letter) -> sp.csr_matrix:
        """``sigma`` of one letter, each block compressed separately."""
        hit = self._letters.get(l)
        if hit is None:
            if l.factor == GROUP:
                hit = self._shift(l.handle)
            else:
                ops = []
                for h in range(self.n):
                    c, l2 = self.action.apply(l, -h)
                    ops.append(c * self.base.letter_operator(l2))
                hit = self._diag_blocks(ops)
            self._letters[l] = hit
        return hit

    def poly_operator(self, P) -> sp.csr_matrix:
        """Compression of ``sigma(P)``, exact through the normal form ``sum Y_j v^j``."""
        P = NcPoly.of(P)
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for p, Y in normal_form(P, self.action).items():
            blocks = [self.base.poly_operator(twist(Y, self.action, -h)) for h in range(self.n)]
            total = total + self._diag_blocks(blocks) @ self._shift(p)
        total.sum_duplicates()
        return total.tocsr()

    def moment(self, P) -> complex:
        """Vector state ``<sigma(P) (xi (x) e_0), xi (x) e_0>``, evaluated without truncation."""
        return crossed_moment(self.base.factors, self.action, P)

    def covariance_defect(self) -> float:
        """Max ``||sigma(v^g) sigma(x) sigma(v^g)^* - sigma(alpha^g(x))||`` over generators."""
        worst = 0.0
        for x in generator_letters(self.base.factors):
            sx = self.letter_operator(x)
            for g in range(self.n):
                Vg = self.letter_operator(Letter(GROUP, g))
                lhs = Vg @ sx @ Vg.conj().T
                c, l2 = self.action.apply(x, g)
                diff = (lhs - c * self.letter_operator(l2)).tocsr()
                diff.eliminate_zeros()
                if diff.nnz:
                    worst = max(worst, operator_norm(diff))
        return worst


def generator_letters(factors) -> list[Letter]:
    """Declared generators: ``u_j`` for Haar factors, non-unit canonical basis elements otherwise."""
    from .gns import canonical_basis

    out = []
    for j, f in enumerate(factors):
        if isinstance(f, HaarUnitary):
            out.append(Letter(j, 1))
        else:
            out.extend(Letter(j, b) for b in canonical_basis(f.algebra)[1:])
    return out


def crossed_product(base: TruncatedFreeRep, action: CyclicAction) -> CrossedRep:
    return CrossedRep(base, action)


def crossed_apply(factors, action: CyclicAction, P: NcPoly, vec: dict) -> dict:
    """Apply ``sigma(P)`` to a finitely supported ``{h: LazyVec}`` vector."""
    P = NcPoly.of(P)
    total: dict = {}
    for mono, c in P:
        cur = dict(vec)
        for l in reversed(mono):
            nxt: dict = {}
            for h, v in cur.items():
                if l.factor == GROUP:
                    nxt[(h + l.handle) % action.n] = v
                else:
                    k, l2 = action.apply(l, -h)
                    nxt[h] = v.apply(l2, factors) * k
            cur = nxt
        for h, v in cur.items():
            total[h] = total[h] + v * c if h in total else v * c
    return total


def crossed_moment(factors, action: CyclicAction, P) -> complex:
    out = crossed_apply(factors, action, NcPoly.of(P), {0: LazyVec.xi()})
    return out[0][()] if 0 in out else 0j


@dataclass
class ZnFnModel:
    """Truncated ``C*_r(Z_n * F_n) x| Z_n`` with its distinguished generators."""

    rep: CrossedRep
    u: Letter
    v: Letter
    g1: Letter

    @property
    def n(self) -> int:
        return self.rep.n


def znfn_model(n: int, K: int, L: int, grading: str = "syllable", mem_budget: int | None = None) -> ZnFnModel:
    """``Z_n`` (as ``C^n``) free with ``n`` Haar unitaries, crossed by ``Z_n``.

    The generator acts by ``u -> gamma u`` on the cyclic factor and by
    ``g_i -> g_{i+1}`` (indices mod ``n``) on the Haar factors.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    alg, tr, u = cyclic_algebra(n)
    factors = [FiniteDim(alg, tr)] + [HaarUnitary(K) for _ in range(n)]
    kw = {} if mem_budget is None else {"mem_budget": mem_budget}
    base = build_free_rep(factors, L, grading, **kw)
    perm = (0,) + tuple(1 + (j + 1) % n for j in range(n))
    action = CyclicAction(n, perm, {0: tuple((i + 1) % n for i in range(n))})
    rep = CrossedRep(base, action)
    return ZnFnModel(rep, Letter(0, u), Letter(GROUP, 1), Letter(1, 1))


def _claim_blocks(n: int, D: int):
    for nn in range(-D, D + 1):
        if nn == 0:
            continue
        for m in range(n):
            for k in range(n):
                if (m, k) == (0, 0):
                    continue
                cost = abs(nn) + m + k
                if cost <= D:
                    yield (nn, m, k), cost


def claim_monomials(model: ZnFnModel, D: int):
    """Monomials ``prod_i g_1^{n_i} u^{m_i} v^{k_i}`` of the freeness claim, total cost ``<= D``."""
    blocks = list(_claim_blocks(model.n, D))
    u = model.u.handle

    def mono(block):
        nn, m, k = block
        out = [Letter(model.g1.factor, nn)]
        if m:
            out.append(Letter(model.u.factor, u ** m))
        if k:
            out.append(Letter(GROUP, k))
        return tuple(out)

    def rec(prefix, budget):
        for b, cost in blocks:
            if cost <= budget:
                seq = prefix + mono(b)
                yield seq
                yield from rec(seq, budget - cost)

    yield from rec((), D)


def matrix_pair_freeness(model: ZnFnModel, D: int) -> float:
    """Max ``|tau(...)|`` over the claim's alternating moments with cost ``<= D``.

    Moments are computed with the truncated sparse operators applied to the
    state vector, which is exact while ``D`` is within the truncation.
    """
    rep = model.rep
    base = rep.base
    K = min(c for c in base.cutoffs() if c is not None)
    if D > min(base.L, K):
        raise ValueError("D must not exceed the truncation level or the Haar cutoff")
    xi = rep.state_vector()
    worst = 0.0
    cache: dict = {}
    for mono in claim_monomials(model, D):
        # reuse the vector of the longest already computed suffix
        vec, start = xi, len(mono)
        for s in range(len(mono)):
            hit = cache.get(mono[s:])
            if hit is not None:
                vec, start = hit, s
                break
        for s in range(start - 1, -1, -1):
            vec = rep.letter_operator(mono[s]) @ vec
            cache[mono[s:]] = vec
        worst = max(worst, abs(vec[0]))
    return float(worst)


def claim_moments(model: ZnFnModel, D: int) -> list:
    """``(monomial, moment)`` pairs evaluated with the untruncated engine."""
    rep = model.rep
    return [(m, rep.moment(NcPoly({m: 1}))) for m in claim_monomials(model, D)]


__all__ = [
    "CrossedRep", "CyclicAction", "ZnFnModel", "claim_moments", "claim_monomials",
    "crossed_apply", "crossed_moment", "crossed_product", "cyclic_algebra",
    "generator_letters", "matrix_pair_freeness", "normal_form", "roots_of_unity", "twist",
    "znfn_model",
]
