import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpl import FdAlgebra, TracialState, eval_trace
from fpl.gns import (
    SingularGramError,
    build_gns,
    canonical_basis,
    gram_schmidt,
    law_defects,
    rep_perturbation,
)

from conftest import algebras, random_faithful


def _inner(t, x, y):
    return eval_trace(t, y.adjoint() * x)


def _determinant_basis(vectors, t):
    """Orthonormal basis from the classical determinant formula (oracle).

    ``P_m`` is the cofactor expansion, along the last row, of the matrix whose
    first ``m-1`` rows hold ``<y_j, y_i>`` and whose last row holds ``y_1..y_m``.
    """
    out = []
    for m in range(1, len(vectors) + 1):
        if m == 1:
            out.append(vectors[0])
            continue
        G = np.array([[_inner(t, vectors[j], vectors[i]) for j in range(m)] for i in range(m - 1)])
        P = vectors[0].algebra.zero()
        for j in range(m):
            cof = (-1) ** (m - 1 + j) * np.linalg.det(np.delete(G, j, axis=1))
            P = P + vectors[j] * cof
        out.append(P * (1 / np.sqrt(_inner(t, P, P).real)))
    return out


def test_canonical_basis_examples():
    assert [b == FdAlgebra((1,)).identity() for b in canonical_basis(FdAlgebra((1,)))] == [True]
    C2 = FdAlgebra((1, 1))
    bs = canonical_basis(C2)
    assert len(bs) == 2 and bs[1] == C2.matrix_unit(0, 0, 0)
    M2 = FdAlgebra((2,))
    bs = canonical_basis(M2)
    assert [b == M2.matrix_unit(0, *rc) for b, rc in zip(bs[1:], [(0, 0), (0, 1), (1, 0)])] == [True] * 3
    G = np.array([[_inner(TracialState((1.0,)), a, b) for b in bs] for a in bs])
    assert np.linalg.matrix_rank(G) == 4


def test_gram_schmidt_examples():
    C2 = FdAlgebra((1, 1))
    t = TracialState.uniform(2)
    z = C2.diag([1, -1])
    gb = gram_schmidt([C2.identity(), z], t)
    assert gb.elements[1].allclose(z, 1e-15)
    gb = gram_schmidt([C2.identity(), C2.matrix_unit(0, 0, 0)], t)
    assert gb.elements[1].allclose(z, 1e-15)
    with pytest.raises(SingularGramError):
        gram_schmidt([C2.identity(), C2.identity()], t)


@settings(max_examples=25)
@given(algebras(max_dim=10), st.integers(0, 2**32 - 1))
def test_gram_schmidt_matches_determinant_formula(A, seed):
    rng = np.random.default_rng(seed)
    t = random_faithful(rng, A)
    ys = [A.identity()] + [A.random_element(rng) for _ in range(A.dim - 1)]
    try:
        gb = gram_schmidt(ys, t)
    except SingularGramError:
        return
    for p, q in zip(gb.elements, _determinant_basis(ys, t)):
        assert p.allclose(q, 1e-8)
    for m, (p, y) in enumerate(zip(gb.elements, ys)):
        ip = _inner(t, y, p)
        assert ip.real > 0 and abs(ip.imag) <= 1e-10
        for q in gb.elements:
            assert abs(_inner(t, p, q) - (p is q)) <= 1e-10


@given(algebras(max_dim=10), st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_gram_schmidt_scale_invariance(A, seed, c):
    rng = np.random.default_rng(seed)
    t = random_faithful(rng, A)
    ys = canonical_basis(A)
    a = gram_schmidt(ys, t)
    b = gram_schmidt([ys[0]] + [y * c for y in ys[1:]], t)
    for p, q in zip(a.elements, b.elements):
        assert p.allclose(q, 1e-10)


def test_build_gns_examples(rng):
    C2 = FdAlgebra((1, 1))
    rep = build_gns(C2, TracialState.uniform(2))
    assert np.array_equal(rep.rho(C2.diag([1, -1])), np.array([[0, 1], [1, 0]]))
    C = FdAlgebra((1,))
    assert np.array_equal(build_gns(C, TracialState((1.0,))).rho(C.identity()), np.eye(1))
    M2 = FdAlgebra((2,))
    rep = build_gns(M2, TracialState((1.0,)))
    assert rep.dim == 4
    assert law_defects(rep, rng, 20)["homomorphism"] <= 1e-10
    for _ in range(20):
        x = M2.random_element(rng)
        x = x + x.adjoint()
        assert abs(np.linalg.norm(rep.rho(x), 2) - x.norm()) <= 1e-10


def test_rho_identity_and_adjoint_exact(rng):
    A = FdAlgebra((2, 1))
    rep = build_gns(A, random_faithful(rng, A))
    assert np.array_equal(rep.rho(A.identity()), np.eye(rep.dim))
    x = A.random_element(rng)
    assert np.array_equal(rep.rho(x.adjoint()), rep.rho(x).conj().T)
    h = x + x.adjoint()
    assert np.array_equal(rep.rho(h), rep.rho(h).conj().T)


def test_gns_laws_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(50):
        sizes = []
        while sum(n * n for n in sizes) < 16:
            n = int(rng.integers(1, 4))
            if sum(m * m for m in sizes) + n * n > 16:
                break
            sizes.append(n)
        A = FdAlgebra(tuple(sizes))
        t = random_faithful(rng, A)
        rep = build_gns(A, t)
        d = law_defects(rep, rng, 10)
        assert max(d.values()) <= 1e-9
        # cyclicity: rho(b) e_1 over the canonical basis spans the whole space
        cols = np.column_stack([rep.rho(b)[:, 0] for b in canonical_basis(A)])
        assert np.linalg.matrix_rank(cols) == rep.dim
        # faithfulness on the basis
        assert all(np.linalg.norm(rep.rho(b)) > 0 for b in canonical_basis(A))


def test_rep_perturbation_examples():
    C2 = FdAlgebra((1, 1))
    t = TracialState.uniform(2)
    r = rep_perturbation(C2, t, t)
    assert not r.norm_diffs.any()
    d1 = rep_perturbation(C2, t, TracialState((0.5 + 1e-3, 0.5 - 1e-3))).max_norm_diff
    d2 = rep_perturbation(C2, t, TracialState((0.5 + 5e-4, 0.5 - 5e-4))).max_norm_diff
    assert 0.3 <= d2 / d1 <= 0.7


@given(algebras(max_dim=9), st.integers(0, 2**32 - 1))
def test_rep_perturbation_bound_and_convergence(A, seed):
    rng = np.random.default_rng(seed)
    t, s = random_faithful(rng, A), random_faithful(rng, A)
    prev = None
    for lam in (1.0, 1e-2, 1e-4, 1e-6):
        w = [(1 - lam) * a + lam * b for a, b in zip(t.weights, s.weights)]
        w[-1] = 1.0 - sum(w[:-1])
        r = rep_perturbation(A, t, TracialState(tuple(w)))
        assert np.all(r.norm_diffs <= r.entry_bounds + 1e-15)
        prev = r.max_norm_diff
    assert prev <= 1e-4
