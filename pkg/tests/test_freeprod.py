import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fpl import FdAlgebra, TracialState
from fpl.freeprod import (
    FiniteDim,
    HaarUnitary,
    LazyVec,
    Letter,
    MemoryBudgetError,
    NcPoly,
    build_free_rep,
    compressed_norm,
    evaluate_moment,
    factor_operator,
    letter,
)
from fpl.freeprod.lazy import apply_poly

C2 = FdAlgebra((1, 1))
M2 = FdAlgebra((2,))
HALF = TracialState.uniform(2)
TAU2 = TracialState((1.0,))
Z = C2.diag([1, -1])


def sym_factors():
    return [FiniteDim(C2, HALF), FiniteDim(C2, HALF)]


def mixed_factors():
    return [FiniteDim(M2, TAU2), HaarUnitary(3), FiniteDim(FdAlgebra((1, 2)), TracialState.from_fractions(["1/4", "3/4"]))]


def lazy_matrix(rep, l):
    """Compressed letter operator built column by column from the dict engine (oracle)."""
    words = rep.basis.words()
    T = np.zeros((rep.dim, rep.dim), dtype=complex)
    for j, w in enumerate(words):
        img = LazyVec({w: 1.0}).apply(l, rep.factors)
        for w2, c in img.data.items():
            i = rep.basis.index(w2)
            if i >= 0:
                T[i, j] += c
    return T


def random_letter(rng, factors):
    i = int(rng.integers(len(factors)))
    f = factors[i]
    if isinstance(f, HaarUnitary):
        return Letter(i, int(rng.choice([-2, -1, 1, 2])))
    return Letter(i, f.algebra.random_element(rng), bool(rng.integers(2)))


def random_monomial(rng, factors, deg):
    return NcPoly({tuple(random_letter(rng, factors) for _ in range(deg)): 1.0})


# -- polynomials ---------------------------------------------------------------
def test_poly_algebra():
    u = letter(0, 1)
    P = (u + u.adjoint()) ** 2
    assert len(P) == 4 and P.degree == 2
    assert P.is_self_adjoint()
    assert P.simplify() == letter(0, 2) + letter(0, -2) + NcPoly.constant(2)
    assert (2 * u - u * 2) == NcPoly()
    with pytest.raises(ValueError):
        u ** -1
    assert Letter(0, np.int64(3)).handle == 3
    assert Letter(0, 2, adjoint=True) == Letter(0, -2)


# -- operators ----------------------------------------------------------------
def test_factor_operator_identity_and_single_haar():
    rep = build_free_rep(sym_factors(), 3)
    assert (factor_operator(rep, 0, C2.identity()) != np.eye(rep.dim)).sum() == 0
    # K = 1 by hand: basis (xi, e_-1, e_1); u: xi -> e_1, e_-1 -> xi, e_1 -> e_2 (dropped)
    rep = build_free_rep([HaarUnitary(1)], 4)
    assert rep.basis.words() == [(), ((0, -1),), ((0, 1),)]
    expect = np.array([[0, 1, 0], [0, 0, 0], [1, 0, 0]])
    assert np.array_equal(factor_operator(rep, 0, 1).toarray(), expect)


def test_centered_symmetry_on_xi():
    rep = build_free_rep(sym_factors(), 2)
    v = factor_operator(rep, 0, Z) @ rep.xi()
    expect = np.zeros(rep.dim)
    expect[rep.basis.index(((0, 1),))] = 1
    assert np.array_equal(v, expect)


def test_operators_match_lazy_engine(rng):
    factors = mixed_factors()
    rep = build_free_rep(factors, 3)
    for _ in range(6):
        l = random_letter(rng, factors)
        np.testing.assert_allclose(rep.letter_operator(l).toarray(), lazy_matrix(rep, l), atol=1e-13)


def test_adjoint_law_exact(rng):
    factors = mixed_factors()
    rep = build_free_rep(factors, 3)
    for _ in range(6):
        l = random_letter(rng, factors)
        a = rep.letter_operator(l.star()).toarray()
        b = rep.letter_operator(l).toarray().conj().T
        assert np.array_equal(a, b)


def test_degenerate_level_zero(rng):
    factors = mixed_factors()
    rep = build_free_rep(factors, 0)
    assert rep.dim == 1
    x = M2.random_element(rng)
    assert rep.letter_operator(Letter(0, x)).toarray()[0, 0] == pytest.approx(np.trace(x.blocks[0]) / 2)


def test_letter_factor_mismatch():
    rep = build_free_rep([HaarUnitary(2), FiniteDim(C2, HALF)], 2)
    with pytest.raises(ValueError):
        rep.letter_operator(Letter(0, Z))
    with pytest.raises(ValueError):
        rep.letter_operator(Letter(1, 1))
    with pytest.raises(ValueError):
        rep.letter_operator(Letter(5, 1))


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        build_free_rep([HaarUnitary(), HaarUnitary()], 12, "weighted", mem_budget=10**6)


def test_poly_operator_exact_compression(rng):
    """Compressing the final operator equals compressing a product of operators on a deep space."""
    factors = [FiniteDim(C2, HALF), HaarUnitary(2), FiniteDim(FdAlgebra((1, 2)), TracialState.from_fractions(["1/4", "3/4"]))]
    rep = build_free_rep(factors, 2)
    deep = build_free_rep([factors[0], HaarUnitary(2 + 2), factors[2]], 2 + 2)
    emb = rep.basis.embed(deep.basis)
    for _ in range(4):
        P = random_monomial(rng, factors, 4)
        (mono, _), = P
        M = sp.identity(deep.dim, dtype=complex, format="csr")
        for l in mono:
            M = M @ deep.letter_operator(l)
        np.testing.assert_allclose(rep.poly_operator(P).toarray(), M.toarray()[np.ix_(emb, emb)], atol=1e-12)


# -- moments ---------------------------------------------------------------------
def test_moment_examples():
    assert evaluate_moment(sym_factors(), NcPoly.constant(1)) == 1
    u = letter(0, 1)
    assert evaluate_moment([HaarUnitary()], (u + u.adjoint()) ** 2) == 2
    x, y = letter(0, Z), letter(1, Z)
    for m in range(1, 7):
        assert abs(evaluate_moment(sym_factors(), (x * y) ** m)) <= 1e-10


def test_moment_depth_independence(rng):
    factors = mixed_factors()
    for _ in range(20):
        P = random_monomial(rng, factors, int(rng.integers(1, 7)))
        ref = evaluate_moment(factors, P)
        for depth in (P.degree, P.degree + 1, P.degree + 5):
            assert evaluate_moment(factors, P, depth) == ref


def test_moment_matches_sparse_path(rng):
    factors = mixed_factors()
    for _ in range(10):
        P = random_monomial(rng, factors, 4) + random_monomial(rng, factors, 3) * 0.5
        rep = build_free_rep(factors, 2)
        xi = rep.xi()
        sparse = xi @ (rep.poly_operator(P) @ xi)
        assert abs(sparse - evaluate_moment(factors, P)) <= 1e-12


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_traciality(seed, d1, d2):
    rng = np.random.default_rng(seed)
    factors = mixed_factors()
    P, Q = random_monomial(rng, factors, d1), random_monomial(rng, factors, d2)
    assert abs(evaluate_moment(factors, P * Q) - evaluate_moment(factors, Q * P)) <= 1e-10


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_state_positivity(seed):
    rng = np.random.default_rng(seed)
    factors = mixed_factors()
    P = sum((random_monomial(rng, factors, int(rng.integers(0, 5))) * complex(*rng.standard_normal(2))
             for _ in range(3)), NcPoly())
    val = evaluate_moment(factors, P.adjoint() * P)
    assert val.real >= -1e-12 and abs(val.imag) <= 1e-10


def test_lazy_vec_basics():
    a = LazyVec({(): 1.0, ((0, 1),): 2.0})
    b = LazyVec({((0, 1),): 1j})
    assert (a + b)[((0, 1),)] == 2 + 1j
    assert a.inner(b) == 2 * (1j).conjugate()
    assert len(a.truncate(0)) == 1
    assert apply_poly(NcPoly.constant(3), a, [])[()] == 3


# -- norms ---------------------------------------------------------------------
def test_norm_of_unit():
    factors = mixed_factors()
    for L in (0, 1, 2):
        assert compressed_norm(build_free_rep(factors, L), NcPoly.constant(1)) == pytest.approx(1, abs=1e-14)


def single_haar_oracle(K):
    """Largest |eigenvalue| of the explicit (2K+1)-dimensional path adjacency matrix."""
    n = 2 * K + 1
    A = np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    return np.abs(np.linalg.eigvalsh(A)).max()


@pytest.mark.parametrize("K", [1, 2, 5, 20, 400])
def test_single_haar_closed_form(K):
    u = letter(0, 1)
    val = compressed_norm(build_free_rep([HaarUnitary(K)], 1), u + u.adjoint())
    assert abs(val - 2 * np.cos(np.pi / (2 * K + 2))) <= 1e-8
    if K <= 20:
        assert abs(val - single_haar_oracle(K)) <= 1e-10


def test_single_fd_factor_norm(rng):
    for alg, tr in [(M2, TAU2), (FdAlgebra((2, 1)), TracialState.from_fractions(["1/3", "2/3"]))]:
        factors = [FiniteDim(alg, tr), HaarUnitary()]
        for _ in range(3):
            x = alg.random_element(rng)
            for L in (1, 2, 3):
                val = compressed_norm(build_free_rep(factors, L), letter(0, x))
                assert abs(val - x.norm()) <= 1e-8


def test_norm_monotone_in_L(rng):
    factors = mixed_factors()
    for _ in range(3):
        P = random_monomial(rng, factors, 2) + random_monomial(rng, factors, 1)
        vals = [compressed_norm(build_free_rep(factors, L), P) for L in (1, 2, 3)]
        assert vals[0] <= vals[1] + 1e-9 and vals[1] <= vals[2] + 1e-9


def test_kesten_small_levels():
    P = letter(0, 1) + letter(0, -1) + letter(1, 1) + letter(1, -1)
    vals = [compressed_norm(build_free_rep([HaarUnitary(), HaarUnitary()], L, "weighted"), P) for L in (2, 4, 6, 8)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2 * np.sqrt(3)


def test_sparse_solver_path_agrees_with_dense():
    """Above the dense threshold the Krylov solver is used; compare against dense on the same matrix."""
    from fpl.freeprod.rep import operator_norm

    P = letter(0, 1) + letter(0, -1) + letter(1, 1) + letter(1, -1)
    rep = build_free_rep([HaarUnitary(), HaarUnitary()], 6, "weighted")
    T = rep.poly_operator(P)
    assert T.shape[0] > 600
    dense = np.linalg.norm(T.toarray(), 2)
    assert abs(operator_norm(T, hermitian=True) - dense) <= 1e-8
    Q = letter(0, 1) * letter(1, 1)
    T = rep.poly_operator(Q)
    assert abs(operator_norm(T) - np.linalg.norm(T.toarray(), 2)) <= 1e-8
