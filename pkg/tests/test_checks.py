import numpy as np
import pytest

from fpl import FdAlgebra, TracialState
from fpl.freeprod import (
    BasisMismatchError,
    FiniteDim,
    HaarUnitary,
    NonUnitaryError,
    build_free_rep,
    free_rep_distance,
    freeness_check,
    haar_check,
    letter,
)
from fpl.gns import canonical_basis

C2 = FdAlgebra((1, 1))
M2 = FdAlgebra((2,))
HALF = TracialState.uniform(2)
TAU2 = TracialState((1.0,))
Z = C2.diag([1, -1])


def m2_basis():
    return canonical_basis(M2)


def test_freeness_single_family_is_vacuous():
    assert freeness_check([FiniteDim(M2, TAU2)], [(0, m2_basis())], 4) == 0


def test_freeness_two_matrix_factors():
    factors = [FiniteDim(M2, TAU2), FiniteDim(M2, TAU2)]
    assert freeness_check(factors, [(0, m2_basis()), (1, m2_basis())], 4) <= 1e-10


def test_freeness_mixed_with_haar():
    factors = [FiniteDim(C2, TracialState.from_fractions(["1/3", "2/3"])), HaarUnitary()]
    u = letter(1, 1)
    fams = [[letter(0, Z), letter(0, C2.matrix_unit(0, 0, 0))], [u, u * u, u.adjoint()]]
    assert freeness_check(factors, fams, 5) <= 1e-10


def test_freeness_control_not_free():
    factors = [FiniteDim(C2, HALF), FiniteDim(C2, HALF)]
    z = letter(0, Z)
    assert freeness_check(factors, [[z], [z]], 2) >= 0.5


def test_freeness_degree_validation():
    with pytest.raises(ValueError):
        freeness_check([HaarUnitary()], [[letter(0, 1)]], 1)


def test_haar_check_examples():
    rep = haar_check([HaarUnitary()], letter(0, 1), 8)
    assert rep.max_moment == 0 and rep.is_haar
    factors = [FiniteDim(C2, HALF), FiniteDim(C2, HALF)]
    rep = haar_check(factors, letter(0, Z) * letter(1, Z), 6)
    assert rep.max_moment <= 1e-10 and rep.is_haar
    rep = haar_check(factors, letter(0, Z), 2)
    assert abs(rep.moments[1]) == pytest.approx(1) and not rep.is_haar


def test_haar_check_rejects_non_unitary():
    factors = [FiniteDim(C2, HALF), HaarUnitary()]
    with pytest.raises(NonUnitaryError):
        haar_check(factors, letter(0, C2.diag([1, 0])), 3)
    with pytest.raises(NonUnitaryError):
        haar_check(factors, letter(1, 1) + letter(1, -1), 3)


def perturbed_pair(delta, L=3):
    A = FiniteDim(M2, TAU2)
    t = TracialState.from_fractions(["1/2", "1/2"])
    tg = TracialState((0.5 + delta, 0.5 - delta))
    return build_free_rep([A, FiniteDim(C2, t)], L), build_free_rep([A, FiniteDim(C2, tg)], L)


def test_distance_identical_reps():
    a, _ = perturbed_pair(0.0)
    assert free_rep_distance(a, a, [(1, Z), (0, M2.matrix_unit(0, 0, 1))]) == 0


def test_distance_unperturbed_factor_exact_zero():
    a, b = perturbed_pair(0.05)
    handles = [(0, x) for x in m2_basis()]
    assert free_rep_distance(a, b, handles) == 0


def test_distance_shrinks_with_perturbation():
    handles = [(1, Z), (1, C2.matrix_unit(0, 0, 0))]
    d = [free_rep_distance(*perturbed_pair(delta), handles) for delta in (0.08, 0.04, 0.02, 0.01)]
    assert all(x > 0 for x in d)
    for big, small in zip(d, d[1:]):
        assert small <= 0.7 * big
    assert d[-1] < 0.1


def test_distance_basis_mismatch():
    a, _ = perturbed_pair(0.0, L=2)
    b, _ = perturbed_pair(0.0, L=3)
    with pytest.raises(BasisMismatchError):
        free_rep_distance(a, b, [(1, Z)])
    c = build_free_rep([FiniteDim(M2, TAU2), FiniteDim(FdAlgebra((1, 1, 1)), TracialState.uniform(3))], 2)
    with pytest.raises(BasisMismatchError):
        free_rep_distance(a, c, [(1, Z)])
