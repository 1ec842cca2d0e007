import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optoblockade.errors import DomainError
from optoblockade.fock import (ComplexOperator, Truncation, annihilation, displaced_overlap,
                               displaced_overlap_first_order, displacement_matrix, identity,
                               overlap_matrix, tensor)


def test_annihilation_matrix_elements():
    assert np.array_equal(annihilation(2).data, np.array([[0, 1], [0, 0]]))
    assert annihilation(3).data[1, 2] == pytest.approx(math.sqrt(2))
    a = annihilation(4)
    assert np.allclose(np.diag((a.dag() @ a).data), [0, 1, 2, 3])
    a = annihilation(7)
    for n in range(1, 7):
        assert a.data[n - 1, n] == pytest.approx(math.sqrt(n))
    with pytest.raises(DomainError):
        annihilation(0)


def test_tensor_products():
    assert np.array_equal(tensor(identity(2), identity(3)).data, np.eye(6))
    op = tensor(annihilation(2), identity(2))
    assert op.dims == (2, 2) and op.dim_a == 2 and op.dim_b == 2
    ket10 = np.kron([0, 1], [1, 0])
    assert np.array_equal(op.data @ ket10, np.kron([1, 0], [1, 0]))
    rng = np.random.default_rng(1)
    A = ComplexOperator(rng.normal(size=(3, 3)), (3,))
    B = ComplexOperator(rng.normal(size=(4, 4)), (4,))
    assert tensor(A, B).trace() == pytest.approx(A.trace() * B.trace())


def test_operator_metadata_checked():
    with pytest.raises(DomainError):
        ComplexOperator(np.zeros((2, 3)), (2,))
    with pytest.raises(DomainError):
        ComplexOperator(np.zeros((6, 6)), (2, 2))
    with pytest.raises(DomainError):
        Truncation(n_a=3)


def test_overlap_examples():
    assert displaced_overlap(3, 3, 0.0) == 1.0
    assert displaced_overlap(3, 2, 0.0) == 0.0
    assert displaced_overlap(0, 0, 0.5) == pytest.approx(math.exp(-0.125), abs=1e-14)
    # oracle: matrix exponential on 60 levels
    oracle = displacement_matrix(60, 0.5).data[0, 2].real
    assert oracle == pytest.approx(math.exp(-0.125) * 0.25 / math.sqrt(2), abs=1e-13)
    assert displaced_overlap(0, 2, 0.5) == pytest.approx(oracle, abs=1e-12)


def test_overlap_matches_matrix_exponential():
    for alpha in (-1.5, -0.4, 0.25, 1.5):
        D = displacement_matrix(60, alpha).data.real
        table = overlap_matrix(21, alpha)
        assert np.max(np.abs(table - D[:21, :21])) <= 1e-8


def test_overlap_large_indices_no_overflow():
    val = displaced_overlap(40, 3, 1.2)
    assert math.isfinite(val)
    D = displacement_matrix(120, 1.2).data.real
    assert val == pytest.approx(D[40, 3], abs=1e-10)


def test_first_order_expansion():
    assert displaced_overlap_first_order(2, 2, 0.0) == 1.0
    assert displaced_overlap_first_order(1, 2, 0.0) == 0.0
    assert abs(displaced_overlap_first_order(1, 0, 0.3)) == pytest.approx(0.3)
    assert abs(displaced_overlap(0, 0, 0.01) - displaced_overlap_first_order(0, 0, 0.01)) <= 1e-4


@given(st.integers(0, 12), st.integers(0, 12), st.floats(-0.05, 0.05))
def test_first_order_error_is_second_order(l, k, alpha):
    err = abs(displaced_overlap(l, k, alpha) - displaced_overlap_first_order(l, k, alpha))
    assert err <= (l + k + 2) ** 2 * alpha ** 2 + 1e-15


def test_displacement_matrix_oracle_properties():
    assert np.allclose(displacement_matrix(5, 0.0).data, np.eye(5))
    for alpha in (-2.0, 1.0, 2.0):
        D = displacement_matrix(60, alpha).data
        inner = (D @ D.conj().T)[:30, :30]
        assert np.max(np.abs(inner - np.eye(30))) <= 1e-8
    alpha = 0.7
    col = displacement_matrix(60, alpha).data[:15, 0].real
    coherent = [math.exp(-alpha ** 2 / 2) * alpha ** n / math.sqrt(math.factorial(n)) for n in range(15)]
    assert np.allclose(col, coherent, atol=1e-12)


@settings(max_examples=60)
@given(st.integers(0, 15), st.floats(-2.0, 2.0))
def test_row_completeness(l, alpha):
    K = l + 12 * math.ceil(1 + alpha ** 2)
    total = sum(displaced_overlap(l, k, alpha) ** 2 for k in range(K + 1))
    assert 1.0 - total <= 1e-8
    assert total <= 1.0 + 1e-10


@given(st.integers(0, 20), st.integers(0, 20), st.floats(-2.0, 2.0))
def test_overlap_magnitude_symmetry(l, k, alpha):
    assert abs(displaced_overlap(l, k, alpha)) == pytest.approx(abs(displaced_overlap(k, l, alpha)),
                                                                 rel=1e-12, abs=1e-300)
