from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from crystalflex.algebra import LaurentPolynomial, exact_rank, numeric_rank, symbolic_minors
from crystalflex.framework import gallery
from crystalflex.transfer import transfer_function

Z1 = LaurentPolynomial.variable(0, 2)
Z2 = LaurentPolynomial.variable(1, 2)
ONE = LaurentPolynomial.constant(1, 2)


def test_zero_matrix_rank():
    rank, ker = numeric_rank(np.zeros((2, 2)))
    assert rank == 0 and ker.shape == (2, 2)


def test_identity_rank():
    rank, ker = numeric_rank(np.eye(3))
    assert rank == 3 and ker.shape == (3, 0)


def test_grid_psi_at_one_is_zero():
    tf = transfer_function(gallery("grid"))
    assert numeric_rank(tf.evaluate((1, 1)))[0] == 0


def test_kernel_is_orthonormal_null_space():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 3)) @ rng.normal(size=(3, 7))
    rank, ker = numeric_rank(a)
    assert rank == 3
    assert np.allclose(a @ ker, 0, atol=1e-10)
    assert np.allclose(ker.conj().T @ ker, np.eye(4), atol=1e-12)


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        numeric_rank(np.eye(2), tol=0)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 6), st.integers(0, 10_000))
def test_rank_unitary_invariance(rows, cols, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, rows, cols)
    a = rng.normal(size=(rows, r)) @ rng.normal(size=(r, cols)) if r else np.zeros((rows, cols))
    u = unitary_group.rvs(rows, random_state=seed) if rows > 1 else np.array([[np.exp(1j)]])
    v = unitary_group.rvs(cols, random_state=seed + 1) if cols > 1 else np.array([[np.exp(2j)]])
    assert numeric_rank(a)[0] == r
    assert numeric_rank(u @ a @ v)[0] == r


@given(st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=5))
def test_exact_rank_matches_sympy(rows):
    assert exact_rank([[Fraction(x) for x in r] for r in rows]) == sympy.Matrix(rows).rank()


def test_grid_minor():
    tf = transfer_function(gallery("grid"))
    (minor,) = symbolic_minors(tf.psi, 2)
    target = (ONE - Z1) * (ONE - Z2)
    assert minor.monic() == target.monic()


def test_square_minor_is_determinant():
    from crystalflex.algebra import PolynomialMatrix, determinant

    entries = ((Z1, ONE), (Z2, Z1 * Z2 + ONE))
    m = PolynomialMatrix(entries, 2)
    (minor,) = symbolic_minors(m, 2)
    assert minor == determinant([list(r) for r in entries], 2)


def test_diag_grid_minor_count():
    tf = transfer_function(gallery("diag_grid"))
    assert len(symbolic_minors(tf.psi, 4)) == 5


def test_minor_size_checked():
    tf = transfer_function(gallery("grid"))
    with pytest.raises(ValueError):
        symbolic_minors(tf.psi, 3)


def test_polynomial_matrix_rejects_mixed_d():
    from crystalflex.algebra import PolynomialMatrix

    with pytest.raises(ValueError):
        PolynomialMatrix(((Z1, LaurentPolynomial.variable(0, 3)),), 2)
