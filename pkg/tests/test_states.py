import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepcheck.linalg import partial_trace, partial_transpose
from sepcheck.states import (DensityMatrix, PureState, SchmidtVector, StateError, basis_state, ghz,
                             product_state, pt_min_eigenvalue, qubit, random_biseparable,
                             random_density, random_pure, random_schmidt, random_separable,
                             rho_abc, rho_alpha, schmidt_pure, w_state, werner, white_noise_mix)


def test_density_matrix_validation():
    with pytest.raises(StateError):
        DensityMatrix(np.array([[1, 1], [0, 0]]), (2,))
    with pytest.raises(StateError):
        DensityMatrix(np.eye(2), (2,))
    with pytest.raises(StateError):
        DensityMatrix(np.diag([1.5, -0.5]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_density_matrix_is_read_only():
    rho = DensityMatrix(np.eye(2) / 2, (2,))
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_pure_state_norm():
    with pytest.raises(StateError):
        PureState(np.array([1, 1]), (2,))
    psi = PureState(np.array([1, 1j]) / np.sqrt(2), (2,))
    assert np.allclose(psi.projector(), [[0.5, -0.5j], [0.5j, 0.5]])


def test_qubit_parametrization():
    assert np.allclose(qubit(0, 1.0), [1, 0])
    assert np.allclose(qubit(np.pi, 0), [0, 1])
    assert np.allclose(qubit(np.pi / 2, np.pi / 2), [1 / np.sqrt(2), 1j / np.sqrt(2)])


def test_product_and_basis_state():
    v = product_state(basis_state(1, (2,)), basis_state(0, (3,)))
    assert v.dims == (2, 3)
    assert v.amplitudes[3] == 1


def test_schmidt_vector_sorted():
    s = SchmidtVector([0.6, 0.8])
    assert np.allclose(s.coefficients, [0.8, 0.6])
    with pytest.raises(StateError):
        SchmidtVector([0.5, 0.5])
    with pytest.raises(StateError):
        schmidt_pure([0.6, 0.8, 0.0], 2)


def test_rho_abc_entries():
    rho = rho_abc(1, 1, 1).matrix
    assert rho[0, 7] == pytest.approx(1 / 8)
    assert rho[0, 0] == pytest.approx(1 / 8)
    rho = rho_abc(2, 3, 5).matrix
    n = 2 + 2 + 3 + 5 + 1 / 2 + 1 / 3 + 1 / 5
    assert np.allclose(np.diag(rho).real * n, [1, 2, 3, 1 / 5, 5, 1 / 3, 1 / 2, 1])
    with pytest.raises(StateError):
        rho_abc(0, 1, 1)


@pytest.mark.parametrize("abc", [(0.25, 0.25, 0.25), (0.5, 2, 3), (4, 4, 4), (0.3, 1.7, 0.9)])
def test_rho_abc_ppt_every_cut(abc):
    rho = rho_abc(*abc)
    for k in range(3):
        assert pt_min_eigenvalue(rho, k) >= -1e-12


def test_rho_alpha():
    rho = rho_alpha(2).matrix
    assert rho[0, 0] == pytest.approx(0.25)
    assert rho[2, 5] == pytest.approx(-2 / 24)
    for alpha in (2, 2.4, 2.83, 3.5):
        r = rho_alpha(alpha)
        for k in range(3):
            assert pt_min_eigenvalue(r, k) >= -1e-12
    with pytest.raises(StateError):
        rho_alpha(1.9)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 1.0])
def test_werner_pt_eigenvalue(p):
    assert pt_min_eigenvalue(werner(p), 0) == pytest.approx((1 - 3 * p) / 4, abs=1e-12)


def test_white_noise_mix_bounds():
    psi = schmidt_pure([1, 0], 2)
    with pytest.raises(StateError):
        white_noise_mix(psi, 1.2)
    assert np.allclose(white_noise_mix(psi, 0).matrix, np.eye(4) / 4)


def test_ghz_and_w():
    g = ghz(3).density().matrix
    assert g[0, 7] == pytest.approx(0.5)
    w = w_state(3).amplitudes
    assert np.allclose(np.nonzero(w)[0], [1, 2, 4])
    with pytest.raises(StateError):
        ghz(1)


def test_random_states_deterministic():
    a = random_density(4, seed=7).matrix
    b = random_density(4, seed=7).matrix
    assert np.array_equal(a, b)
    assert np.array_equal(random_pure((2, 3), 1).amplitudes, random_pure((2, 3), 1).amplitudes)
    assert np.linalg.matrix_rank(random_density(6, rank=2, seed=1).matrix, tol=1e-10) == 2
    with pytest.raises(StateError):
        random_density(3, rank=4)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), dims=st.lists(st.integers(2, 3), min_size=2, max_size=3),
       terms=st.integers(1, 6))
def test_random_separable_is_ppt_everywhere(seed, dims, terms):
    rho = random_separable(dims, terms, seed)
    for k in range(len(dims)):
        assert pt_min_eigenvalue(rho, k) >= -1e-10


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_random_biseparable_terms_are_products(seed):
    # one term: a pure state that factorizes across some cut, so one party's
    # reduced state or the complementary pair's is pure
    rho = random_biseparable((2, 2, 2), 1, seed).matrix
    purities = [np.trace(np.linalg.matrix_power(partial_trace(rho, (2, 2, 2), [k]), 2)).real
                for k in range(3)]
    assert max(purities) == pytest.approx(1.0, abs=1e-10)


def test_random_schmidt():
    s = random_schmidt(4, seed=2)
    assert len(s) == 4
    assert np.all(np.diff(s.coefficients) <= 0)


def test_pt_min_eigenvalue_bad_party():
    with pytest.raises(StateError):
        pt_min_eigenvalue(werner(0.5), 3)


def test_partial_transpose_preserves_trace_of_states():
    rho = random_density(8, seed=3, dims=(2, 2, 2))
    assert np.trace(partial_transpose(rho.matrix, rho.dims, [0, 2])).real == pytest.approx(1.0)
