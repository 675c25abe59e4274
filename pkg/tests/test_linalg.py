import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepcheck.linalg import (LinalgError, embed, expectation, hermitian_eig, jacobi_eigh, kron,
                             partial_trace, partial_transpose, permute_parties, psd_power)


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + g.conj().T


def test_partial_transpose_hand_computed():
    rho = np.arange(16).reshape(4, 4)
    # transposing party 0 swaps the 2x2 blocks; party 1 transposes within blocks
    pt0 = np.array([[0, 1, 8, 9],
                    [4, 5, 12, 13],
                    [2, 3, 10, 11],
                    [6, 7, 14, 15]])
    pt1 = np.array([[0, 4, 2, 6],
                    [1, 5, 3, 7],
                    [8, 12, 10, 14],
                    [9, 13, 11, 15]])
    assert np.array_equal(partial_transpose(rho, (2, 2), 0), pt0)
    assert np.array_equal(partial_transpose(rho, (2, 2), 1), pt1)
    assert np.array_equal(partial_transpose(rho, (2, 2), [0, 1]), rho.T)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), dims=st.lists(st.integers(1, 3), min_size=1, max_size=3))
def test_partial_transpose_involution_and_full(seed, dims):
    d = int(np.prod(dims))
    h = random_hermitian(d, seed)
    for k in range(len(dims)):
        assert np.allclose(partial_transpose(partial_transpose(h, dims, k), dims, k), h)
    assert np.allclose(partial_transpose(h, dims, range(len(dims))), h.T)


def test_partial_transpose_of_product_transposes_factor():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(partial_transpose(kron(a, b), (2, 3), 0), kron(a.T, b))
    assert np.allclose(partial_transpose(kron(a, b), (2, 3), 1), kron(a, b.T))


def test_partial_transpose_errors():
    with pytest.raises(LinalgError):
        partial_transpose(np.eye(4), (2, 2), 2)
    with pytest.raises(LinalgError):
        partial_transpose(np.eye(4), (2, 3), 0)
    with pytest.raises(LinalgError):
        partial_transpose(np.ones((4, 2)), (2, 2), 0)


def test_kron_ordering_party_zero_leftmost():
    e0, e1 = np.array([1, 0]), np.array([0, 1])
    v = kron(e1, e0, e1)
    assert np.argmax(np.abs(v)) == 0b101


def test_partial_trace_of_product():
    rng = np.random.default_rng(0)
    a = np.diag(rng.random(2))
    b = np.diag(rng.random(3))
    c = np.diag(rng.random(2))
    full = kron(a, b, c)
    assert np.allclose(partial_trace(full, (2, 3, 2), [1]), b * np.trace(a) * np.trace(c))
    assert np.allclose(partial_trace(full, (2, 3, 2), [0, 2]), kron(a, c) * np.trace(b))
    with pytest.raises(LinalgError):
        partial_trace(full, (2, 3, 2), [])


def test_permute_parties_matches_kron_order():
    rng = np.random.default_rng(1)
    ops = [rng.standard_normal((d, d)) for d in (2, 3, 4)]
    full = kron(*ops)
    moved = permute_parties(full, (2, 3, 4), [2, 0, 1])
    assert np.allclose(moved, kron(ops[2], ops[0], ops[1]))
    with pytest.raises(LinalgError):
        permute_parties(full, (2, 3, 4), [0, 0, 1])


def test_embed():
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(embed(x, 1, (2, 2, 2)), kron(np.eye(2), x, np.eye(2)))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 16, 32])
def test_jacobi_matches_lapack(n):
    h = random_hermitian(n, 100 + n)
    es = jacobi_eigh(h)
    assert np.allclose(es.eigenvalues, np.linalg.eigvalsh(h), atol=1e-11 * max(1, np.abs(h).max()))
    assert np.linalg.norm(es.reconstruct() - h) <= 1e-12 * np.linalg.norm(h)
    v = es.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_jacobi_degenerate_and_diagonal():
    es = jacobi_eigh(np.diag([3.0, 1.0, 1.0, -2.0]))
    assert np.allclose(es.eigenvalues, [-2, 1, 1, 3])
    proj = np.full((4, 4), 0.25)
    assert np.allclose(hermitian_eig(proj, "jacobi").eigenvalues, [0, 0, 0, 1], atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 10))
def test_eigensolvers_agree(seed, n):
    h = random_hermitian(n, seed)
    a = hermitian_eig(h)
    b = hermitian_eig(h, method="jacobi")
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)


def test_hermitian_check():
    with pytest.raises(LinalgError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        hermitian_eig(np.eye(2), method="qr")


def test_psd_power():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    p = g @ g.conj().T
    root = psd_power(p, 0.5)
    assert np.allclose(root @ root, p)
    assert np.allclose(psd_power(p, 1.5), p @ root)
    proj = np.diag([1.0, 0.0])
    assert np.allclose(psd_power(proj, 1.5), proj)
    with pytest.raises(LinalgError):
        psd_power(np.diag([1.0, -1e-3]), 0.5)
    with pytest.raises(LinalgError):
        psd_power(p, -1)


def test_psd_power_clamps_tiny_negative():
    out = psd_power(np.diag([1.0, -1e-13]), 2)
    assert np.allclose(out, np.diag([1.0, 0.0]))


def test_expectation():
    rho = np.diag([0.25, 0.75])
    assert expectation(rho, np.diag([1, -1])) == pytest.approx(-0.5)
    with pytest.raises(LinalgError):
        expectation(rho, np.eye(3))
