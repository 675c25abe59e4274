"""Dense complex linear algebra for small multipartite systems.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  A subsystem
shape is a tuple of local dimensions ``(d_0, ..., d_{N-1})``; party 0 is the
leftmost tensor factor, so the composite index is row-major
``i = sum_k i_k * prod_{l>k} d_l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_CLAMP = 1e-10


class LinalgError(ValueError):
    """Raised when an input violates a numerical precondition."""


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise LinalgError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise LinalgError("matrix has non-finite entries")
    return m


def check_shape(dims: Sequence[int], dim: int | None = None) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) < 1 or any(d < 1 for d in dims):
        raise LinalgError(f"invalid subsystem shape {dims}")
    if dim is not None and int(np.prod(dims)) != dim:
        raise LinalgError(f"shape {dims} does not factor dimension {dim}")
    return dims


def kron(*ops) -> np.ndarray:
    """Tensor product of one or more matrices (or vectors), left to right."""
    if not ops:
        raise LinalgError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def dagger(a) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def embed(op, party: int, dims: Sequence[int]) -> np.ndarray:
    """Lift a local operator on ``party`` to the full space (identity elsewhere)."""
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[party] = np.asarray(op, dtype=complex)
    return kron(*factors)


def partial_transpose(rho, dims: Sequence[int], party: int | Iterable[int]) -> np.ndarray:
    """Transpose the indices of one party (or of each party in a collection).

    Raises
    ------
    LinalgError
        If a party index is out of range or the shape does not match.
    """
    rho = as_matrix(rho)
    dims = check_shape(dims, rho.shape[0])
    if rho.shape[0] != rho.shape[1]:
        raise LinalgError("partial transpose needs a square matrix")
    parties = [party] if isinstance(party, (int, np.integer)) else list(party)
    n = len(dims)
    for k in parties:
        if not 0 <= k < n:
            raise LinalgError(f"party {k} out of range for {n} parties")
    t = rho.reshape(dims + dims)
    for k in set(parties):
        t = np.swapaxes(t, k, n + k)
    return t.reshape(rho.shape).copy()


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced matrix on the parties in ``keep`` (kept in their original order)."""
    rho = as_matrix(rho)
    dims = check_shape(dims, rho.shape[0])
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    if not keep:
        raise LinalgError("partial_trace needs a nonempty keep set")
    if keep[0] < 0 or keep[-1] >= n:
        raise LinalgError(f"keep set {keep} out of range for {n} parties")
    t = rho.reshape(dims + dims)
    # trace out from the highest axis down so remaining axis numbers stay valid
    cur = n
    for k in reversed(range(n)):
        if k not in keep:
            t = np.trace(t, axis1=k, axis2=k + cur)
            cur -= 1
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def permute_parties(rho, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors so that new party ``j`` is old party ``order[j]``."""
    rho = as_matrix(rho)
    dims = check_shape(dims, rho.shape[0])
    n = len(dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise LinalgError(f"{order} is not a permutation of {n} parties")
    t = rho.reshape(dims + dims).transpose(order + [n + k for k in order])
    return t.reshape(rho.shape).copy()


def permute_vector(psi, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    dims = check_shape(dims, psi.shape[0])
    return psi.reshape(dims).transpose(list(order)).reshape(-1).copy()


@dataclass(frozen=True)
class HermitianEigenSystem:
    """Eigenvalues in ascending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _hermitian_part(h: np.ndarray) -> np.ndarray:
    if h.shape[0] != h.shape[1]:
        raise LinalgError("Hermitian eigensolver needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise LinalgError("matrix is not Hermitian within tolerance")
    return 0.5 * (h + h.conj().T)


def jacobi_eigh(h, tol: float = 1e-14, max_sweeps: int = 100) -> HermitianEigenSystem:
    """Cyclic complex Jacobi eigensolver.

    Each rotation first rephases column ``q`` so the pivot is real, then applies
    the classical real symmetric rotation that zeros it.  Sweeps stop once the
    off-diagonal Frobenius mass drops below ``tol * ||H||_F``.
    """
    a = _hermitian_part(as_matrix(h)).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0.0 or n == 1:
        w = np.real(np.diag(a)).copy()
        return HermitianEigenSystem(w, v)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = a[p, q]
                mag = abs(hpq)
                if mag < 1e-300:
                    continue
                w = np.conj(hpq) / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(tau) > 1e100:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                u = np.array([[c, s], [-s * w, c * w]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ u
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return HermitianEigenSystem(w[order].copy(), v[:, order].copy())


def hermitian_eig(h, method: str = "lapack") -> HermitianEigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    The input is checked for Hermiticity (1e-10 relative to its largest entry)
    and symmetrized before solving.  ``method="jacobi"`` uses the in-house
    cyclic Jacobi solver; the default delegates to LAPACK via ``numpy``.
    """
    if method == "jacobi":
        return jacobi_eigh(h)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    a = _hermitian_part(as_matrix(h))
    w, v = np.linalg.eigh(a)
    return HermitianEigenSystem(w, v)


def psd_power(o, x: float) -> np.ndarray:
    """Matrix power ``O**x`` of a positive semidefinite operator, ``x >= 0``.

    Eigenvalues in ``[-1e-10, 0)`` (scaled by the operator magnitude) are
    clamped to zero; anything more negative raises ``LinalgError``.
    """
    if x < 0:
        raise LinalgError("psd_power needs a nonnegative exponent")
    o = as_matrix(o)
    if x == 1:
        return _hermitian_part(o)
    es = hermitian_eig(o)
    scale = max(1.0, float(np.max(np.abs(o))))
    if es.eigenvalues[0] < -PSD_CLAMP * scale:
        raise LinalgError(f"operator is not PSD (eigenvalue {es.eigenvalues[0]:.3e})")
    lam = np.clip(es.eigenvalues, 0.0, None)
    v = es.eigenvectors
    return (v * lam**x) @ v.conj().T


def expectation(rho, o) -> complex:
    """``Tr[O rho]``."""
    rho = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    o = np.asarray(o, dtype=complex)
    if rho.shape != o.shape:
        raise LinalgError(f"dimension mismatch: state {rho.shape}, operator {o.shape}")
    return complex(np.einsum("ij,ji->", o, rho))
