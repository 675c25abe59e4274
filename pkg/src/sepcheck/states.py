"""State families and seeded random ensembles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import LinalgError, as_matrix, check_shape, kron, partial_transpose, permute_vector

STATE_TOL = 1e-10
NORM_TOL = 1e-12


class StateError(ValueError):
    """Invalid state parameters or a matrix that is not a density matrix."""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix over a subsystem shape."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = check_shape(self.dims, m.shape[0])
        if m.shape[0] != m.shape[1]:
            raise StateError("density matrix must be square")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > STATE_TOL * scale:
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > STATE_TOL:
            raise StateError(f"trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] < -STATE_TOL:
            raise StateError("density matrix has a negative eigenvalue")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = check_shape(self.dims, v.shape[0])
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise StateError(f"state norm {np.linalg.norm(v):.15g} != 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.projector(), self.dims)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SchmidtVector:
    """Nonnegative coefficients, sorted descending, with unit 2-norm."""

    coefficients: np.ndarray

    def __post_init__(self):
        s = self.coefficients
        if isinstance(s, SchmidtVector):
            s = s.coefficients
        s = np.asarray(s, dtype=float).reshape(-1)
        if s.size == 0 or np.any(s < 0):
            raise StateError("Schmidt coefficients must be nonnegative")
        if abs(np.sum(s**2) - 1.0) > NORM_TOL:
            raise StateError("Schmidt coefficients must have unit 2-norm")
        s = np.sort(s)[::-1].copy()
        s.setflags(write=False)
        object.__setattr__(self, "coefficients", s)

    def __len__(self):
        return self.coefficients.shape[0]


def as_density(rho, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Coerce arrays and pure states to a ``DensityMatrix``."""
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    m = as_matrix(rho)
    if dims is None:
        dims = (m.shape[0],)
    return DensityMatrix(m, tuple(dims))


def as_vector(v) -> np.ndarray:
    return np.asarray(getattr(v, "amplitudes", v), dtype=complex).reshape(-1)


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def basis_state(index: int, dims: Sequence[int]) -> PureState:
    dims = check_shape(dims)
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[index] = 1.0
    return PureState(v, dims)


def qubit(theta: float, phi: float) -> np.ndarray:
    """``cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``."""
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def product_state(*locals_) -> PureState:
    if not locals_:
        raise StateError("product_state needs at least one factor")
    dims = []
    vecs = []
    for s in locals_:
        v = as_vector(s)
        vecs.append(v)
        dims.extend(getattr(s, "dims", (v.shape[0],)))
    return PureState(kron(*vecs), tuple(dims))


def schmidt_pure(s, local_dim: int) -> PureState:
    """``sum_j s_j |jj>`` on a ``local_dim x local_dim`` system."""
    if not isinstance(s, SchmidtVector):
        s = SchmidtVector(s)
    if len(s) > local_dim:
        raise StateError(f"{len(s)} Schmidt coefficients do not fit local dim {local_dim}")
    v = np.zeros(local_dim * local_dim, dtype=complex)
    for j, c in enumerate(s.coefficients):
        v[j * local_dim + j] = c
    return PureState(v, (local_dim, local_dim))


def white_noise_mix(psi, p: float) -> DensityMatrix:
    """``p |psi><psi| + (1-p) I/D`` with ``D`` the full dimension."""
    if not 0.0 <= p <= 1.0:
        raise StateError(f"mixing weight p={p} outside [0, 1]")
    v = as_vector(psi)
    dims = getattr(psi, "dims", (v.shape[0],))
    d = v.shape[0]
    m = p * np.outer(v, v.conj()) + (1.0 - p) / d * np.eye(d)
    return DensityMatrix(m, dims)


def werner(p: float) -> DensityMatrix:
    """Two-qubit ``p |psi-><psi-| + (1-p) I/4``."""
    singlet = PureState(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))
    return white_noise_mix(singlet, p)


def rho_abc(a: float, b: float, c: float) -> DensityMatrix:
    """Three-qubit state with unit corner coherence and diagonal
    ``(1, a, b, 1/c, c, 1/b, 1/a, 1)``, normalized by ``2 + a + b + c + 1/a + 1/b + 1/c``.

    PPT across every bipartition.
    """
    if min(a, b, c) <= 0:
        raise StateError("rho_abc needs a, b, c > 0")
    diag = np.array([1.0, a, b, 1 / c, c, 1 / b, 1 / a, 1.0])
    m = np.diag(diag).astype(complex)
    m[0, 7] = m[7, 0] = 1.0
    return DensityMatrix(m / diag.sum(), (2, 2, 2))


def rho_alpha(alpha: float) -> DensityMatrix:
    """Three-qubit bound entangled family, valid for ``alpha >= 2``."""
    if alpha < 2:
        raise StateError("rho_alpha is a valid state only for alpha >= 2")
    m = np.diag([4 + alpha] + [alpha] * 6 + [4 + alpha]).astype(complex)
    for i, j, v in ((0, 7, 2.0), (1, 6, 2.0), (2, 5, -2.0), (3, 4, 2.0)):
        m[i, j] = m[j, i] = v
    return DensityMatrix(m / (8 + 8 * alpha), (2, 2, 2))


def ghz(n_parties: int) -> PureState:
    if n_parties < 2:
        raise StateError("GHZ needs at least two parties")
    v = np.zeros(2**n_parties, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(v, (2,) * n_parties)


def w_state(n_parties: int = 3) -> PureState:
    v = np.zeros(2**n_parties, dtype=complex)
    for k in range(n_parties):
        v[1 << k] = 1.0
    return PureState(v / np.sqrt(n_parties), (2,) * n_parties)


def _gaussian(rng, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure(dims: Sequence[int], seed=None) -> PureState:
    """Normalized complex Gaussian vector."""
    dims = check_shape(dims)
    v = _gaussian(rng_from(seed), int(np.prod(dims)))
    return PureState(v / np.linalg.norm(v), dims)


def random_density(dim: int, rank: int | None = None, seed=None,
                   dims: Sequence[int] | None = None) -> DensityMatrix:
    """``G G^dag / Tr(G G^dag)`` for a complex Gaussian ``dim x rank`` matrix ``G``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise StateError(f"rank {rank} invalid for dimension {dim}")
    g = _gaussian(rng_from(seed), (dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, dims if dims is not None else (dim,))


def _flat_dirichlet(rng, n: int) -> np.ndarray:
    w = rng.exponential(size=n)
    return w / w.sum()


def random_separable(dims: Sequence[int], n_terms: int, seed=None) -> DensityMatrix:
    """Random convex mixture of ``n_terms`` pure fully-product states."""
    if n_terms < 1:
        raise StateError("random_separable needs n_terms >= 1")
    dims = check_shape(dims)
    rng = rng_from(seed)
    weights = _flat_dirichlet(rng, n_terms)
    d = int(np.prod(dims))
    m = np.zeros((d, d), dtype=complex)
    for w in weights:
        v = product_state(*(random_pure((dk,), rng) for dk in dims)).amplitudes
        m += w * np.outer(v, v.conj())
    return DensityMatrix(m, dims)


def random_biseparable(dims: Sequence[int], n_terms: int, seed=None) -> DensityMatrix:
    """Random mixture of pure states, each a product across a random bipartition.

    Each side of the bipartition holds a random (generally entangled) pure
    state, so the ensemble covers all partition classes.
    """
    dims = check_shape(dims)
    n = len(dims)
    if n < 2:
        raise StateError("biseparable states need at least two parties")
    rng = rng_from(seed)
    weights = _flat_dirichlet(rng, n_terms)
    d = int(np.prod(dims))
    m = np.zeros((d, d), dtype=complex)
    for w in weights:
        while True:
            mask = rng.integers(0, 2, size=n)
            if 0 < mask.sum() < n:
                break
        side_a = [k for k in range(n) if mask[k]]
        side_b = [k for k in range(n) if not mask[k]]
        va = random_pure([dims[k] for k in side_a], rng).amplitudes
        vb = random_pure([dims[k] for k in side_b], rng).amplitudes
        grouped = np.kron(va, vb)
        order = side_a + side_b
        # grouped lives on parties in `order`; undo that ordering
        inverse = list(np.argsort(order))
        v = permute_vector(grouped, [dims[k] for k in order], inverse)
        m += w * np.outer(v, v.conj())
    return DensityMatrix(m, dims)


def random_schmidt(n: int, seed=None) -> SchmidtVector:
    s = np.abs(rng_from(seed).standard_normal(n))
    return SchmidtVector(s / np.linalg.norm(s))


def pt_min_eigenvalue(rho: DensityMatrix, parties) -> float:
    try:
        return float(np.linalg.eigvalsh(partial_transpose(rho.matrix, rho.dims, parties))[0])
    except LinalgError as exc:
        raise StateError(str(exc)) from exc
