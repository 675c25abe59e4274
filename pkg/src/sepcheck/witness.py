"""Closed-form operator choices that certify NPT entanglement."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .criteria import DEFAULT_TOL, EvaluationResult, LocalOperatorSet, builtin_spec, evaluate_spec
from .linalg import hermitian_eig, partial_transpose, permute_parties
from .states import DensityMatrix, PureState, SchmidtVector, as_density, as_vector, white_noise_mix

EIG_TOL = 1e-10
RATIO_TOL = 1e-8


class WitnessError(ValueError):
    """No valid witness could be built for the given input."""


def schmidt_decompose(psi, dims: Sequence[int] | None = None):
    """Return ``(s, U, V)`` with ``psi = sum_j s_j U[:, j] (x) V[:, j]``.

    ``s`` is sorted descending and real nonnegative; ``U`` and ``V`` are unitary.
    Vectors for zero coefficients are completed to an orthonormal basis.
    """
    v = as_vector(psi)
    dims = tuple(dims if dims is not None else getattr(psi, "dims", ()))
    if len(dims) != 2 or dims[0] * dims[1] != v.shape[0]:
        raise WitnessError(f"Schmidt decomposition needs a bipartite shape, got {dims}")
    da, db = dims
    m = v.reshape(da, db)
    es = hermitian_eig(m @ m.conj().T)
    lam = np.clip(es.eigenvalues[::-1], 0.0, None)
    u = es.eigenvectors[:, ::-1]
    k = min(da, db)
    s = np.sqrt(lam[:k])
    vcols = []
    for j in range(k):
        if s[j] > 1e-12:
            vcols.append(m.T @ u[:, j].conj() / s[j])
        else:
            s[j] = 0.0
    vmat = np.array(vcols, dtype=complex).T.reshape(db, len(vcols))
    vmat = _complete_basis(vmat, db)
    return s, u, vmat


def _complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a full unitary (Gram-Schmidt on unit vectors)."""
    basis = [c for c in cols.T]
    for e in np.eye(dim, dtype=complex):
        if len(basis) == dim:
            break
        w = e - sum((b.conj() @ e) * b for b in basis)
        n = np.linalg.norm(w)
        if n > 1e-8:
            basis.append(w / n)
    return np.array(basis).T


@dataclass(frozen=True, eq=False)
class PTDiagnostics:
    """Eigensystem of the partial transpose across ``bipartition | rest``.

    ``order`` lists the parties with the ``bipartition`` side first; vectors
    live on the regrouped space of shape ``dims``.
    """

    bipartition: tuple[int, ...]
    order: tuple[int, ...]
    dims: tuple[int, int]
    eigenvalues: np.ndarray
    min_eigenvalue: float
    negative_eigenvectors: list
    positive_eigenvectors: list
    negative_eigenvalues: np.ndarray
    positive_eigenvalues: np.ndarray

    @property
    def is_npt(self) -> bool:
        return self.min_eigenvalue < -EIG_TOL


def _regroup(rho: DensityMatrix, bipartition) -> tuple[tuple[int, ...], tuple[int, ...], np.ndarray, tuple[int, int]]:
    n = rho.n_parties
    side = sorted(set(int(k) for k in bipartition))
    if not side or len(side) >= n or side[0] < 0 or side[-1] >= n:
        raise WitnessError(f"{side} is not a proper bipartition of {n} parties")
    rest = [k for k in range(n) if k not in side]
    order = side + rest
    m = permute_parties(rho.matrix, rho.dims, order)
    da = int(np.prod([rho.dims[k] for k in side]))
    return tuple(side), tuple(order), m, (da, rho.dim // da)


def ppt_diagnostics(rho, bipartition=(0,)) -> PTDiagnostics:
    rho = as_density(rho)
    side, order, m, dims = _regroup(rho, bipartition)
    es = hermitian_eig(partial_transpose(m, dims, 0))
    lam, vecs = es.eigenvalues, es.eigenvectors
    neg = np.nonzero(lam < -EIG_TOL)[0]
    pos = np.nonzero(lam > EIG_TOL)[0]
    return PTDiagnostics(
        bipartition=side, order=order, dims=dims, eigenvalues=lam,
        min_eigenvalue=float(lam[0]),
        negative_eigenvectors=[PureState(vecs[:, j], dims) for j in neg],
        positive_eigenvectors=[PureState(vecs[:, j], dims) for j in pos],
        negative_eigenvalues=lam[neg], positive_eigenvalues=lam[pos],
    )


@dataclass(frozen=True, eq=False)
class WitnessCandidate:
    """Operators for the two-term bipartite criterion on the regrouped space.

    ``vectors`` holds ``(a1, a2, b1, b2)`` in the partially transposed frame.
    """

    operators: LocalOperatorSet
    c_plus: complex | None
    c_minus: complex | None
    predicted_margin: float
    order: tuple[int, ...]
    dims: tuple[int, int]
    vectors: tuple = ()
    sign_check: float = float("nan")
    details: dict = field(default_factory=dict)

    def evaluate(self, rho, tol: float = DEFAULT_TOL) -> EvaluationResult:
        rho = as_density(rho)
        m = permute_parties(rho.matrix, rho.dims, self.order)
        return evaluate_spec(builtin_spec("cauchy2"), self.operators, DensityMatrix(m, self.dims), tol)

    def rank_one_vectors(self):
        """``(a, alpha, b, beta)`` for the rank-one form of the same test."""
        a1, a2, b1, b2 = self.vectors
        return a1.conj(), a2.conj(), b1, b2


def _fit_ratio(x: np.ndarray, y: np.ndarray) -> complex | None:
    """Constant ``c`` with ``x = c y`` componentwise, ``None`` if both vanish."""
    if x.size == 0:
        return None
    keep = (np.abs(x) > RATIO_TOL) | (np.abs(y) > RATIO_TOL)
    if not np.any(keep):
        return None
    x, y = x[keep], y[keep]
    yy = float(np.real(y.conj() @ y))
    if yy <= RATIO_TOL**2:
        raise WitnessError("overlap ratio is unbounded (a1,b2 orthogonal where a2,b1 is not)")
    c = complex(y.conj() @ x / yy)
    if np.max(np.abs(x - c * y)) > RATIO_TOL:
        raise WitnessError("overlap ratios differ across eigenvectors")
    return c


def lemma4_construct(rho, bipartition, a1, a2, b1, b2, alpha=None, beta=None,
                     diagnostics: PTDiagnostics | None = None) -> WitnessCandidate:
    """Build violating operators from product vectors in the PT frame.

    Requires ``<a2 b1|l> = c+ <a1 b2|l>`` over the positive eigenvectors ``l``
    of the partial transpose and ``c-`` likewise over the negative ones, with
    ``c+ conj(c-)`` real and negative.  Operators are
    ``A1 = |a1*><alpha|``, ``A2 = |alpha><a2*|``, ``B1 = |b1><beta|``,
    ``B2 = |beta><b2|``; ``alpha`` and ``beta`` default to ``a1`` and ``b1``.
    """
    rho = as_density(rho)
    diag = diagnostics if diagnostics is not None else ppt_diagnostics(rho, bipartition)
    da, db = diag.dims
    a1, a2, b1, b2 = (as_vector(v) for v in (a1, a2, b1, b2))
    if a1.shape != (da,) or a2.shape != (da,) or b1.shape != (db,) or b2.shape != (db,):
        raise WitnessError(f"vector lengths do not match the bipartition dims {diag.dims}")
    if not diag.negative_eigenvectors:
        raise WitnessError("partial transpose has no negative eigenspace (state is PPT)")
    v21 = np.kron(a2, b1)
    v12 = np.kron(a1, b2)

    def overlaps(vecs):
        mat = np.array([v.amplitudes for v in vecs])
        return mat @ v21.conj(), mat @ v12.conj()

    xp, yp = overlaps(diag.positive_eigenvectors) if diag.positive_eigenvectors else (np.zeros(0), np.zeros(0))
    xn, yn = overlaps(diag.negative_eigenvectors)
    c_plus = _fit_ratio(xp, yp)
    c_minus = _fit_ratio(xn, yn)
    if c_plus is None and c_minus is None:
        raise WitnessError("product vectors are orthogonal to every eigenvector (degenerate)")
    if c_minus is None:
        raise WitnessError("product vectors do not overlap the negative eigenspace")
    sign_check = float("nan")
    if c_plus is not None:
        prod = c_plus * np.conj(c_minus)
        sign_check = float(prod.real)
        if not (prod.real < 0 and abs(prod.imag) <= RATIO_TOL * max(1.0, abs(prod))):
            raise WitnessError(f"c+ conj(c-) = {prod:.3g} is not real negative")
    P = float(np.sum(diag.positive_eigenvalues * np.abs(yp) ** 2)) if yp.size else 0.0
    N = float(np.sum(np.abs(diag.negative_eigenvalues) * np.abs(yn) ** 2))
    cp = 0.0 if c_plus is None else c_plus
    ls = abs(np.conj(cp) * P - np.conj(c_minus) * N)
    rs2 = (abs(cp) ** 2 * P - abs(c_minus) ** 2 * N) * (P - N)

    alpha = a1 if alpha is None else as_vector(alpha)
    beta = b1 if beta is None else as_vector(beta)
    alpha = alpha / np.linalg.norm(alpha)
    beta = beta / np.linalg.norm(beta)
    A1 = np.outer(a1.conj(), alpha.conj())
    A2 = np.outer(alpha, a2)
    B1 = np.outer(b1, beta.conj())
    B2 = np.outer(beta, b2.conj())
    ops = LocalOperatorSet(((A1, A2), (B1, B2)))
    return WitnessCandidate(ops, c_plus, c_minus, float(ls**2 - rs2), diag.order, diag.dims,
                            (a1, a2, b1, b2), sign_check, {"P": P, "N": N})


def two_qubit_witness(rho) -> WitnessCandidate:
    """Violating operators for any NPT two-qubit state.

    The negative eigenvector of the partial transpose is Schmidt-decomposed as
    ``s0|u0 v0> + s1|u1 v1>``; the product vectors ``|u0 v0>`` and ``|u1 v1>``
    satisfy the ratio conditions with ``c+ = -s1/s0`` and ``c- = s0/s1``.
    """
    rho = as_density(rho)
    if rho.dims != (2, 2):
        raise WitnessError(f"two_qubit_witness needs a 2x2 state, got {rho.dims}")
    diag = ppt_diagnostics(rho, (0,))
    if not diag.is_npt:
        raise WitnessError(f"state is PPT (min PT eigenvalue {diag.min_eigenvalue:.3e})")
    if len(diag.negative_eigenvectors) != 1:
        raise WitnessError("two-qubit partial transpose has more than one negative eigenvalue")
    s, u, v = schmidt_decompose(diag.negative_eigenvectors[0])
    return lemma4_construct(rho, (0,), u[:, 1], u[:, 0], v[:, 0], v[:, 1], diagnostics=diag)


def white_noise_threshold(s) -> float:
    """Smallest ``p`` at which the white-noise mixture of a pure state turns NPT."""
    s = SchmidtVector(s).coefficients
    if len(s) < 2 or s[1] == 0.0:
        return float("inf")
    d = len(s) ** 2
    return 1.0 / (1.0 + d * s[0] * s[1])


def white_noise_spectrum(s, p: float) -> np.ndarray:
    """Predicted PT spectrum of ``p|psi><psi| + (1-p) I/D``, ``psi = sum s_j |jj>``."""
    s = np.asarray(SchmidtVector(s).coefficients)
    n = len(s)
    base = (1.0 - p) / (n * n)
    vals = [base + p * s[j] ** 2 for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            vals += [base + p * s[j] * s[k], base - p * s[j] * s[k]]
    return np.sort(np.array(vals))


def white_noise_witness(psi, p: float) -> WitnessCandidate:
    """Violating operators for ``p|psi><psi| + (1-p) I/D`` with bipartite ``psi``.

    In the Schmidt basis ``psi = sum_j s_j |u_j v_j>``, the partial transpose
    has eigenvectors ``|u_j* v_k> +- |u_k* v_j>``; the pair maximizing
    ``s_j s_k`` carries the most negative eigenvalue.
    """
    v = as_vector(psi)
    dims = tuple(getattr(psi, "dims", ()))
    if len(dims) != 2 or dims[0] != dims[1]:
        raise WitnessError("white_noise_witness needs a bipartite state with equal local dims")
    d = dims[0]
    s, u, w = schmidt_decompose(v, dims)
    full = np.zeros(d)
    full[: len(s)] = s
    predicted_min = white_noise_spectrum(full, p)[0]
    if predicted_min >= -EIG_TOL:
        raise WitnessError(f"p={p} is in the PPT region (min PT eigenvalue {predicted_min:.3e})")
    j0, k0 = 0, 1  # coefficients are sorted, so this pair maximizes s_j s_k
    rho = white_noise_mix(PureState(v, dims), p)
    return lemma4_construct(rho, (0,), u[:, k0].conj(), u[:, j0].conj(), w[:, k0], w[:, j0])


def schmidt_pair_witness(rho, bipartition=(0,)) -> WitnessCandidate:
    """Try the two leading Schmidt pairs of the most negative PT eigenvector.

    Generalizes the two-qubit construction to any bipartition; succeeds
    whenever the ratio conditions hold (e.g. white-noise mixtures).
    """
    rho = as_density(rho)
    diag = ppt_diagnostics(rho, bipartition)
    if not diag.is_npt:
        raise WitnessError(f"state is PPT across {list(diag.bipartition)}")
    s, u, v = schmidt_decompose(diag.negative_eigenvectors[0])
    if len(s) < 2 or s[1] <= 0.0:
        raise WitnessError("negative eigenvector has Schmidt rank one")
    return lemma4_construct(rho, bipartition, u[:, 1], u[:, 0], v[:, 0], v[:, 1], diagnostics=diag)
