"""Named separability inequalities built on the Cauchy-Schwarz scheme."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .criteria import (DEFAULT_TOL, CriterionError, EvaluationResult, LocalOperatorSet,
                       builtin_spec, evaluate_spec)
from .linalg import embed, kron, psd_power
from .states import DensityMatrix, PureState, as_density, as_vector


def _pop(m: np.ndarray, v: np.ndarray) -> float:
    return max(float(np.real(v.conj() @ m @ v)), 0.0)


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, PureState):
        return rho.projector()
    return np.asarray(getattr(rho, "matrix", rho), dtype=complex)


def _require_parties(rho: DensityMatrix, n: int | None = None, minimum: int | None = None):
    if n is not None and rho.n_parties != n:
        raise CriterionError(f"criterion needs {n} parties, state has {rho.n_parties}")
    if minimum is not None and rho.n_parties < minimum:
        raise CriterionError(f"criterion needs at least {minimum} parties")


def _local_vectors(rho: DensityMatrix, vecs, parties: Sequence[int]):
    out = []
    for v, k in zip(vecs, parties):
        v = as_vector(v)
        if v.shape[0] != rho.dims[k]:
            raise CriterionError(f"vector of length {v.shape[0]} on party of dim {rho.dims[k]}")
        out.append(v)
    return out


def evaluate_rank_one(rho, a, alpha, b, beta, tol: float = DEFAULT_TOL) -> EvaluationResult:
    """``|<alpha,beta|rho|a,b>| <= sqrt(<a,beta|rho|a,beta> <alpha,b|rho|alpha,b>)``."""
    rho = as_density(rho)
    _require_parties(rho, 2)
    a, alpha, b, beta = _local_vectors(rho, (a, alpha, b, beta), (0, 0, 1, 1))
    m = rho.matrix
    lhs = abs(np.kron(alpha, beta).conj() @ m @ np.kron(a, b))
    rhs = np.sqrt(_pop(m, np.kron(a, beta)) * _pop(m, np.kron(alpha, b)))
    return EvaluationResult.of(lhs, rhs, tol)


def _E_parts(m: np.ndarray, basis) -> tuple[float, float]:
    (a1, a2), (b1, b2), (c1, c2) = basis
    lhs = abs(kron(a1, b1, c1).conj() @ m @ kron(a2, b2, c2))
    pops = (_pop(m, kron(a1, b1, c2)), _pop(m, kron(a1, b2, c1)),
            _pop(m, kron(a2, b1, c1)), _pop(m, kron(a2, b2, c2)))
    return float(lhs), float(np.prod(pops) ** 0.25)


def evaluate_E(rho, basis) -> float:
    """Three-qubit quantity that is positive only for entangled states.

    ``basis`` holds one pair ``(v1, v2)`` of local vectors per party.
    """
    rho = as_density(rho, (2, 2, 2))
    _require_parties(rho, 3)
    vecs = [tuple(_local_vectors(rho, pair, (k, k))) for k, pair in enumerate(basis)]
    if len(vecs) != 3:
        raise CriterionError("E needs one vector pair per party")
    lhs, rhs = _E_parts(rho.matrix, vecs)
    return lhs - rhs


def E_result(rho, basis, tol: float = DEFAULT_TOL) -> EvaluationResult:
    rho = as_density(rho, (2, 2, 2))
    vecs = [tuple(_local_vectors(rho, pair, (k, k))) for k, pair in enumerate(basis)]
    lhs, rhs = _E_parts(rho.matrix, vecs)
    return EvaluationResult.of(lhs, rhs, tol)


def hillery_zubairy(rho, A, B, mode: str = "correlated", tol: float = DEFAULT_TOL) -> EvaluationResult:
    """Single-operator-per-party bounds.

    ``product``:    ``|<A B>|^2 <= <A^dag A><B^dag B>``
    ``correlated``: ``|<A^dag B>|^2 <= <A^dag A B^dag B>``
    """
    rho = as_density(rho)
    _require_parties(rho, 2)
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != (rho.dims[0],) * 2 or B.shape != (rho.dims[1],) * 2:
        raise CriterionError("operator dimensions do not match the state")
    m = rho.matrix
    ada = A.conj().T @ A
    bdb = B.conj().T @ B
    if mode == "product":
        lhs = abs(np.einsum("ij,ji->", np.kron(A, B), m)) ** 2
        ea = np.einsum("ij,ji->", np.kron(ada, np.eye(rho.dims[1])), m).real
        eb = np.einsum("ij,ji->", np.kron(np.eye(rho.dims[0]), bdb), m).real
        rhs = max(ea, 0.0) * max(eb, 0.0)
    elif mode == "correlated":
        lhs = abs(np.einsum("ij,ji->", np.kron(A.conj().T, B), m)) ** 2
        rhs = max(np.einsum("ij,ji->", np.kron(ada, bdb), m).real, 0.0)
    else:
        raise CriterionError(f"unknown Hillery-Zubairy mode {mode!r}")
    return EvaluationResult.of(lhs, rhs, tol)


def _check_ops(rho: DensityMatrix, ops: Sequence) -> list[np.ndarray]:
    ops = [np.asarray(o, dtype=complex) for o in ops]
    if len(ops) != rho.n_parties:
        raise CriterionError(f"need {rho.n_parties} operators, got {len(ops)}")
    for o, d in zip(ops, rho.dims):
        if o.shape != (d, d):
            raise CriterionError(f"operator of shape {o.shape} on party of dim {d}")
    return ops


def hz_bipartition(rho, ops: Sequence, split: int, tol: float = DEFAULT_TOL) -> EvaluationResult:
    """``|<prod A_k>|^2 <= <prod_{k<split} A_k^dag A_k prod_{k>=split} A_k A_k^dag>``.

    Holds for every state biseparable across parties ``[0, split) | [split, N)``.
    """
    rho = as_density(rho)
    ops = _check_ops(rho, ops)
    if not 1 <= split < rho.n_parties:
        raise CriterionError(f"split {split} is not a proper cut of {rho.n_parties} parties")
    m = rho.matrix
    lhs = abs(np.einsum("ij,ji->", kron(*ops), m)) ** 2
    rhs_op = kron(*(o.conj().T @ o if k < split else o @ o.conj().T for k, o in enumerate(ops)))
    rhs = max(np.einsum("ij,ji->", rhs_op, m).real, 0.0)
    return EvaluationResult.of(lhs, rhs, tol)


def hillery_multi(rho, ops: Sequence, variant: str = "geometric",
                  tol: float = DEFAULT_TOL) -> EvaluationResult:
    """Multipartite one-operator bounds (geometric or arithmetic mean form)."""
    rho = as_density(rho)
    _require_parties(rho, minimum=2)
    ops = _check_ops(rho, ops)
    n = rho.n_parties
    m = rho.matrix
    lhs = abs(np.einsum("ij,ji->", kron(*ops), m))
    if variant == "geometric":
        rhs = 1.0
        for k, o in enumerate(ops):
            local = psd_power(o.conj().T @ o, n / 2)
            val = max(np.einsum("ij,ji->", embed(local, k, rho.dims), m).real, 0.0)
            rhs *= val ** (1.0 / n)
    elif variant == "arithmetic":
        mean = sum(embed(o.conj().T @ o, k, rho.dims) for k, o in enumerate(ops)) / n
        rhs = max(np.einsum("ij,ji->", psd_power(mean, n / 2), m).real, 0.0)
    else:
        raise CriterionError(f"unknown Hillery variant {variant!r}")
    return EvaluationResult.of(lhs, rhs, tol)


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated bosonic ``a`` with ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(complex)


def _word_peak(n_max: int, word) -> int:
    """Highest occupation reached applying ``word`` (rightmost first) to support <= n_max."""
    occ = peak = n_max
    for kind, power in reversed(word):
        if kind == "a":
            occ -= power
            if occ < 0:
                return peak
        else:
            occ += power
            peak = max(peak, occ)
    return peak


def shchukin_vogel(rho, powers: Sequence[int], cutoff: int | None = None,
                   tol: float = DEFAULT_TOL) -> EvaluationResult:
    """Two-mode moment inequality with ``A_1 = a^dag^m a^n``, ``A_2 = a^dag^p a^q``,
    ``B_1 = b^dag^s b^r``, ``B_2 = b^dag^k b^l``; ``powers = (m, n, p, q, r, s, k, l)``.

    ``rho`` lives on a truncated Fock space ``cutoff x cutoff``.  The truncation
    must be exact for every operator word involved, otherwise ``CriterionError``.
    """
    rho = as_density(rho)
    _require_parties(rho, 2)
    if cutoff is None:
        cutoff = rho.dims[0]
    if rho.dims != (cutoff, cutoff):
        raise CriterionError(f"state dims {rho.dims} do not match cutoff {cutoff}")
    m_, n_, p_, q_, r_, s_, k_, l_ = (int(x) for x in powers)
    if min(m_, n_, p_, q_, r_, s_, k_, l_) < 0:
        raise CriterionError("powers must be nonnegative")

    pops = np.real(np.diag(rho.matrix)).reshape(cutoff, cutoff)
    occupied = pops > 1e-14
    na = int(np.max(np.nonzero(occupied.any(axis=1))[0], initial=0))
    nb = int(np.max(np.nonzero(occupied.any(axis=0))[0], initial=0))
    words_a = [
        [("c", m_), ("a", n_), ("c", p_), ("a", q_)],
        [("c", m_), ("a", n_), ("c", n_), ("a", m_)],
        [("c", q_), ("a", p_), ("c", p_), ("a", q_)],
    ]
    words_b = [
        [("c", s_), ("a", r_), ("c", k_), ("a", l_)],
        [("c", l_), ("a", k_), ("c", k_), ("a", l_)],
        [("c", s_), ("a", r_), ("c", r_), ("a", s_)],
    ]
    peak = max(max(_word_peak(na, w) for w in words_a), max(_word_peak(nb, w) for w in words_b))
    if peak >= cutoff:
        raise CriterionError(
            f"state support too close to cutoff {cutoff}: operators reach occupation {peak}")

    a = annihilation(cutoff)
    ad = a.conj().T
    mp = np.linalg.matrix_power
    A1 = mp(ad, m_) @ mp(a, n_)
    A2 = mp(ad, p_) @ mp(a, q_)
    B1 = mp(ad, s_) @ mp(a, r_)
    B2 = mp(ad, k_) @ mp(a, l_)
    return evaluate_spec(builtin_spec("cauchy2"), LocalOperatorSet(((A1, A2), (B1, B2))), rho, tol)


# Matrix-entry criteria on three qubits (0-based indices in |000>..|111>).
ENTRY_PATTERNS = {
    "guehne1": ((0, 7), ((1, Fraction(1, 2)), (6, Fraction(1, 2)))),
    "guehne2": ((0, 7), ((2, Fraction(1, 2)), (5, Fraction(1, 2)))),
    "guehne3": ((0, 7), ((3, Fraction(1, 2)), (4, Fraction(1, 2)))),
    "seefinck-sep": ((0, 7), tuple((i, Fraction(1, 6)) for i in range(1, 7))),
    "guehne-abc": ((0, 7), ((0, Fraction(1, 6)), (3, Fraction(1, 3)), (4, Fraction(1, 6)),
                            (5, Fraction(1, 6)), (6, Fraction(1, 6)))),
    "woelk-abc": ((0, 7), ((0, Fraction(1, 4)), (3, Fraction(1, 4)), (5, Fraction(1, 4)),
                           (6, Fraction(1, 4)))),
}


def entry_criterion(rho, offdiag: tuple[int, int], rhs_terms, tol: float = DEFAULT_TOL) -> EvaluationResult:
    """``|rho_ij| <= prod_d rho_dd ** e_d`` with exponents summing to one."""
    m = _matrix(rho)
    i, j = offdiag
    dim = m.shape[0]
    idx = [i, j] + [d for d, _ in rhs_terms]
    if any(not 0 <= x < dim for x in idx):
        raise CriterionError(f"matrix index out of range for dimension {dim}")
    if abs(sum(float(e) for _, e in rhs_terms) - 1.0) > 1e-12:
        raise CriterionError("right-hand exponents must sum to 1")
    rhs = 1.0
    for d, e in rhs_terms:
        rhs *= max(m[d, d].real, 0.0) ** float(e)
    return EvaluationResult.of(abs(m[i, j]), rhs, tol)


def named_entry_criterion(rho, name: str, tol: float = DEFAULT_TOL) -> EvaluationResult:
    try:
        offdiag, terms = ENTRY_PATTERNS[name]
    except KeyError:
        raise CriterionError(f"unknown matrix-entry criterion {name!r}") from None
    return entry_criterion(rho, offdiag, terms, tol)


def biseparable_sum(rho, tol: float = DEFAULT_TOL) -> EvaluationResult:
    """Three-qubit bound violated only by genuinely multipartite entangled states."""
    m = _matrix(rho)
    if m.shape != (8, 8):
        raise CriterionError("biseparable_sum needs a three-qubit (8x8) state")
    d = np.clip(np.real(np.diag(m)), 0.0, None)
    rhs = np.sqrt(d[1] * d[6]) + np.sqrt(d[2] * d[5]) + np.sqrt(d[3] * d[4])
    return EvaluationResult.of(abs(m[0, 7]), rhs, tol)


def all_bipartitions(n: int) -> list[frozenset]:
    """One side of every unordered proper bipartition (the side holding party 0)."""
    rest = range(1, n)
    out = []
    for r in range(0, n - 1):
        for extra in itertools.combinations(rest, r):
            out.append(frozenset((0,) + extra))
    return out


def gme_criterion(rho, X: Sequence, Y: Sequence, bipartitions=None,
                  tol: float = DEFAULT_TOL) -> EvaluationResult:
    """``|<prod X_k Y_k>|`` against a sum over bipartitions ``A_j | B_j`` of
    ``sqrt<prod_A X X^dag prod_B Y^dag Y> sqrt<prod_A Y^dag Y prod_B X X^dag>``.

    With all bipartitions (the default) only genuinely multipartite entangled
    states can violate it.
    """
    rho = as_density(rho)
    X = _check_ops(rho, X)
    Y = _check_ops(rho, Y)
    n = rho.n_parties
    if bipartitions is None:
        bipartitions = all_bipartitions(n)
    bipartitions = [frozenset(int(k) for k in side) for side in bipartitions]
    if not bipartitions:
        raise CriterionError("need at least one bipartition")
    for side in bipartitions:
        if not side or len(side) >= n or min(side) < 0 or max(side) >= n:
            raise CriterionError(f"{sorted(side)} is not a proper bipartition of {n} parties")
    m = rho.matrix
    xx = [x @ x.conj().T for x in X]
    yy = [y.conj().T @ y for y in Y]
    lhs = abs(np.einsum("ij,ji->", kron(*(x @ y for x, y in zip(X, Y))), m))
    rhs = 0.0
    for side in bipartitions:
        o1 = kron(*(xx[k] if k in side else yy[k] for k in range(n)))
        o2 = kron(*(yy[k] if k in side else xx[k] for k in range(n)))
        e1 = max(np.einsum("ij,ji->", o1, m).real, 0.0)
        e2 = max(np.einsum("ij,ji->", o2, m).real, 0.0)
        rhs += np.sqrt(e1 * e2)
    return EvaluationResult.of(lhs, rhs, tol)


def _perm_from_order(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    d = int(np.prod(dims))
    idx = np.arange(d).reshape(dims).transpose(order).reshape(-1)
    p = np.zeros((d, d), dtype=complex)
    p[np.arange(d), idx] = 1.0
    return p


def permutation_m2(rho, a, alpha, b, beta) -> tuple[float, float]:
    """Two-copy permutation form of the rank-one bipartite criterion.

    Works on ``rho (x) rho`` over factors ``(A1, B1, A2, B2)`` with the product
    vector ``|a>|beta>|alpha>|b>``; returns ``(lhs, rhs)``.
    """
    rho = as_density(rho)
    _require_parties(rho, 2)
    a, alpha, b, beta = _local_vectors(rho, (a, alpha, b, beta), (0, 0, 1, 1))
    da, db = rho.dims
    dims4 = (da, db, da, db)
    two = np.kron(rho.matrix, rho.matrix)
    phi = kron(a, beta, alpha, b)
    pi_a = _perm_from_order(dims4, (2, 1, 0, 3))
    pi_b = _perm_from_order(dims4, (0, 3, 2, 1))
    cross = (pi_b @ phi).conj() @ two @ (pi_a @ phi)
    lhs = np.sqrt(max(cross.real, 0.0))
    rhs = np.sqrt(max((phi.conj() @ two @ phi).real, 0.0))
    return float(lhs), float(rhs)


def determinant_extension(rho, basis_a: Sequence, basis_b: Sequence) -> float:
    """``Det M`` with ``M_uv = <e_u f_v|rho|e_v f_u>``; negative values flag NPT."""
    rho = as_density(rho)
    _require_parties(rho, 2)
    ea = np.array([as_vector(v) for v in basis_a])
    fb = np.array([as_vector(v) for v in basis_b])
    dim = len(ea)
    if len(fb) != dim or ea.shape[1] != rho.dims[0] or fb.shape[1] != rho.dims[1]:
        raise CriterionError("basis lists must match each other and the local dimensions")
    for vecs in (ea, fb):
        gram = vecs.conj() @ vecs.T
        if np.max(np.abs(gram - np.eye(dim))) > 1e-10:
            raise CriterionError("basis vectors are not orthonormal")
    m = rho.matrix
    M = np.empty((dim, dim), dtype=complex)
    for u in range(dim):
        for v in range(dim):
            M[u, v] = np.kron(ea[u], fb[v]).conj() @ m @ np.kron(ea[v], fb[u])
    return float(np.real(np.linalg.det(M)))
