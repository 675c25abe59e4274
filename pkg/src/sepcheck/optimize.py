"""Derivative-free search for the three-qubit measurement basis maximizing E."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .inequalities import evaluate_E
from .states import as_density, qubit

NM_COEFFS = (1.0, 2.0, 0.5, 0.5)  # reflection, expansion, contraction, shrink
NM_XTOL = 1e-7
NM_MAXFEV = 2000
DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    converged: bool


def nelder_mead(f: Callable[[np.ndarray], float], x0, step: float = 0.5,
                xtol: float = NM_XTOL, maxfev: int = NM_MAXFEV,
                simplex: np.ndarray | None = None) -> OptimizeResult:
    """Minimize ``f`` with the Nelder-Mead simplex method.

    Stops when the simplex diameter (largest vertex distance from the best
    vertex) falls below ``xtol`` or after ``maxfev`` evaluations.
    """
    alpha, gamma, rho, sigma = NM_COEFFS
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    if simplex is None:
        simplex = np.vstack([x0, x0 + step * np.eye(n)])
    sim = np.array(simplex, dtype=float)
    fs = np.array([f(x) for x in sim])
    nfev = n + 1
    converged = False
    while nfev < maxfev:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.max(np.linalg.norm(sim[1:] - sim[0], axis=1)) < xtol:
            converged = True
            break
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - sim[-1])
        fr = f(xr)
        nfev += 1
        if fr < fs[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            nfev += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (sim[-1] - centroid)
        fc = f(xc)
        nfev += 1
        if fc < min(fr, fs[-1]):
            sim[-1], fs[-1] = xc, fc
            continue
        sim[1:] = sim[0] + sigma * (sim[1:] - sim[0])
        fs[1:] = [f(x) for x in sim[1:]]
        nfev += n
    best = int(np.argmin(fs))
    return OptimizeResult(sim[best].copy(), float(fs[best]), nfev, converged)


@dataclass(frozen=True, eq=False)
class BasisPoint:
    """Two qubit vectors per party from angles of shape ``(3, 2, 2)`` = (party, vector, (theta, phi))."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).reshape(3, 2, 2).copy()
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def vectors(self):
        return [tuple(qubit(*self.angles[k, j]) for j in range(2)) for k in range(3)]


def _fast_E(m: np.ndarray) -> Callable[[np.ndarray], float]:
    """Vectorized ``-E`` over flat angle arrays (same value as ``evaluate_E``)."""

    def neg_E(x):
        a = x.reshape(3, 2, 2)
        th, ph = a[..., 0], a[..., 1]
        vec = np.stack([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], axis=-1)
        # indices (party0 vector, party1 vector, party2 vector)
        picks = ((0, 0, 0), (1, 1, 1), (0, 0, 1), (0, 1, 0), (1, 0, 0))
        vs = np.array([np.einsum("i,j,k->ijk", vec[0, p], vec[1, q], vec[2, r]).ravel()
                       for p, q, r in picks])
        w = vs @ m.T  # row i is rho @ vs[i]
        lhs = abs(np.vdot(vs[0], w[1]))
        pops = np.clip(np.real(np.sum(vs[1:].conj() * w[1:], axis=1)), 0.0, None)
        return -(lhs - float(np.prod(pops)) ** 0.25)

    return neg_E


def optimize_E(rho, n_restarts: int = DEFAULT_RESTARTS, seed: int = 0):
    """Maximize ``E`` over product bases with seeded Nelder-Mead restarts.

    Restart ``i`` draws its start from ``default_rng([seed, i])``, so the best
    value never decreases as ``n_restarts`` grows.  Returns ``(BasisPoint, E)``.
    """
    rho = as_density(rho, (2, 2, 2))
    if rho.dim != 8:
        raise ValueError("optimize_E needs a three-qubit state")
    f = _fast_E(rho.matrix)
    best_x, best_f = None, np.inf
    for i in range(n_restarts):
        rng = np.random.default_rng([seed, i])
        x0 = np.empty((3, 2, 2))
        x0[..., 0] = rng.uniform(0.0, np.pi, (3, 2))
        x0[..., 1] = rng.uniform(0.0, 2 * np.pi, (3, 2))
        res = nelder_mead(f, x0.ravel())
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
    point = BasisPoint(best_x)
    return point, float(evaluate_E(rho, point.vectors()))


def family_basis(phi: float) -> list:
    """Product basis family with one free phase, known to be optimal for the
    alpha-family at ``alpha = 2`` near ``phi = 0.138 pi``."""
    s = 1 / np.sqrt(2)
    e = np.exp
    a1 = s * np.array([1, -e(-1j * phi)])
    a2 = s * np.array([1, e(-1j * (np.pi / 2 - phi))])
    b1 = s * np.array([1, -e(1j * (np.pi / 2 - phi))])
    b2 = s * np.array([1, e(1j * phi)])
    c1 = s * np.array([1, e(-1j * phi)])
    c2 = s * np.array([1, -e(-1j * (np.pi / 2 - phi))])
    return [(a1, a2), (b1, b2), (c1, c2)]


def family_phase(basis) -> np.ndarray:
    """Per-party phase ``phi`` recovered from ``|<v1|v2>| = |cos(pi/4 + phi)|``.

    The overlap modulus is invariant under local unitaries and under swapping
    the two vectors, so this identifies the family parameter up to its
    symmetries.
    """
    out = []
    for v1, v2 in basis:
        v1 = np.asarray(v1, dtype=complex)
        v2 = np.asarray(v2, dtype=complex)
        o = abs(np.vdot(v1, v2)) / (np.linalg.norm(v1) * np.linalg.norm(v2))
        out.append(np.arccos(min(o, 1.0)) - np.pi / 4)
    return np.array(out)
