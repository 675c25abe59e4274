"""Parameter sweeps over the standard state families."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import DEFAULT_TOL, EvaluationResult, builtin_spec, default_operators, evaluate_spec
from .inequalities import E_result, hillery_multi, named_entry_criterion, ENTRY_PATTERNS
from .optimize import DEFAULT_RESTARTS, family_basis, optimize_E
from .states import PureState, rho_abc, rho_alpha, werner, white_noise_mix
from .witness import WitnessError, two_qubit_witness, white_noise_witness

FAMILIES = ("rho-alpha", "rho-abc", "werner", "white-noise")
FIXED_PHI = 0.138 * np.pi
HILLERY_VARIANTS = {"hillery-geom": "geometric", "hillery-arith": "arithmetic"}


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    param: float
    lhs: float
    rhs: float
    margin: float
    detected: bool


def parse_grid(text: str) -> list[float]:
    """Inclusive grid from ``"start:stop:step"``; values rounded to 12 digits."""
    parts = text.split(":")
    if len(parts) != 3:
        raise SweepError(f"grid {text!r} is not of the form start:stop:step")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise SweepError(f"grid {text!r} has a non-numeric field") from None
    if not all(math.isfinite(x) for x in (start, stop, step)) or step <= 0:
        raise SweepError(f"grid {text!r} needs finite values and a positive step")
    if stop < start:
        raise SweepError(f"grid {text!r} is empty")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _white_noise_psi(d: int = 2) -> PureState:
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1 / np.sqrt(d)
    return PureState(v, (d, d))


def family_state(family: str, x: float):
    if family == "rho-alpha":
        return rho_alpha(x)
    if family == "rho-abc":
        return rho_abc(x, x, x)
    if family == "werner":
        return werner(x)
    if family == "white-noise":
        return white_noise_mix(_white_noise_psi(), x)
    raise SweepError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def _nan_row(x: float) -> SweepRow:
    return SweepRow(x, math.nan, math.nan, math.nan, False)


def _row(x: float, r: EvaluationResult) -> SweepRow:
    return SweepRow(x, r.lhs, r.rhs, r.margin, r.detected)


def evaluate_point(family: str, x: float, method: str, seed: int = 0,
                   n_restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL) -> SweepRow:
    rho = family_state(family, x)
    if method == "optimize-E":
        point, _ = optimize_E(rho, n_restarts=n_restarts, seed=seed)
        return _row(x, E_result(rho, point.vectors(), tol))
    if method == "fixed-E":
        return _row(x, E_result(rho, family_basis(FIXED_PHI), tol))
    if method == "two-qubit-witness":
        try:
            cand = two_qubit_witness(rho)
        except WitnessError:
            return _nan_row(x)
        return _row(x, cand.evaluate(rho, tol))
    if method == "white-noise-witness":
        if family != "white-noise":
            raise SweepError("white-noise-witness only applies to the white-noise family")
        try:
            cand = white_noise_witness(_white_noise_psi(), x)
        except WitnessError:
            return _nan_row(x)
        return _row(x, cand.evaluate(rho, tol))
    if method in HILLERY_VARIANTS:
        ops = default_operators(rho.dims)
        a = [p @ q for p, q in ops.pairs]
        return _row(x, hillery_multi(rho, a, HILLERY_VARIANTS[method], tol))
    if method in ENTRY_PATTERNS:
        return _row(x, named_entry_criterion(rho, method, tol))
    try:
        spec = builtin_spec(method)
    except ValueError:
        raise SweepError(f"unknown sweep method {method!r}") from None
    if spec.n_parties != rho.n_parties:
        raise SweepError(f"method {method!r} needs {spec.n_parties} parties, {family} has {rho.n_parties}")
    return _row(x, evaluate_spec(spec, default_operators(rho.dims), rho, tol))


def sweep(family: str, grid, method: str, seed: int = 0,
          n_restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL) -> list[SweepRow]:
    """One row per grid value, in grid order; deterministic given ``seed``."""
    if family not in FAMILIES:
        raise SweepError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    values = parse_grid(grid) if isinstance(grid, str) else [float(x) for x in grid]
    if not values:
        raise SweepError("empty parameter grid")
    return [evaluate_point(family, x, method, seed, n_restarts, tol) for x in values]
