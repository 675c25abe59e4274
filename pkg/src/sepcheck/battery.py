"""Run the criteria catalog on one state and collect a report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import inequalities as iq
from .criteria import (BUILTIN_SPECS, DEFAULT_TOL, CriterionError, EvaluationResult, LocalOperatorSet,
                       builtin_spec, default_operators, evaluate_spec)
from .io import family_params
from .linalg import LinalgError
from .optimize import optimize_E
from .states import DensityMatrix, StateError, schmidt_pure, white_noise_mix
from .witness import (WitnessError, ppt_diagnostics, schmidt_decompose, schmidt_pair_witness,
                      two_qubit_witness, white_noise_witness)

SV_POWERS = (0, 0, 0, 1, 0, 1, 0, 0)

CRITERIA = (
    "cauchy2", "cauchy4", "cauchy4-mirror", "cauchy6", "step5", "rank-one",
    "hz-correlated", "hz-product", "hz-bipartition", "hillery-geom", "hillery-arith",
    "shchukin-vogel", "guehne1", "guehne2", "guehne3", "seefinck-sep", "guehne-abc",
    "woelk-abc", "bisep-sum", "gme", "perm-m2", "det-ext",
)
BIPARTITE = ("cauchy2", "rank-one", "hz-correlated", "hz-product", "hz-bipartition",
             "hillery-geom", "hillery-arith", "shchukin-vogel", "gme", "perm-m2", "det-ext")


@dataclass(frozen=True, eq=False)
class OperatorChoice:
    """Operators shared by the battery, plus where they came from."""

    ops: LocalOperatorSet
    provenance: str
    rank_one: tuple | None = None
    det_bases: tuple | None = None


@dataclass
class BatteryReport:
    results: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def detected_by(self) -> list[str]:
        return [name for name, r in self.results.items() if r.detected]

    def to_dict(self) -> dict:
        out = {}
        for name in list(self.results) + [n for n in self.errors if n not in self.results]:
            if name in self.results:
                entry = {k: _clean(v) for k, v in self.results[name].to_dict().items()}
                entry["operators"] = self.provenance.get(name, "")
            else:
                entry = {"error": self.errors[name]}
            out[name] = entry
        return {"criteria": out, "verdict": {"detected-by": self.detected_by}}


def _clean(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def _unit(d: int, j: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[j] = 1.0
    return e


def _default_choice(rho: DensityMatrix, provenance: str = "default |1><0|, |0><0|") -> OperatorChoice:
    ops = default_operators(rho.dims)
    rank_one = None
    if rho.n_parties == 2:
        da, db = rho.dims
        rank_one = (_unit(da, 1), _unit(da, 0), _unit(db, 1), _unit(db, 0))
    return OperatorChoice(ops, provenance, rank_one)


def _bipartite_witness(rho: DensityMatrix, metadata: dict):
    if rho.dims == (2, 2):
        return two_qubit_witness(rho), "two_qubit_witness"
    params = family_params(metadata)
    if metadata.get("family") == "white-noise" and "p" in params:
        d = rho.dims[0]
        if "schmidt" in params:
            psi = schmidt_pure([float(x) for x in params["schmidt"].split(";")], d)
        else:
            psi = schmidt_pure(np.full(d, 1 / np.sqrt(d)), d)
        if np.allclose(white_noise_mix(psi, float(params["p"])).matrix, rho.matrix, atol=1e-12):
            return white_noise_witness(psi, float(params["p"])), "white_noise_witness"
    return schmidt_pair_witness(rho), "schmidt_pair_witness"


def auto_operators(rho: DensityMatrix, metadata: dict | None = None, seed: int = 0) -> OperatorChoice:
    """Closed-form witness for bipartite NPT states, optimized E basis for three
    qubits, default rank-one operators otherwise."""
    metadata = metadata or {}
    if rho.n_parties == 2 and min(rho.dims) >= 2:
        diag = ppt_diagnostics(rho, (0,))
        if diag.is_npt:
            try:
                cand, name = _bipartite_witness(rho, metadata)
            except WitnessError:
                return _default_choice(rho)
            det_bases = None
            if rho.dims[0] == rho.dims[1]:
                _, u, v = schmidt_decompose(diag.negative_eigenvectors[0])
                det_bases = (list(u.conj().T), list(v.T))
            return OperatorChoice(cand.operators, name, cand.rank_one_vectors(), det_bases)
        return _default_choice(rho)
    if rho.dims == (2, 2, 2):
        point, e_best = optimize_E(rho, seed=seed)
        if e_best > DEFAULT_TOL:
            pairs = tuple((np.outer(v1, v1.conj()), np.outer(v1, v2.conj())) for v1, v2 in point.vectors())
            return OperatorChoice(LocalOperatorSet(pairs), f"optimize_E (E={e_best:.6g})")
    return _default_choice(rho)


def _need(cond: bool, msg: str):
    if not cond:
        raise CriterionError(msg)


def run_criterion(name: str, rho: DensityMatrix, choice: OperatorChoice,
                  tol: float = DEFAULT_TOL) -> tuple[EvaluationResult, str]:
    ops = choice.ops
    products = [p @ q for p, q in ops.pairs]
    if name in BUILTIN_SPECS:
        return evaluate_spec(builtin_spec(name), ops, rho, tol), choice.provenance
    if name in ("rank-one", "perm-m2"):
        _need(rho.n_parties == 2 and choice.rank_one is not None, f"{name} needs a bipartite state")
        if name == "rank-one":
            return iq.evaluate_rank_one(rho, *choice.rank_one, tol=tol), choice.provenance
        lhs, rhs = iq.permutation_m2(rho, *choice.rank_one)
        return EvaluationResult.of(lhs, rhs, tol), choice.provenance
    if name in ("hz-correlated", "hz-product"):
        _need(rho.n_parties == 2, f"{name} needs a bipartite state")
        a = ops.pairs[0][0].conj().T
        b = ops.pairs[1][0]
        mode = "correlated" if name == "hz-correlated" else "product"
        return iq.hillery_zubairy(rho, a, b, mode, tol), f"A=P_0^dag, B=P_1 from {choice.provenance}"
    if name == "hz-bipartition":
        return iq.hz_bipartition(rho, products, 1, tol), f"A_k=P_kQ_k, split 1 from {choice.provenance}"
    if name in ("hillery-geom", "hillery-arith"):
        variant = "geometric" if name == "hillery-geom" else "arithmetic"
        return iq.hillery_multi(rho, products, variant, tol), f"A_k=P_kQ_k from {choice.provenance}"
    if name == "shchukin-vogel":
        _need(rho.n_parties == 2 and rho.dims[0] == rho.dims[1], "shchukin-vogel needs two equal modes")
        return iq.shchukin_vogel(rho, SV_POWERS, tol=tol), f"powers {SV_POWERS}"
    if name in iq.ENTRY_PATTERNS:
        _need(rho.dims == (2, 2, 2), f"{name} needs a three-qubit state")
        return iq.named_entry_criterion(rho, name, tol), "computational basis"
    if name == "bisep-sum":
        _need(rho.dims == (2, 2, 2), "bisep-sum needs a three-qubit state")
        return iq.biseparable_sum(rho, tol), "computational basis"
    if name == "gme":
        xs = [p for p, _ in ops.pairs]
        ys = [q for _, q in ops.pairs]
        return iq.gme_criterion(rho, xs, ys, tol=tol), f"X_k=P_k, Y_k=Q_k from {choice.provenance}"
    if name == "det-ext":
        _need(rho.n_parties == 2 and rho.dims[0] == rho.dims[1], "det-ext needs a DxD state")
        if choice.det_bases is not None:
            bases, prov = choice.det_bases, "Schmidt bases of the negative PT eigenvector"
        else:
            d = rho.dims[0]
            bases, prov = (list(np.eye(d)), list(np.eye(d))), "computational basis"
        det = iq.determinant_extension(rho, *bases)
        return EvaluationResult(max(-det, 0.0), max(det, 0.0), -det, -det > tol, tol, {"det": det}), prov
    raise CriterionError(f"unknown criterion {name!r}")


def select_criteria(text) -> list[str]:
    if text in (None, "all"):
        return list(CRITERIA)
    if text == "bipartite":
        return list(BIPARTITE)
    names = [t.strip() for t in (text.split(",") if isinstance(text, str) else text) if t.strip()]
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise CriterionError(f"unknown criteria: {', '.join(unknown)}")
    return names


def analyze(rho: DensityMatrix, criteria="all", ops: LocalOperatorSet | str = "auto",
            metadata: dict | None = None, seed: int = 0, tol: float = DEFAULT_TOL) -> BatteryReport:
    """Evaluate the selected criteria; inapplicable ones are reported, not fatal."""
    names = select_criteria(criteria)
    if isinstance(ops, LocalOperatorSet):
        if ops.dims != rho.dims:
            raise CriterionError(f"operator dims {ops.dims} do not match state dims {rho.dims}")
        base = _default_choice(rho)
        choice = OperatorChoice(ops, "file", base.rank_one)
    elif ops == "auto":
        choice = auto_operators(rho, metadata, seed)
    else:
        raise CriterionError(f"unknown operator source {ops!r}")
    report = BatteryReport()
    for name in names:
        try:
            result, prov = run_criterion(name, rho, choice, tol)
        except (CriterionError, LinalgError, StateError, WitnessError) as exc:
            report.errors[name] = str(exc)
            continue
        report.results[name] = result
        report.provenance[name] = prov
    return report
