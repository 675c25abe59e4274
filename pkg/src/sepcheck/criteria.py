"""Structured Cauchy-Schwarz/Hoelder criteria.

A criterion states that for every fully separable state

    |< (x)_k P_k Q_k >|**s  <=  prod_t < (x)_{(k, slot) in t} M_{k,slot}**e >**w_t

with ``M_{k,P} = P_k P_k^dag`` and ``M_{k,Q} = Q_k^dag Q_k``.  The exponent
bookkeeping is done in exact rational arithmetic; a spec is sound when every
``(party, slot)`` pair collects a total of ``s/2`` and the Hoelder weights
sum to at most ``s``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .linalg import kron, psd_power
from .states import DensityMatrix, as_density

SLOTS = ("P", "Q")
DEFAULT_TOL = 1e-8
IMAG_TOL = 1e-8


class CriterionError(ValueError):
    """Malformed or unsound criterion, or inconsistent inputs."""


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


@dataclass(frozen=True)
class Factor:
    party: int
    slot: str
    exponent: Fraction = Fraction(1)

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise CriterionError(f"slot must be 'P' or 'Q', got {self.slot!r}")
        object.__setattr__(self, "exponent", _frac(self.exponent))
        if self.exponent < 1:
            raise CriterionError("inner exponents must be >= 1")


@dataclass(frozen=True)
class Term:
    weight: Fraction
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "weight", _frac(self.weight))
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.weight <= 0:
            raise CriterionError("term weights must be positive")
        parties = [f.party for f in self.factors]
        if len(parties) != len(set(parties)):
            # covers both a repeated (party, slot) and P/Q of one party together
            raise CriterionError("a term may hold at most one factor per party")


@dataclass(frozen=True)
class CriterionSpec:
    n_parties: int
    lhs_power: Fraction
    terms: tuple[Term, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lhs_power", _frac(self.lhs_power))
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n_parties < 1:
            raise CriterionError("a criterion needs at least one party")
        if self.lhs_power <= 0:
            raise CriterionError("lhs power must be positive")
        for t in self.terms:
            for f in t.factors:
                if not 0 <= f.party < self.n_parties:
                    raise CriterionError(f"factor party {f.party} out of range")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_parties": self.n_parties,
            "lhs_power": str(self.lhs_power),
            "terms": [
                {"weight": str(t.weight),
                 "factors": [[f.party, f.slot, str(f.exponent)] for f in t.factors]}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriterionSpec":
        try:
            terms = [
                Term(Fraction(t["weight"]),
                     tuple(Factor(int(k), s, Fraction(e)) for k, s, e in t["factors"]))
                for t in d["terms"]
            ]
            return cls(int(d["n_parties"]), Fraction(d["lhs_power"]), tuple(terms),
                       name=d.get("name", ""))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise CriterionError(f"malformed criterion description: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "CriterionSpec":
        return cls.from_dict(json.loads(text))


def make_spec(n_parties: int, lhs_power, terms: Iterable, name: str = "") -> CriterionSpec:
    """Build a spec from ``(weight, [(party, slot, exponent), ...])`` tuples."""
    built = []
    for weight, factors in terms:
        built.append(Term(_frac(weight), tuple(
            Factor(k, s, _frac(e)) for k, s, e in factors)))
    return CriterionSpec(n_parties, _frac(lhs_power), tuple(built), name=name)


@dataclass(frozen=True)
class SoundnessReport:
    sound: bool
    target: Fraction
    totals: dict
    weight_sum: Fraction
    problems: tuple[str, ...]

    def ledger(self) -> str:
        lines = [f"required per-pair total: {self.target}"]
        for (k, s), tot in sorted(self.totals.items()):
            mark = "ok" if tot == self.target else "MISMATCH"
            lines.append(f"  party {k} slot {s}: {tot}  {mark}")
        lines.append(f"weight sum: {self.weight_sum} (budget {2 * self.target})")
        lines.extend(f"  ! {p}" for p in self.problems)
        return "\n".join(lines)


@lru_cache(maxsize=256)
def check_soundness(spec: CriterionSpec) -> SoundnessReport:
    """Exact exponent bookkeeping for the Hoelder scheme."""
    target = spec.lhs_power / 2
    totals = {(k, s): Fraction(0) for k in range(spec.n_parties) for s in SLOTS}
    for t in spec.terms:
        for f in t.factors:
            totals[(f.party, f.slot)] += t.weight * f.exponent
    weight_sum = sum((t.weight for t in spec.terms), Fraction(0))
    problems = []
    for key, tot in sorted(totals.items()):
        if tot == 0:
            problems.append(f"party {key[0]} slot {key[1]} is not covered")
        elif tot != target:
            problems.append(f"party {key[0]} slot {key[1]} totals {tot}, needs {target}")
    if weight_sum > spec.lhs_power:
        problems.append(f"weights sum to {weight_sum} > lhs power {spec.lhs_power}")
    return SoundnessReport(not problems, target, totals, weight_sum, tuple(problems))


@dataclass(frozen=True)
class LocalOperatorSet:
    """Per-party operator pairs ``(P_k, Q_k)``."""

    pairs: tuple

    def __post_init__(self):
        pairs = []
        for p, q in self.pairs:
            p = np.asarray(p, dtype=complex)
            q = np.asarray(q, dtype=complex)
            if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape != q.shape:
                raise CriterionError("each party needs two square operators of equal size")
            pairs.append((p, q))
        object.__setattr__(self, "pairs", tuple(pairs))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.shape[0] for p, _ in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def to_dict(self) -> dict:
        def enc(m):
            return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
        return {"dims": list(self.dims),
                "pairs": [{"P": enc(p), "Q": enc(q)} for p, q in self.pairs]}

    @classmethod
    def from_dict(cls, d: dict) -> "LocalOperatorSet":
        def dec(entries, n):
            a = np.array([complex(re, im) for re, im in entries])
            if a.size != n * n:
                raise CriterionError("operator entry count does not match its dimension")
            return a.reshape(n, n)
        try:
            return cls(tuple((dec(p["P"], n), dec(p["Q"], n))
                             for n, p in zip(d["dims"], d["pairs"], strict=True)))
        except (KeyError, TypeError, ValueError) as exc:
            raise CriterionError(f"malformed operator file: {exc}") from exc


@dataclass(frozen=True)
class EvaluationResult:
    lhs: float
    rhs: float
    margin: float
    detected: bool
    tolerance: float
    details: dict = field(default_factory=dict, compare=False)

    @classmethod
    def of(cls, lhs: float, rhs: float, tol: float = DEFAULT_TOL, **details) -> "EvaluationResult":
        margin = float(lhs) - float(rhs)
        return cls(float(lhs), float(rhs), margin, margin > tol, tol, details)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "detected": self.detected, "tolerance": self.tolerance}


def default_operators(dims: Sequence[int]) -> LocalOperatorSet:
    """``P_k = |1><0|`` and ``Q_k = |0><0|`` on every party."""
    pairs = []
    for d in dims:
        if d < 2:
            raise CriterionError("default operators need local dimension >= 2")
        p = np.zeros((d, d), dtype=complex)
        q = np.zeros((d, d), dtype=complex)
        p[1, 0] = 1.0
        q[0, 0] = 1.0
        pairs.append((p, q))
    return LocalOperatorSet(tuple(pairs))


def random_operators(dims: Sequence[int], rng: np.random.Generator,
                     rank: int | None = None) -> LocalOperatorSet:
    """Complex Gaussian operator pairs, optionally of fixed rank."""

    def draw(d):
        r = d if rank is None else min(rank, d)
        g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
        h = rng.standard_normal((r, d)) + 1j * rng.standard_normal((r, d))
        return g @ h

    return LocalOperatorSet(tuple((draw(d), draw(d)) for d in dims))


def _real_expectation(rho: np.ndarray, op: np.ndarray, tol: float) -> float:
    val = complex(np.einsum("ij,ji->", op, rho))
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val)):
        raise CriterionError(f"expectation of a PSD operator has imaginary part {val.imag:.3e}")
    if val.real < -tol * max(1.0, abs(val)):
        raise CriterionError(f"PSD expectation value {val.real:.3e} is negative; input is not a state")
    return max(val.real, 0.0)


def evaluate_spec(spec: CriterionSpec, ops: LocalOperatorSet, rho,
                  tol: float = DEFAULT_TOL) -> EvaluationResult:
    """Evaluate a sound criterion on a state for a given operator set.

    Raises
    ------
    CriterionError
        If the criterion is unsound, dimensions disagree, or a right-hand expectation
        value is negative beyond ``tol`` (a broken input state).
    """
    report = check_soundness(spec)
    if not report.sound:
        raise CriterionError("unsound criterion:\n" + report.ledger())
    rho = as_density(rho)
    if len(ops) != spec.n_parties or rho.n_parties != spec.n_parties:
        raise CriterionError(
            f"criterion has {spec.n_parties} parties, operators {len(ops)}, state {rho.n_parties}")
    if ops.dims != rho.dims:
        raise CriterionError(f"operator dims {ops.dims} do not match state dims {rho.dims}")
    m = rho.matrix
    lhs_op = kron(*(p @ q for p, q in ops.pairs))
    lhs = abs(complex(np.einsum("ij,ji->", lhs_op, m))) ** float(spec.lhs_power)

    locals_ = {}
    for k, (p, q) in enumerate(ops.pairs):
        locals_[(k, "P")] = p @ p.conj().T
        locals_[(k, "Q")] = q.conj().T @ q
    rhs = 1.0
    term_values = []
    for t in spec.terms:
        factors = [np.eye(d, dtype=complex) for d in rho.dims]
        for f in t.factors:
            base = locals_[(f.party, f.slot)]
            factors[f.party] = base if f.exponent == 1 else psd_power(base, float(f.exponent))
        val = _real_expectation(m, kron(*factors), tol)
        term_values.append(val)
        rhs *= val ** float(t.weight)
    return EvaluationResult.of(lhs, rhs, tol, terms=term_values)


def _spec(name, n, s, terms):
    return make_spec(n, s, terms, name=name)


def _swap_slots(spec: CriterionSpec, name: str) -> CriterionSpec:
    flip = {"P": "Q", "Q": "P"}
    terms = tuple(Term(t.weight, tuple(Factor(f.party, flip[f.slot], f.exponent)
                                       for f in t.factors)) for t in spec.terms)
    return replace(spec, terms=terms, name=name)


def _build_catalog() -> dict[str, CriterionSpec]:
    q = Fraction(1, 4)
    sixth = Fraction(1, 6)
    third = Fraction(1, 3)
    three_halves = Fraction(3, 2)
    cat = {}
    cat["cauchy2"] = _spec("cauchy2", 2, 2, [
        (1, [(0, "P", 1), (1, "Q", 1)]),
        (1, [(0, "Q", 1), (1, "P", 1)]),
    ])
    cat["cauchy4"] = _spec("cauchy4", 3, 1, [
        (q, [(0, "P", 1), (1, "P", 1), (2, "Q", 1)]),
        (q, [(0, "P", 1), (1, "Q", 1), (2, "P", 1)]),
        (q, [(0, "Q", 1), (1, "P", 1), (2, "P", 1)]),
        (q, [(0, "Q", 1), (1, "Q", 1), (2, "Q", 1)]),
    ])
    cat["cauchy4-mirror"] = _swap_slots(cat["cauchy4"], "cauchy4-mirror")
    cat["cauchy6"] = _spec("cauchy6", 3, 1, [
        (sixth, [(0, "Q", 1), (1, "Q", 1), (2, "P", 1)]),
        (sixth, [(0, "Q", 1), (1, "P", 1), (2, "Q", 1)]),
        (sixth, [(0, "P", 1), (1, "Q", 1), (2, "P", 1)]),
        (sixth, [(0, "P", 1), (1, "Q", 1), (2, "Q", 1)]),
        (sixth, [(0, "Q", 1), (1, "P", 1), (2, "P", 1)]),
        (sixth, [(0, "P", 1), (1, "P", 1), (2, "Q", 1)]),
    ])
    cat["step5"] = _spec("step5", 3, 1, [
        (third, [(0, "P", three_halves), (1, "Q", three_halves)]),
        (third, [(1, "P", three_halves), (2, "Q", three_halves)]),
        (third, [(2, "P", three_halves), (0, "Q", three_halves)]),
    ])
    return cat


BUILTIN_SPECS = _build_catalog()


def builtin_spec(name: str) -> CriterionSpec:
    try:
        return BUILTIN_SPECS[name]
    except KeyError:
        raise CriterionError(
            f"unknown criterion {name!r}; known: {', '.join(BUILTIN_SPECS)}") from None


def perturb_weights(spec: CriterionSpec, rng: np.random.Generator) -> CriterionSpec:
    """Copy of ``spec`` with one randomly chosen term weight changed."""
    terms = list(spec.terms)
    i = int(rng.integers(len(terms)))
    old = terms[i].weight
    while True:
        new = Fraction(int(rng.integers(1, 12)), int(rng.integers(1, 12)))
        if new != old:
            break
    terms[i] = Term(new, terms[i].factors)
    return replace(spec, terms=tuple(terms), name=f"{spec.name}-mutant")


@dataclass(frozen=True)
class FuzzReport:
    spec_name: str
    n_samples: int
    n_operator_sets: int
    max_margin: float
    worst_sample: int

    def passed(self, threshold: float = 1e-9) -> bool:
        return self.max_margin <= threshold


def soundness_fuzz(spec: CriterionSpec, dims: Sequence[int], n_samples: int = 1000,
                   n_operator_sets: int = 20, seed: int = 0) -> FuzzReport:
    """Largest margin over random separable states and random operator sets.

    Sample ``i`` uses ``default_rng([seed, i])`` for both the state and its
    operator sets; every other operator set is rank one, which brings the
    bound close to equality.
    """
    from .states import random_separable

    report = check_soundness(spec)
    if not report.sound:
        raise CriterionError("unsound criterion:\n" + report.ledger())
    dims = tuple(dims)
    if len(dims) != spec.n_parties:
        raise CriterionError(f"shape {dims} has {len(dims)} parties, spec needs {spec.n_parties}")
    worst, worst_i = -np.inf, -1
    for i in range(n_samples):
        rng = np.random.default_rng([seed, i])
        rho = random_separable(dims, int(rng.integers(1, 9)), rng)
        for j in range(n_operator_sets):
            ops = random_operators(dims, rng, rank=1 if j % 2 else None)
            m = evaluate_spec(spec, ops, rho).margin
            if m > worst:
                worst, worst_i = m, i
    return FuzzReport(spec.name, n_samples, n_operator_sets, float(worst), worst_i)
