"""Separability criteria built from the Cauchy-Schwarz and Hoelder inequalities.

The main entry points are re-exported here; see the submodules for the rest.
"""

from .criteria import (BUILTIN_SPECS, CriterionError, CriterionSpec, EvaluationResult,
                       LocalOperatorSet, builtin_spec, check_soundness, default_operators,
                       evaluate_spec, make_spec)
from .states import DensityMatrix, PureState, StateError
from .witness import WitnessError, two_qubit_witness, white_noise_witness
from .optimize import optimize_E
from .battery import analyze

__all__ = [
    "BUILTIN_SPECS", "CriterionError", "CriterionSpec", "DensityMatrix", "EvaluationResult",
    "LocalOperatorSet", "PureState", "StateError", "WitnessError", "analyze", "builtin_spec",
    "check_soundness", "default_operators", "evaluate_spec", "make_spec", "optimize_E",
    "two_qubit_witness", "white_noise_witness",
]
