from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sepcheck.criteria import (BUILTIN_SPECS, CriterionError, CriterionSpec, EvaluationResult,
                               LocalOperatorSet, builtin_spec, check_soundness, default_operators,
                               evaluate_spec, make_spec, perturb_weights, random_operators,
                               soundness_fuzz, _real_expectation)
from sepcheck.states import (DensityMatrix, PureState, ghz, random_density, random_separable, rho_abc)

PHI_PLUS = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


@pytest.mark.parametrize("name", sorted(BUILTIN_SPECS))
def test_builtins_sound(name):
    rep = check_soundness(builtin_spec(name))
    assert rep.sound, rep.ledger()
    assert set(rep.totals.values()) == {rep.target}


def test_cauchy2_ledger():
    rep = check_soundness(builtin_spec("cauchy2"))
    assert rep.target == 1
    assert len(rep.totals) == 4


def test_cauchy6_structure():
    spec = builtin_spec("cauchy6")
    assert len(spec.terms) == 6
    assert all(t.weight == Fraction(1, 6) for t in spec.terms)
    counts = {}
    for t in spec.terms:
        for f in t.factors:
            counts[(f.party, f.slot)] = counts.get((f.party, f.slot), 0) + 1
    assert set(counts.values()) == {3}


def test_perturbed_cauchy4_unsound():
    spec = builtin_spec("cauchy4")
    terms = list(spec.terms)
    terms[0] = replace(terms[0], weight=Fraction(1, 3))
    rep = check_soundness(replace(spec, terms=tuple(terms)))
    assert not rep.sound
    assert rep.problems


def test_step5_with_squared_lhs_is_unsound():
    spec = builtin_spec("step5")
    assert spec.lhs_power == 1
    assert not check_soundness(replace(spec, lhs_power=Fraction(2))).sound


def test_weight_sum_condition_needed():
    # every (party, slot) collects s/2 but the weights sum to 2s; a separable
    # state violates the resulting bound, so it must be rejected
    spec = make_spec(2, 2, [(1, [(0, "P", 1)]), (1, [(0, "Q", 1)]),
                            (1, [(1, "P", 1)]), (1, [(1, "Q", 1)])])
    rep = check_soundness(spec)
    assert not rep.sound
    assert set(rep.totals.values()) == {rep.target}
    proj0 = np.diag([1.0, 0.0])
    ops = LocalOperatorSet(((proj0, proj0), (proj0, proj0)))
    sep = np.diag([0.5, 0, 0, 0.5])
    lhs = abs(np.trace(np.kron(proj0, proj0) @ sep)) ** 2
    rhs = 0.5 ** 4
    assert lhs == pytest.approx(0.25) and lhs > rhs
    with pytest.raises(CriterionError):
        evaluate_spec(spec, ops, sep)


def test_make_spec_rejects_bad_terms():
    with pytest.raises(CriterionError):
        make_spec(2, 2, [(1, [(0, "P", 1), (0, "Q", 1)])])
    with pytest.raises(CriterionError):
        make_spec(2, 2, [(1, [(0, "P", Fraction(1, 2))])])
    with pytest.raises(CriterionError):
        make_spec(2, 2, [(0, [(0, "P", 1)])])
    with pytest.raises(CriterionError):
        make_spec(2, 2, [(1, [(0, "R", 1)])])
    with pytest.raises(CriterionError):
        make_spec(2, 2, [(1, [(2, "P", 1)])])


def test_spec_json_roundtrip():
    for spec in BUILTIN_SPECS.values():
        back = CriterionSpec.from_json(__import__("json").dumps(spec.to_dict()))
        assert back == spec


def test_operator_set_roundtrip():
    ops = random_operators((2, 3), np.random.default_rng(0))
    back = LocalOperatorSet.from_dict(ops.to_dict())
    for (p, q), (p2, q2) in zip(ops.pairs, back.pairs):
        assert np.array_equal(p, p2) and np.array_equal(q, q2)
    with pytest.raises(CriterionError):
        LocalOperatorSet.from_dict({"dims": [2], "pairs": [{"P": [[1, 0]], "Q": [[1, 0]]}]})


def test_evaluate_cauchy2_bell():
    r = evaluate_spec(builtin_spec("cauchy2"), default_operators((2, 2)), PHI_PLUS)
    assert r.lhs == pytest.approx(0.25)
    assert r.rhs == 0.0
    assert r.detected


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_cauchy2_default_ops_match_matrix_entries(seed):
    rho = random_density(4, rank=1 + seed % 4, seed=seed, dims=(2, 2))
    m = rho.matrix
    r = evaluate_spec(builtin_spec("cauchy2"), default_operators((2, 2)), rho)
    assert r.lhs == pytest.approx(abs(m[0, 3]) ** 2, abs=1e-14)
    assert r.rhs == pytest.approx(m[2, 2].real * m[1, 1].real, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), name=st.sampled_from(sorted(BUILTIN_SPECS)))
def test_no_false_positives(seed, name):
    spec = builtin_spec(name)
    rng = np.random.default_rng(seed)
    rho = random_separable((2,) * spec.n_parties, int(rng.integers(1, 6)), rng)
    for _ in range(5):
        assert evaluate_spec(spec, random_operators(rho.dims, rng), rho).margin <= 1e-9


def test_cauchy4_on_rho_abc_orientation():
    ops = default_operators((2, 2, 2))
    low = rho_abc(0.5, 0.5, 0.5)
    high = rho_abc(2, 2, 2)
    c4 = builtin_spec("cauchy4")
    mirror = builtin_spec("cauchy4-mirror")
    n_low = 2 + 1.5 + 6
    r = evaluate_spec(c4, ops, low)
    assert r.lhs == pytest.approx(1 / n_low)
    assert r.rhs == pytest.approx(8 ** 0.25 / n_low)
    assert not r.detected
    assert evaluate_spec(mirror, ops, low).detected
    assert evaluate_spec(c4, ops, high).detected
    assert not evaluate_spec(mirror, ops, high).detected


def test_local_unitary_invariance():
    rng = np.random.default_rng(11)
    rho = random_density(8, seed=rng, dims=(2, 2, 2))
    ops = random_operators((2, 2, 2), rng)
    us = []
    for _ in range(3):
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        us.append(q)
    u = np.kron(np.kron(us[0], us[1]), us[2])
    rho2 = DensityMatrix(u @ rho.matrix @ u.conj().T, (2, 2, 2))
    ops2 = LocalOperatorSet(tuple((w @ p @ w.conj().T, w @ q @ w.conj().T)
                                  for w, (p, q) in zip(us, ops.pairs)))
    for name in BUILTIN_SPECS:
        spec = builtin_spec(name)
        if spec.n_parties != 3:
            continue
        a = evaluate_spec(spec, ops, rho).margin
        b = evaluate_spec(spec, ops2, rho2).margin
        assert a == pytest.approx(b, abs=1e-9)


def test_evaluate_errors():
    with pytest.raises(CriterionError):
        evaluate_spec(builtin_spec("cauchy4"), default_operators((2, 2)), PHI_PLUS)
    with pytest.raises(CriterionError):
        evaluate_spec(builtin_spec("cauchy2"), default_operators((3, 3)), PHI_PLUS)
    bad = replace(builtin_spec("step5"), lhs_power=Fraction(2))
    with pytest.raises(CriterionError):
        evaluate_spec(bad, default_operators((2, 2, 2)), ghz(3))
    with pytest.raises(CriterionError):
        builtin_spec("cauchy3")


def test_negative_rhs_expectation_is_an_error():
    not_a_state = np.diag([1.2, -0.2])
    with pytest.raises(CriterionError):
        _real_expectation(not_a_state, np.diag([0.0, 1.0]), 1e-8)
    assert _real_expectation(np.diag([1.0, -1e-12]), np.diag([0.0, 1.0]), 1e-8) == 0.0


def test_evaluation_result_detected_iff_margin_above_tol():
    assert EvaluationResult.of(1.0, 1.0 - 2e-8).detected
    assert not EvaluationResult.of(1.0, 1.0 - 5e-9).detected
    assert not EvaluationResult.of(1.0, 1.0 - 5e-9, tol=1e-8).detected
    assert EvaluationResult.of(1.0, 1.0 - 5e-9, tol=1e-9).detected


def test_perturb_weights_always_unsound():
    rng = np.random.default_rng(0)
    for name in BUILTIN_SPECS:
        for _ in range(5):
            assert not check_soundness(perturb_weights(builtin_spec(name), rng)).sound


def test_soundness_fuzz_small():
    rep = soundness_fuzz(builtin_spec("cauchy2"), (2, 2), n_samples=20, n_operator_sets=4, seed=1)
    assert rep.passed()
    again = soundness_fuzz(builtin_spec("cauchy2"), (2, 2), n_samples=20, n_operator_sets=4, seed=1)
    assert rep == again
    with pytest.raises(CriterionError):
        soundness_fuzz(builtin_spec("cauchy2"), (2, 2, 2), n_samples=1)
