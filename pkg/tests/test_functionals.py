from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymnet import quantum as qc
from asymnet.errors import DomainError, ShapeError
from asymnet.functionals import (
    build_assembly,
    combination_operator,
    correlator,
    correlator_from_probabilities,
    functional_from_terms,
    functional_value,
    joint_probability_tensor,
    network_layout,
    optimal_assembly,
    term_value,
)
from asymnet.schemes import KINDS, CoefficientScheme, ScenarioSpec, coefficient_scheme, explicit_observables


def test_combination_trivial():
    assert np.allclose(combination_operator([1, 1], [qc.SZ, qc.SX]), qc.SZ + qc.SX)
    assert np.allclose(combination_operator([0, 0], [qc.SZ, qc.SX]), 0)
    with pytest.raises(ShapeError):
        combination_operator([1], [qc.SZ, qc.SX])


def test_combination_rac_row_norm():
    # A1 + A2 + A3 - A4 with the n = 3 RAC set: Y and Z cancel, leaving 4 X / sqrt3
    obs = explicit_observables(ScenarioSpec("bilocal-I"))["A"]
    comb = combination_operator([1, 1, 1, -1], obs)
    assert np.allclose(comb, 4 / math.sqrt(3) * qc.SX)
    psi = qc.bell_pairs(1)
    assert math.isclose(qc.action_norm(psi, np.kron(comb, qc.I2)), 4 / math.sqrt(3))


def test_standard_terms():
    asm = optimal_assembly(ScenarioSpec("standard-bilocal"))
    r = functional_value(asm)
    assert np.allclose(r.terms, [2.0, 2.0], atol=1e-12)
    assert math.isclose(r.total, 2 * math.sqrt(2), abs_tol=1e-12)


def test_standard_terms_with_explicit_bob():
    asm = optimal_assembly(ScenarioSpec("standard-bilocal"), bob="explicit")
    r = functional_value(asm)
    assert np.allclose(r.terms, [2.0, 2.0], atol=1e-12)


@pytest.mark.parametrize("kind,expected", [("bilocal-I", 6.0), ("trilocal-II", 6.0)])
def test_optimum_values(kind, expected):
    assert math.isclose(functional_value(optimal_assembly(ScenarioSpec(kind))).total, expected, abs_tol=1e-12)


def test_negating_bob_negates_term():
    spec = ScenarioSpec("bilocal-II")
    asm = optimal_assembly(spec)
    obs = dict(asm.observables)
    obs["B"] = [-b for b in asm.observables["B"]]
    flipped = build_assembly(spec, obs, asm.scheme)
    for j in range(spec.terms):
        assert math.isclose(term_value(flipped, j), -term_value(asm, j), abs_tol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_term_permutation_invariance(kind):
    spec = ScenarioSpec(kind)
    asm = optimal_assembly(spec)
    perm = list(reversed(range(spec.terms)))
    rows = {p: asm.scheme.rows[p][perm] for p in spec.edge_parties}
    obs = dict(asm.observables)
    obs["B"] = [asm.observables["B"][j] for j in perm]
    permuted = build_assembly(spec, obs, CoefficientScheme(spec, rows))
    assert math.isclose(functional_value(permuted).total, functional_value(asm).total, abs_tol=1e-12)


def test_single_row_sign_flip_invariance():
    spec = ScenarioSpec("trilocal-I")
    asm = optimal_assembly(spec)
    rows = {p: r.copy() for p, r in asm.scheme.rows.items()}
    rows["C"][2] *= -1
    flipped = build_assembly(spec, asm.observables, CoefficientScheme(spec, rows))
    a, b = functional_value(asm), functional_value(flipped)
    assert math.isclose(a.total, b.total, abs_tol=1e-12)
    assert math.isclose(b.terms[2], -a.terms[2], abs_tol=1e-12)


def test_zero_terms_contribute_zero():
    r = functional_from_terms(ScenarioSpec("trilocal-II"), [0.0, -8.0, 0.0])
    assert r.total == 2.0
    assert r.magnitudes == [0.0, 8.0, 0.0]


def test_result_json_record():
    r = functional_value(optimal_assembly(ScenarioSpec("bilocal-I")))
    data = json.loads(r.to_json())
    assert data["scenario"] == "bilocal-I" and data["n"] == 3
    assert data["total"] == 6.0
    assert len(data["terms"]) == 3


def test_product_state_deterministic_table():
    spec = ScenarioSpec("standard-bilocal")
    layout = network_layout(spec)
    zero = np.zeros(layout.dim, dtype=complex)
    zero[0] = 1.0
    obs = {"A": [qc.SZ, qc.SZ], "C": [qc.SZ, qc.SZ], "B": [qc.kron(qc.SZ, qc.SZ)] * 2}
    asm = build_assembly(spec, obs, state=zero)
    table = joint_probability_tensor(asm, (0, 0, 0))
    assert table[0, 0, 0] == pytest.approx(1.0, abs=1e-15)
    assert np.count_nonzero(np.abs(table) > 1e-15) == 1


def test_bell_pair_probabilities():
    # one Bell pair measured in sigma_z on both sides: P(a = c) = 1/2 each
    phi = qc.bell_pairs(1)
    proj = [(np.eye(2) + s * qc.SZ) / 2 for s in (1, -1)]
    table = np.array([[qc.expectation(phi, np.kron(proj[a], proj[c])) for c in range(2)] for a in range(2)])
    assert np.allclose(table, [[0.5, 0.0], [0.0, 0.5]])


def test_probability_tensor_matches_correlator_all_settings():
    asm = optimal_assembly(ScenarioSpec("bilocal-I"))
    for settings_ in itertools.product(*[range(len(asm.observables[p])) for p in asm.parties]):
        table = joint_probability_tensor(asm, settings_)
        assert table.min() >= -1e-12
        assert abs(table.sum() - 1) < 1e-12
        assert abs(correlator_from_probabilities(table) - correlator(asm, settings_)) < 1e-12


def test_settings_validation():
    asm = optimal_assembly(ScenarioSpec("standard-bilocal"))
    with pytest.raises(DomainError):
        correlator(asm, (0, 5, 0))
    with pytest.raises(ShapeError):
        correlator(asm, (0, 0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_correlators_bounded(seed):
    rng = np.random.default_rng(seed)
    spec = ScenarioSpec("trilocal-II")
    asm = optimal_assembly(spec)
    settings_ = tuple(int(rng.integers(len(asm.observables[p]))) for p in asm.parties)
    assert abs(correlator(asm, settings_)) <= 1 + 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_visibility_multilinearity(v1, v2):
    spec = ScenarioSpec("bilocal-II")
    pure = functional_value(optimal_assembly(spec))
    noisy = functional_value(optimal_assembly(spec, visibilities=(v1, v2)))
    assert np.allclose(noisy.terms, v1 * v2 * np.array(pure.terms), atol=1e-10)


def test_generated_and_explicit_rows_agree_on_value():
    spec = ScenarioSpec("bilocal-I")
    a = functional_value(optimal_assembly(spec, source="explicit")).total
    b = functional_value(optimal_assembly(spec, source="generated")).total
    assert math.isclose(a, b, abs_tol=1e-12)


def test_assembly_shape_checks():
    spec = ScenarioSpec("standard-bilocal")
    obs = explicit_observables(spec)
    with pytest.raises(ShapeError):
        build_assembly(spec, obs, state=np.ones(8))
    obs["A"] = [np.eye(4)] * 2
    obs["B"] = [qc.kron(qc.SZ, qc.SZ)] * 2
    with pytest.raises(ShapeError):
        build_assembly(spec, obs, coefficient_scheme(spec))
