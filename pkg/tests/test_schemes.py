from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymnet import quantum as qc
from asymnet.errors import CapabilityError, CapacityError, ConstraintError, ContractError, DegenerateCombinationError, DomainError, ShapeError
from asymnet.schemes import (
    KINDS,
    ObservableDocument,
    ScenarioSpec,
    anticommuting_set,
    bob_product_observables,
    chain_observables,
    chain_rows,
    coefficient_scheme,
    dumps_observables,
    generated_observables,
    loads_observables,
    explicit_observables,
    rac_bit_strings,
    rac_observables,
    rac_rows,
)


def test_spec_defaults_and_validation():
    assert ScenarioSpec("standard-bilocal").n == 2
    assert ScenarioSpec("bilocal-I").n == 3
    with pytest.raises(DomainError):
        ScenarioSpec("standard-bilocal", 3)
    with pytest.raises(DomainError):
        ScenarioSpec("bogus")
    with pytest.raises(DomainError):
        ScenarioSpec("bilocal-I", 1)


def test_settings_counts():
    assert ScenarioSpec("bilocal-I", 4).settings == {"A": 8, "B": 4, "C": 4}
    assert ScenarioSpec("bilocal-II", 3).settings == {"A": 4, "B": 4, "C": 3}
    assert ScenarioSpec("trilocal-I").terms == 4
    assert ScenarioSpec("trilocal-II").terms == 3


def test_matrix_level_limits():
    with pytest.raises(CapabilityError):
        ScenarioSpec("trilocal-II", 4).require_matrix_level()
    with pytest.raises(CapacityError):
        ScenarioSpec("bilocal-I", 9).require_matrix_level()
    ScenarioSpec("bilocal-I", 7).require_matrix_level()


def test_rac_bit_strings_are_complement_representatives():
    for n in range(2, 7):
        bits = rac_bit_strings(n)
        assert bits.shape == (2 ** (n - 1), n)
        full = {tuple(b) for b in bits} | {tuple(1 - b) for b in bits}
        assert len(full) == 2**n


def test_rac_rows_n3():
    assert rac_rows(3).tolist() == [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1]]


def test_chain_rows():
    assert chain_rows(3).tolist() == [[1, 1, 0], [0, 1, 1], [-1, 0, 1]]


@pytest.mark.parametrize("kind", KINDS)
def test_scheme_shapes(kind):
    spec = ScenarioSpec(kind)
    for generated in (False, True):
        scheme = coefficient_scheme(spec, generated)
        for p in spec.edge_parties:
            assert scheme.rows[p].shape == (spec.terms, spec.settings[p])
            assert np.all(np.any(scheme.rows[p] != 0, axis=1))


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 9))
def test_anticommuting_set(n):
    ops = anticommuting_set(n)
    dim = ops[0].shape[0]
    assert len(ops) == n and dim == 2 ** (n // 2)
    for i, a in enumerate(ops):
        assert qc.is_involution(a)
        for b in ops[i + 1 :]:
            assert np.allclose(a @ b + b @ a, 0)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_rac_observables_are_involutions(n):
    for a in rac_observables(n):
        assert qc.is_involution(a)


@pytest.mark.parametrize("m", [2, 3, 4, 8])
def test_chain_anticommutators(m):
    ops = chain_observables(m)
    for i in range(m):
        for k in range(i + 1, m):
            expected = 2 * math.cos((k - i) * math.pi / m)
            assert np.allclose(ops[i] @ ops[k] + ops[k] @ ops[i], expected * np.eye(2))


@pytest.mark.parametrize("kind", KINDS)
def test_explicit_sets_are_dichotomic(kind):
    spec = ScenarioSpec(kind)
    obs = explicit_observables(spec)
    for p in spec.edge_parties:
        assert len(obs[p]) == spec.settings[p]
        for o in obs[p]:
            assert qc.is_involution(o)


@pytest.mark.parametrize("kind", KINDS)
def test_bob_product_observables_are_involutions(kind):
    spec = ScenarioSpec(kind)
    bobs = bob_product_observables(spec, coefficient_scheme(spec), explicit_observables(spec))
    assert len(bobs) == spec.terms
    for b in bobs:
        assert qc.is_involution(b, 1e-9)


def test_bob_degenerate_combination():
    spec = ScenarioSpec("standard-bilocal")
    obs = explicit_observables(spec)
    obs["A"] = [qc.SZ, qc.SZ]
    with pytest.raises(DegenerateCombinationError):
        bob_product_observables(spec, coefficient_scheme(spec), obs)


def test_bob_non_involution_rejected():
    spec = ScenarioSpec("standard-bilocal")
    obs = explicit_observables(spec)
    # sigma_z + I = diag(2, 0) is not proportional to an involution
    obs["A"] = [qc.SZ, qc.I2]
    with pytest.raises(ConstraintError):
        bob_product_observables(spec, coefficient_scheme(spec), obs)


def test_generated_sets_match_explicit_up_to_convention():
    spec = ScenarioSpec("bilocal-II", 3)
    gen = generated_observables(spec)
    pap = explicit_observables(spec)
    # chain sets coincide only up to a rotation, but their Gram matrices agree
    for a, b in ((gen["A"], pap["A"]),):
        ga = np.array([[np.trace(x @ y).real for y in a] for x in a])
        gb = np.array([[np.trace(x @ y).real for y in b] for x in b])
        assert np.allclose(ga, gb)


def test_observable_file_roundtrip():
    spec = ScenarioSpec("trilocal-II")
    obs = explicit_observables(spec)
    text = dumps_observables(ObservableDocument(spec, obs))
    doc = loads_observables(text)
    assert doc.spec == spec
    for p in spec.edge_parties:
        for a, b in zip(obs[p], doc.observables[p]):
            assert np.allclose(a, b, atol=1e-15)


def test_observable_file_imaginary_literals():
    spec = ScenarioSpec("bilocal-II")
    text = dumps_observables(ObservableDocument(spec, explicit_observables(spec)))
    assert "-1i" in text and "+1i" in text


def test_observable_file_rejects_non_hermitian():
    spec = ScenarioSpec("standard-bilocal")
    obs = explicit_observables(spec)
    obs["A"] = [np.array([[0, 1], [0, 0]], dtype=complex), qc.SX]
    with pytest.raises(ContractError):
        loads_observables(dumps_observables(ObservableDocument(spec, obs)))


def test_observable_file_rejects_wrong_count():
    spec = ScenarioSpec("standard-bilocal")
    obs = explicit_observables(spec)
    obs["A"] = obs["A"][:1]
    with pytest.raises(ShapeError):
        loads_observables(dumps_observables(ObservableDocument(spec, obs)))
