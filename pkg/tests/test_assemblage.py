import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerkit import (
    Assemblage, BudgetError, ConstraintError, RewiringMap, ShapeError, assemblage_norm,
    bell_xz_assemblage, distance, marginal, rewire, tensor_power, uniform_assemblage, validate,
)
from steerkit.assemblage import dumps, loads, require_valid
from steerkit.lhs import steering_weight
from steerkit.qubit import noncontinuity_assemblage

import oracles


def random_assemblage(seed, N=2, R=2, d=2):
    return Assemblage(oracles.random_elements(np.random.default_rng(seed), N, R, d))


seeds = st.integers(0, 2**31 - 1)


# -- construction and validation ---------------------------------------------

def test_elements_are_read_only():
    a = uniform_assemblage()
    with pytest.raises(ValueError):
        a.elements[0, 0, 0, 0] = 1.0


def test_bad_shape_rejected():
    with pytest.raises(ShapeError):
        Assemblage(np.zeros((2, 2, 2, 3)))
    with pytest.raises(ShapeError):
        Assemblage(np.zeros((2, 2, 2)))


def test_from_dict_missing_element():
    with pytest.raises(ShapeError, match=r"sigma\[1\|0\]"):
        Assemblage.from_dict({(0, 0): np.eye(2)}, 2, 1)


def test_printed_werner_example_is_valid(werner_printed):
    assert validate(werner_printed).ok


def test_uniform_is_valid():
    for N, R, d in [(2, 2, 2), (3, 2, 2), (2, 3, 3)]:
        a = uniform_assemblage(N, R, d)
        assert validate(a).ok
        assert np.allclose(a[0, 0], np.eye(d) / (N * d))


def test_perturbation_reports_no_signalling_violation(werner_printed):
    el = werner_printed.elements.copy()
    el[0, 0] += 0.01 * np.eye(2)
    report = validate(Assemblage(el))
    assert not report.ok
    ns = [v for v in report.violations if v.kind == "no-signalling"]
    assert len(ns) == 1
    assert ns[0].index == (0, 1)
    assert ns[0].magnitude == pytest.approx(0.01, abs=1e-12)
    with pytest.raises(ConstraintError):
        require_valid(Assemblage(el))


def test_negative_element_named():
    el = uniform_assemblage().elements.copy()
    el[1, 1] = np.diag([0.6, -0.1])
    el[0, 1] = np.diag([-0.1, 0.6])
    kinds = {(v.kind, v.index) for v in validate(Assemblage(el)).violations}
    assert ("positivity", (1, 1)) in kinds
    assert ("positivity", (0, 1)) in kinds


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 3), st.integers(1, 3), st.integers(2, 3))
def test_induced_assemblages_validate(seed, N, R, d):
    a = random_assemblage(seed, N, R, d)
    assert validate(a).ok
    sums = a.elements.sum(axis=0)
    for r in range(R):
        assert np.max(np.abs(sums[r] - sums[0])) <= 1e-9


# -- marginal ------------------------------------------------------------------

def test_marginal_examples(werner_printed, rng):
    assert np.allclose(marginal(werner_printed), np.eye(2) / 2, atol=1e-15)
    rho = oracles.random_density(rng, 3)
    a = Assemblage(np.array([[rho / 4]] * 4))
    assert np.allclose(marginal(a), rho, atol=1e-15)
    for eps in (0.0, 0.1, 0.5, 1.0):
        assert np.allclose(marginal(noncontinuity_assemblage(eps)), np.eye(2) / 2, atol=1e-15)


# -- norm and distance ----------------------------------------------------------

def test_norm_examples():
    assert assemblage_norm(uniform_assemblage() * 0.0) == 0.0
    assert assemblage_norm(bell_xz_assemblage()) == pytest.approx(2.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(seeds, st.floats(-3, 3))
def test_norm_axioms(seed, c):
    rng = np.random.default_rng(seed)
    a, b, e = (Assemblage(rng.normal(size=(2, 2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2, 2))) for _ in range(3))
    assert assemblage_norm(a) > 0
    assert assemblage_norm(a * c) == pytest.approx(abs(c) * assemblage_norm(a), rel=1e-12, abs=1e-15)
    assert assemblage_norm(a + b) <= assemblage_norm(a) + assemblage_norm(b) + 1e-12
    assert distance(a, e) <= distance(a, b) + distance(b, e) + 1e-12
    assert distance(a, a) == 0.0


def test_noncontinuity_distance_closed_form():
    # two rank-one halves move; each contributes sqrt2 * sin(angle) / 2
    zero = noncontinuity_assemblage(0.0)
    prev = None
    for eps in (0.5, 0.1, 0.01, 0.001):
        d = distance(noncontinuity_assemblage(eps), zero)
        assert d == pytest.approx(math.sqrt(2) * eps, rel=1e-9)
        if prev is not None:
            assert d < prev
        prev = d


def test_distance_shape_mismatch():
    with pytest.raises(ShapeError):
        distance(uniform_assemblage(2, 2, 2), uniform_assemblage(3, 2, 2))


# -- tensor powers -----------------------------------------------------------------

def test_tensor_power_k1_identity(werner_printed):
    assert np.array_equal(tensor_power(werner_printed, 1).elements, werner_printed.elements)


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([1, 2, 3]))
def test_tensor_power_multiplicative(seed, k):
    a = random_assemblage(seed)
    ak = tensor_power(a, k)
    assert ak.shape == (2**k, 2**k, 2**k)
    assert validate(ak).ok
    expect = assemblage_norm(a) ** k
    assert abs(assemblage_norm(ak) - expect) <= 1e-12 * expect
    m = marginal(a)
    mk = m
    for _ in range(k - 1):
        mk = np.kron(mk, m)
    assert np.max(np.abs(marginal(ak) - mk)) <= 1e-12


def test_tensor_power_index_order():
    a = bell_xz_assemblage()
    a2 = tensor_power(a, 2)
    # output (1, 0) on inputs (0, 1) sits at n = 2, r = 1
    assert np.allclose(a2[2, 1], np.kron(a[1, 0], a[0, 1]))


def test_tensor_power_budget():
    with pytest.raises(BudgetError):
        tensor_power(bell_xz_assemblage(), 7)
    with pytest.raises(ValueError):
        tensor_power(bell_xz_assemblage(), 0)


# -- rewiring ------------------------------------------------------------------------

def test_identity_maps(werner_printed):
    for w in (RewiringMap.identity_inputs(2), RewiringMap.identity_outputs(2, 2)):
        assert np.array_equal(rewire(werner_printed, w).elements, werner_printed.elements)


def test_merge_outputs_gives_marginal(rng):
    a = Assemblage(oracles.random_elements(rng, 3, 2, 2))
    merged = rewire(a, RewiringMap("output", np.ones((1, 2, 3))))
    assert merged.shape == (1, 2, 2)
    for r in range(2):
        assert np.allclose(merged[0, r], marginal(a), atol=1e-14)


def test_averaged_inputs_of_bell_are_unsteerable():
    a = rewire(bell_xz_assemblage(), RewiringMap("input", np.full((2, 2), 0.5)))
    sx = np.array([[0, 1], [1, 0]])
    sz = np.diag([1.0, -1.0])
    for r in range(2):
        for n, s in enumerate((1, -1)):
            assert np.allclose(a[n, r], 0.5 * (np.eye(2) / 2 + s * (sx + sz) / 4), atol=1e-15)
    assert steering_weight(a).sw <= 1e-7


def test_rewiring_validation():
    with pytest.raises(ConstraintError):
        RewiringMap("input", np.array([[0.5, 1.0], [0.4, 0.0]]))
    with pytest.raises(ConstraintError):
        RewiringMap("input", np.array([[1.5, 0.0], [-0.5, 1.0]]))
    with pytest.raises(ShapeError):
        RewiringMap("output", np.eye(2))
    with pytest.raises(ValueError):
        RewiringMap("sideways", np.eye(2))
    with pytest.raises(ShapeError):
        rewire(bell_xz_assemblage(), RewiringMap.identity_inputs(3))


# -- JSON --------------------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(seeds)
def test_json_roundtrip(seed):
    a = random_assemblage(seed, 3, 2, 2)
    b = loads(dumps(a))
    assert np.array_equal(a.elements, b.elements)


def test_json_errors():
    doc = json.loads(dumps(bell_xz_assemblage()))
    doc["elements"]["5|0"] = doc["elements"]["0|0"]
    with pytest.raises(ShapeError):
        loads(json.dumps(doc))
    with pytest.raises(ShapeError):
        loads(json.dumps({"n_outputs": 2}))
