import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerkit import (
    Assemblage, BudgetError, ConstraintError, SolverError, bell_xz_assemblage, uniform_assemblage,
)
from steerkit.lhs import (
    enumerate_strategies, esw_upper_bound, is_unsteerable, restricted_sw_oracle, restricted_sw_split,
    steering_weight,
)
from steerkit.qubit import RestrictedAssemblage, component_value, noncontinuity_assemblage
from steerkit.realization import werner_assemblage
from steerkit.sdp import solve_lhs_fraction

import oracles


# -- strategies ------------------------------------------------------------------

def test_strategy_enumeration():
    s = enumerate_strategies(2, 2)
    assert [x.assignment for x in s] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert s[2].response(1, 0) == 1 and s[2].response(1, 1) == 0
    assert len(enumerate_strategies(3, 2)) == 9
    assert len(enumerate_strategies(2, 3)) == 8
    with pytest.raises(BudgetError):
        enumerate_strategies(4, 7)


# -- steering weight examples ----------------------------------------------------------

def test_named_steering_weights(werner_printed):
    assert steering_weight(werner_printed).sw <= 1e-6
    assert steering_weight(werner_assemblage(1 / math.sqrt(2))).sw <= 1e-6
    assert steering_weight(bell_xz_assemblage()).sw >= 1 - 1e-6
    for shape in [(2, 2, 2), (3, 2, 2), (2, 3, 3)]:
        assert steering_weight(uniform_assemblage(*shape)).sw <= 1e-7


def test_unsteerable_certificates():
    for a in (werner_assemblage(0.5), noncontinuity_assemblage(0.0)):
        ok, model = is_unsteerable(a)
        assert ok
        assert model.weight == pytest.approx(1.0, abs=1e-7)
        assert np.max(np.abs(model.assemblage().elements - a.elements)) <= 1e-7
        for st_ in model.states:
            assert np.linalg.eigvalsh(st_)[0] >= -1e-9
    ok, model = is_unsteerable(bell_xz_assemblage())
    assert not ok and model is None


def test_esw_examples():
    assert esw_upper_bound(werner_assemblage(1 / math.sqrt(2))) == 0.0
    assert esw_upper_bound(bell_xz_assemblage()) == pytest.approx(1.0, abs=1e-6)


def test_steering_weight_of_noncontinuity_family_vanishes():
    values = [steering_weight(noncontinuity_assemblage(e)).sw for e in (0.3, 0.1, 0.01, 0.0)]
    assert all(b <= a + 1e-8 for a, b in zip(values, values[1:]))
    assert values[-1] <= 1e-8


def test_invalid_input_rejected():
    el = uniform_assemblage().elements.copy()
    el[0, 0] += 0.1 * np.eye(2)
    with pytest.raises(ConstraintError):
        steering_weight(Assemblage(el))


def test_solver_iteration_limit(rng):
    a = Assemblage(oracles.random_elements(rng))
    memb = np.array([[l0 * 2, l1 * 2 + 1] for l0 in range(2) for l1 in range(2)])
    with pytest.raises(SolverError) as info:
        solve_lhs_fraction(a.elements.reshape(4, 2, 2), memb, max_iter=2)
    assert info.value.diagnostics


# -- reconstruction and invariances -------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3)]))
def test_reconstruction(seed, shape):
    a = Assemblage(oracles.random_elements(np.random.default_rng(seed), *shape))
    res = steering_weight(a)
    assert 0.0 <= res.sw <= 1.0
    assert np.max(np.abs(res.reconstruct().elements - a.elements)) <= 1e-7
    assert res.gap <= 1e-8
    if res.steerable_part is not None:
        m = res.steerable_part.elements.sum(axis=0)
        assert abs(np.trace(m[0]).real - 1.0) <= 1e-7


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_output_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    a = Assemblage(oracles.random_elements(rng, 3, 2, 2))
    el = a.elements.copy()
    el[:, 1] = el[[2, 0, 1], 1]
    assert steering_weight(a).sw == pytest.approx(steering_weight(Assemblage(el)).sw, abs=1e-7)


def test_input_relabel_invariance(rng):
    a = Assemblage(oracles.random_elements(rng, 2, 3, 2))
    b = Assemblage(a.elements[:, [2, 0, 1]])
    assert steering_weight(a).sw == pytest.approx(steering_weight(b).sw, abs=1e-7)


# -- restricted oracle ------------------------------------------------------------------------

def test_oracle_examples():
    assert restricted_sw_oracle(RestrictedAssemblage(0, 0, 1, 0, 0)) == pytest.approx(1.0, abs=1e-12)
    assert restricted_sw_oracle(RestrictedAssemblage(0, 0, 0, 0, 0)) == 0.0
    with pytest.raises(ConstraintError):
        restricted_sw_oracle(RestrictedAssemblage(0.1, 0, 0, 0, 0))


def test_oracle_matches_closed_form(rng):
    for _ in range(500):
        v = oracles.random_ball(rng)
        rb = RestrictedAssemblage(0, 0, *v)
        assert restricted_sw_oracle(rb) == pytest.approx(
            oracles.restricted_sw_closed_form(rb.k, rb.z1), abs=1e-9)


def test_oracle_matches_sdp_sample(rng):
    for _ in range(20):
        rb = RestrictedAssemblage(0, 0, *oracles.random_ball(rng))
        assert steering_weight(rb.to_assemblage()).sw == pytest.approx(restricted_sw_oracle(rb), abs=1e-6)


def test_sw_split_is_a_valid_decomposition(rng):
    for _ in range(200):
        rb = RestrictedAssemblage(0, 0, *oracles.random_ball(rng))
        w, lhs, gamma = restricted_sw_split(rb)
        assert lhs.is_valid(1e-12) and component_value(lhs) == pytest.approx(0.0, abs=1e-12)
        if gamma is None:
            assert w == pytest.approx(1.0)
            continue
        assert gamma.is_valid(1e-9)
        assert 1 - w == pytest.approx(restricted_sw_oracle(rb), abs=1e-12)
        assert np.allclose(w * lhs.vector() + (1 - w) * gamma.vector(), rb.vector(), atol=1e-12)


# -- independent SDP ---------------------------------------------------------------------------

def test_against_cvxpy(rng):
    cp = pytest.importorskip("cvxpy")
    for shape in [(2, 2, 2), (3, 2, 2), (2, 3, 2)]:
        a = Assemblage(oracles.random_elements(rng, *shape))
        N, R, d = shape
        strategies = enumerate_strategies(N, R)
        S = [cp.Variable((d, d), hermitian=True) for _ in strategies]
        cons = [s >> 0 for s in S]
        for n in range(N):
            for r in range(R):
                part = sum(S[i] for i, lam in enumerate(strategies) if lam.assignment[r] == n)
                cons.append(a[n, r] - part >> 0)
        prob = cp.Problem(cp.Maximize(cp.real(sum(cp.trace(s) for s in S))), cons)
        prob.solve(solver=cp.CLARABEL)
        assert steering_weight(a).sw == pytest.approx(1 - prob.value, abs=1e-6)
