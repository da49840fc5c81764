"""Deterministic strategies, LHS models and the steering weight."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .assemblage import Assemblage, marginal, require_valid
from .errors import BudgetError, ConstraintError
from .linalg import von_neumann_entropy
from .qubit import RestrictedAssemblage
from .sdp import solve_lhs_fraction

MAX_STRATEGIES = 4096
SW_TOL = 1e-7


@dataclass(frozen=True)
class DeterministicStrategy:
    """Response function ``r -> assignment[r]``."""

    index: int
    assignment: tuple[int, ...]

    def response(self, n: int, r: int) -> int:
        return int(self.assignment[r] == n)


def enumerate_strategies(n_outputs: int, n_inputs: int, cap: int = MAX_STRATEGIES) -> list[DeterministicStrategy]:
    """All ``n_outputs ** n_inputs`` strategies in lexicographic order."""
    count = n_outputs**n_inputs
    if count > cap:
        raise BudgetError(f"{count} deterministic strategies exceed the cap of {cap}")
    return [
        DeterministicStrategy(i, lam)
        for i, lam in enumerate(itertools.product(range(n_outputs), repeat=n_inputs))
    ]


@dataclass(frozen=True, eq=False)
class LhsModel:
    """Sub-normalised hidden states, one per deterministic strategy."""

    strategies: tuple[DeterministicStrategy, ...]
    states: np.ndarray  # (d, m, m)
    n_outputs: int

    @property
    def weight(self) -> float:
        return float(np.real(np.trace(self.states, axis1=1, axis2=2)).sum())

    def assemblage(self) -> Assemblage:
        """``sum_l D(n|l, r) sigma_l`` (same normalisation as the states)."""
        R = len(self.strategies[0].assignment)
        m = self.states.shape[1]
        el = np.zeros((self.n_outputs, R, m, m), dtype=complex)
        for s, st in zip(self.strategies, self.states):
            for r, n in enumerate(s.assignment):
                el[n, r] += st
        return Assemblage(el)

    def normalized(self) -> Assemblage:
        w = self.weight
        if w <= 0:
            raise ConstraintError("LHS model has zero weight")
        return self.assemblage() * (1.0 / w)


@dataclass(frozen=True, eq=False)
class SteeringWeightResult:
    sw: float
    lhs_part: LhsModel  # sub-normalised, total weight 1 - sw
    steerable_part: Assemblage | None  # normalised gamma, None when sw is ~0
    iterations: int
    gap: float
    diagnostics: dict = field(default_factory=dict)

    def reconstruct(self) -> Assemblage:
        out = self.lhs_part.assemblage()
        if self.steerable_part is not None:
            out = out + self.steerable_part * self.sw
        return out


def _membership(strategies, R: int) -> np.ndarray:
    return np.array([[lam.assignment[r] * R + r for r in range(R)] for lam in strategies])


def steering_weight(a: Assemblage, tol: float = 1e-8, cap: int = MAX_STRATEGIES) -> SteeringWeightResult:
    """Steering weight via the LHS-fraction SDP.

    ``tol`` bounds the duality gap. The hidden states are returned with their
    optimal weights, so ``reconstruct()`` gives back ``a``.
    """
    require_valid(a)
    N, R, m = a.shape
    strategies = enumerate_strategies(N, R, cap)
    blocks = a.elements.reshape(N * R, m, m)
    res = solve_lhs_fraction(blocks, _membership(strategies, R), gap_tol=min(tol, 1e-9))
    sw = float(np.clip(1.0 - res.primal_value, 0.0, 1.0))
    lhs = LhsModel(tuple(strategies), res.lhs_states, N)
    gamma = None
    if sw > SW_TOL:
        gamma = (a - lhs.assemblage()) * (1.0 / sw)
    diag = {
        "primal": res.primal_value, "dual": res.dual_value,
        "primal_residual": res.primal_residual, "dual_residual": res.dual_residual,
    }
    return SteeringWeightResult(sw, lhs, gamma, res.iterations, res.gap, diag)


def is_unsteerable(a: Assemblage, tol: float = SW_TOL) -> tuple[bool, LhsModel | None]:
    """True with an LHS certificate when the steering weight is at most ``tol``."""
    res = steering_weight(a)
    if res.sw <= tol:
        return True, res.lhs_part
    return False, None


def esw_upper_bound(a: Assemblage, tol: float = SW_TOL, result: SteeringWeightResult | None = None) -> float:
    """``SW * S(marginal of gamma)``; zero for unsteerable assemblages."""
    res = result if result is not None else steering_weight(a)
    if res.sw <= tol or res.steerable_part is None:
        return 0.0
    return res.sw * von_neumann_entropy(marginal(res.steerable_part))


def _symmetric_lhs(rb: RestrictedAssemblage) -> tuple[float, float]:
    """Best symmetric LHS weights ``(a, b)`` with ``alpha1 = alpha4 = a``, ``alpha2 = alpha3 = b``."""
    z, k2 = rb.z1, rb.k**2
    if k2 == 0.0:
        # the second input is diagonal: the full weight 1/2 + 1/2 fits
        a = (1.0 + z) / 4.0
        return a, 0.5 - a
    if 1.0 - z <= 0.0 or 1.0 + z <= 0.0:
        return 0.0, 0.0
    a_max = (1.0 + z - k2 / (1.0 - z)) / 4.0
    if a_max <= 0.0:
        return 0.0, 0.0

    def b_of(a):
        den = 1.0 + z - 4.0 * a
        if den <= 0.0:
            return -np.inf
        return min(0.5 - a, (1.0 - z - k2 / den) / 4.0)

    grid = np.linspace(0.0, a_max, 2001)
    vals = np.array([g + b_of(g) for g in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best_a, best_v = float(grid[i]), float(vals[i])
    if hi > lo:
        opt = minimize_scalar(lambda g: -(g + b_of(g)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        if -opt.fun > best_v:
            best_a, best_v = float(opt.x), float(-opt.fun)
    return best_a, max(0.0, b_of(best_a))


def restricted_sw_oracle(rb: RestrictedAssemblage) -> float:
    """Steering weight of a restricted point with ``t0 = t1 = 0``, without an SDP.

    Uses the reduction to four LHS weights on the deterministic points and the
    symmetry ``alpha1 = alpha4``, ``alpha2 = alpha3``; the remaining problem is
    a concave maximisation in one variable.
    """
    if abs(rb.t0) > 1e-9 or abs(rb.t1) > 1e-9:
        raise ConstraintError("the restricted oracle needs t0 = t1 = 0")
    a, b = _symmetric_lhs(rb)
    return float(min(1.0, max(0.0, 1.0 - 2.0 * (a + b))))


def restricted_sw_split(rb: RestrictedAssemblage) -> tuple[float, RestrictedAssemblage, RestrictedAssemblage | None]:
    """Steering-weight split of a ``t0 = t1 = 0`` point into restricted parameters.

    Returns ``(1 - SW, lhs, gamma)``: the LHS part is diagonal in the second
    input (so its own equal-value bound is 0) and ``gamma`` is None when SW = 0.
    """
    a, b = _symmetric_lhs(rb)
    w = 2.0 * (a + b)
    if w <= 0.0:
        return 0.0, RestrictedAssemblage(), rb
    lhs = RestrictedAssemblage(0.0, 0.0, 0.0, 0.0, (a - b) / (a + b))
    if w >= 1.0 - 1e-15:
        return 1.0, lhs, None
    gamma = RestrictedAssemblage.from_vector((rb.vector() - w * lhs.vector()) / (1.0 - w))
    return w, lhs, gamma


__all__ = [
    "DeterministicStrategy", "LhsModel", "SteeringWeightResult", "MAX_STRATEGIES",
    "enumerate_strategies", "steering_weight", "is_unsteerable", "esw_upper_bound",
    "restricted_sw_oracle", "restricted_sw_split",
]
