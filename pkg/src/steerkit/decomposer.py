"""Two-component decompositions of restricted qubit assemblages.

A target with ``t0 = t1 = 0`` and ``y1 = 0`` is split as
``p * a + (1 - p) * b``; component ``a`` is free, ``b`` is solved from the
split, and each component is valued by its own equal-value bound. The split
is searched by multi-start Nelder-Mead with a quadratic feasibility penalty.
The equal-value split (``a = b = target``) and the steering-weight split are
always among the starting points, so the result never exceeds either bound.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import ConstraintError
from .keyrate import key_rate_lower_bound
from .lhs import esw_upper_bound, restricted_sw_split
from .qubit import RestrictedAssemblage, component_value, entropy_of_bloch, equal_value_T

TIE_TOL = 1e-9
IMPROVEMENT_MARGIN = 1e-3
FEAS_TOL = 1e-12
DEFAULT_RESTARTS = 64


@dataclass(frozen=True)
class SplitCandidate:
    p: float
    a: RestrictedAssemblage
    b: RestrictedAssemblage
    value: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def mixture(self) -> RestrictedAssemblage:
        return RestrictedAssemblage.from_vector(self.p * self.a.vector() + (1 - self.p) * self.b.vector())

    def reconstruction_error(self, target: RestrictedAssemblage) -> float:
        return float(np.max(np.abs(self.mixture().vector() - target.vector())))


def equal_value_bound(rb: RestrictedAssemblage) -> float:
    """``E(T_sigma)`` for a point with ``t0 = t1 = 0``."""
    return entropy_of_bloch((0.0, 0.0, equal_value_T(rb)))


def _check_target(rb: RestrictedAssemblage) -> None:
    if abs(rb.t0) > 1e-9 or abs(rb.t1) > 1e-9:
        raise ConstraintError("split optimisation needs t0 = t1 = 0")
    if abs(rb.y1) > 1e-9:
        raise ConstraintError("split optimisation needs y1 = 0 (apply rebit_canonicalize first)")
    if not rb.is_valid(1e-9):
        raise ConstraintError("target is not a valid assemblage")


class _Objective:
    """Penalised split value over ``v = (p, t0a, x1a, z1a, t1a)``."""

    def __init__(self, rb: RestrictedAssemblage):
        self.target = rb.vector()
        self.best: SplitCandidate | None = None
        self.evaluations = 0

    def split(self, v):
        p = float(v[0])
        a = RestrictedAssemblage(float(v[1]), float(v[4]), float(v[2]), 0.0, float(v[3]))
        if p >= 1.0:
            return p, a, a
        b = RestrictedAssemblage.from_vector((self.target - p * a.vector()) / (1.0 - p))
        return p, a, b

    def offer(self, p, a, b, value):
        if self.best is None or value < self.best.value:
            self.best = SplitCandidate(p, a, b, value)

    def __call__(self, v, mu):
        self.evaluations += 1
        p = float(v[0])
        pv = max(0.0, -p) + max(0.0, p - 1.0 + 1e-9)
        if pv > 0:
            return 2.0 + mu * pv * pv
        p, a, b = self.split(v)
        va, vb = a.violation(), b.violation()
        ea = component_value(a) if va <= FEAS_TOL else None
        eb = component_value(b) if vb <= FEAS_TOL else None
        value = p * (1.0 if ea is None else ea) + (1.0 - p) * (1.0 if eb is None else eb)
        if ea is not None and eb is not None:
            self.offer(p, a, b, value)
        return value + mu * (va * va + vb * vb)


def _seeds(rb: RestrictedAssemblage) -> list[np.ndarray]:
    seeds = [np.array([0.5, 0.0, rb.x1, rb.z1, 0.0])]  # a = b = target
    w, lhs, gamma = restricted_sw_split(rb)
    if gamma is not None and w > 0:
        seeds.append(np.array([w, 0.0, 0.0, lhs.z1, 0.0]))
    return seeds


def optimize_split(
    rb: RestrictedAssemblage,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    rounds: int = 3,
    maxfev: int = 400,
) -> SplitCandidate:
    """Best two-component split found from the seeded starts plus ``restarts``
    scrambled Sobol points over the parameter box.

    Each start runs ``rounds`` Nelder-Mead passes with the penalty weight
    multiplied by 10 between passes.
    """
    _check_target(rb)
    obj = _Objective(rb)
    ev = equal_value_bound(rb)
    obj.offer(1.0, rb, rb, ev)
    w, lhs, gamma = restricted_sw_split(rb)
    if gamma is None:
        # unsteerable: the LHS part is the target itself and is worth 0
        obj.offer(1.0, lhs, lhs, component_value(lhs))

    starts = _seeds(rb)
    if restarts > 0:
        sob = qmc.Sobol(d=5, scramble=True, seed=seed)
        pts = sob.random_base2(max(0, math.ceil(math.log2(restarts))))[:restarts]
        lo, hi = np.array([0, -1, -1, -1, -1.0]), np.array([1, 1, 1, 1, 1.0])
        starts += list(qmc.scale(pts, lo, hi))
    for x0 in starts:
        x = np.asarray(x0, dtype=float)
        mu = 10.0
        for _ in range(rounds):
            res = minimize(obj, x, args=(mu,), method="Nelder-Mead",
                           options={"maxfev": maxfev, "xatol": 1e-10, "fatol": 1e-12})
            x = res.x
            mu *= 10.0
    best = obj.best
    diag = {"evaluations": obj.evaluations, "starts": len(starts), "equal_value": ev}
    return SplitCandidate(best.p, best.a, best.b, best.value, diag)


# -- strategy comparison and scans ------------------------------------------

@dataclass(frozen=True)
class StrategyComparison:
    x1: float
    z1: float
    equal_value: float
    esw: float
    keyrate_lower: float
    optimized: float | None
    winner: str  # "equal-value", "steering-weight", "tie" or "optimized"

    @property
    def improved(self) -> bool:
        return self.optimized is not None and self.optimized < min(self.equal_value, self.esw) - IMPROVEMENT_MARGIN


def _winner(ev: float, esw: float, opt: float | None) -> str:
    if opt is not None and opt < min(ev, esw) - TIE_TOL:
        return "optimized"
    if abs(ev - esw) <= TIE_TOL:
        return "tie"
    return "equal-value" if ev < esw else "steering-weight"


def compare_strategies(
    rb: RestrictedAssemblage, optimize: bool = True, restarts: int = DEFAULT_RESTARTS, seed: int = 0
) -> StrategyComparison:
    """Equal-value, steering-weight and (optionally) optimised split bounds.

    The winner is the smaller of the two closed strategies with ties at 1e-9;
    it reads ``optimized`` when the split search beats both.
    """
    _check_target(rb)
    a = rb.to_assemblage()
    ev = equal_value_bound(rb)
    esw = esw_upper_bound(a)
    kr = key_rate_lower_bound(a).clamped
    opt = optimize_split(rb, restarts, seed).value if optimize else None
    return StrategyComparison(rb.x1, rb.z1, ev, esw, kr, opt, _winner(ev, esw, opt))


@dataclass(frozen=True)
class GridPoint:
    i: int  # radius index, rho = i * rho_step
    j: int  # angle index, phi = j * phi_step degrees
    rho: float
    phi_deg: float

    @property
    def x1(self) -> float:
        return self.rho * math.cos(math.radians(self.phi_deg))

    @property
    def z1(self) -> float:
        return self.rho * math.sin(math.radians(self.phi_deg))

    def restricted(self) -> RestrictedAssemblage:
        return RestrictedAssemblage(0.0, 0.0, self.x1, 0.0, self.z1)


def polar_grid(n_rho: int = 50, n_phi: int = 90, rho_stride: int = 1, phi_stride: int = 1) -> list[GridPoint]:
    """``rho = i / n_rho`` for ``0 < i < n_rho`` and ``phi = 90 j / n_phi`` degrees
    for ``0 <= j <= n_phi``; strides thin the grid."""
    pts = []
    for i in range(rho_stride, n_rho, rho_stride):
        for j in range(0, n_phi + 1, phi_stride):
            pts.append(GridPoint(i, j, i / n_rho, 90.0 * j / n_phi))
    return pts


def _scan_one(args):
    pt, optimize, restarts, seed = args
    return compare_strategies(pt.restricted(), optimize, restarts, seed)


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        jobs = int(os.environ.get("STEERKIT_JOBS", "1") or 1)
    return max(1, jobs)


def scan_region(
    points: list[GridPoint], optimize: bool = False, restarts: int = DEFAULT_RESTARTS,
    seed: int = 0, jobs: int | None = None,
) -> list[StrategyComparison]:
    """Compare strategies on every grid point; point ``k`` uses seed ``seed + k``.

    Results come back in grid order whatever the number of workers.
    """
    work = [(pt, optimize, restarts, seed + k) for k, pt in enumerate(points)]
    jobs = resolve_jobs(jobs)
    if jobs == 1:
        return [_scan_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_scan_one, work, chunksize=max(1, len(work) // (4 * jobs))))


def region_boundary(points: list[GridPoint], rows: list[StrategyComparison]) -> list[tuple[float, float | None]]:
    """Per angle, the smallest radius where the steering weight beats equal value."""
    inner: dict[float, float | None] = {}
    for pt, row in zip(points, rows):
        inner.setdefault(pt.phi_deg, None)
        if row.esw < row.equal_value - TIE_TOL:
            cur = inner[pt.phi_deg]
            inner[pt.phi_deg] = pt.rho if cur is None else min(cur, pt.rho)
    return sorted(inner.items())
