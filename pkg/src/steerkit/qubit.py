"""Qubit assemblages with two inputs and two outputs in Bloch form.

The marginal is a Bloch vector ``x`` and input ``r`` is described by the
four-vector ``(t_r, x_r, y_r, z_r)`` of ``sigma_r = sigma_{0|r} - sigma_{1|r}``::

    rho       = (I + x . pauli) / 2
    sigma_r   = (t_r I + x_r . pauli) / 2
    sigma_n|r = (rho + (-1)^n sigma_r) / 2

The restricted family fixes ``sigma_{n|0}`` proportional to ``|n><n|``, which
leaves the parameters ``t0`` and ``(t1, x1, y1, z1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .assemblage import Assemblage, require_valid
from .errors import ConstraintError, ShapeError
from .linalg import I2, PAULIS, SX, SY, SZ, binary_entropy

EXTREMAL_TOL = 1e-7
_FEAS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BlochAssemblage:
    x: np.ndarray  # (3,)
    xt: np.ndarray  # (2, 4): rows (t_r, x_r, y_r, z_r)

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(3)
        xt = np.array(self.xt, dtype=float).reshape(2, 4)
        x.setflags(write=False)
        xt.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xt", xt)

    def vec(self, r: int) -> np.ndarray:
        """Pauli part ``x_r`` of input ``r``."""
        return self.xt[r, 1:]

    def t(self, r: int) -> float:
        return float(self.xt[r, 0])


def to_bloch(a: Assemblage) -> BlochAssemblage:
    if a.shape != (2, 2, 2):
        raise ShapeError(f"Bloch form needs |N| = |R| = dim_b = 2, got {a.shape}")
    rho = a.elements[:, 0].sum(axis=0)
    x = [float(np.real(np.trace(rho @ p))) for p in PAULIS]
    xt = []
    for r in range(2):
        s = a.elements[0, r] - a.elements[1, r]
        xt.append([float(np.real(np.trace(s)))] + [float(np.real(np.trace(s @ p))) for p in PAULIS])
    return BlochAssemblage(np.array(x), np.array(xt))


def _pauli(v) -> np.ndarray:
    return v[0] * SX + v[1] * SY + v[2] * SZ


def from_bloch(b: BlochAssemblage) -> Assemblage:
    rho = (I2 + _pauli(b.x)) / 2
    el = np.empty((2, 2, 2, 2), dtype=complex)
    for r in range(2):
        s = (b.t(r) * I2 + _pauli(b.vec(r))) / 2
        el[0, r] = (rho + s) / 2
        el[1, r] = (rho - s) / 2
    return Assemblage(el)


@dataclass(frozen=True)
class RestrictedAssemblage:
    """Restricted qubit assemblage: ``sigma_{n|0}`` is diagonal and rank one.

    Parameters are the marginal z-component ``t0`` and the second input's
    four-vector ``(t1, x1, y1, z1)``.
    """

    t0: float = 0.0
    t1: float = 0.0
    x1: float = 0.0
    y1: float = 0.0
    z1: float = 0.0

    @classmethod
    def from_vector(cls, v) -> "RestrictedAssemblage":
        t0, t1, x1, y1, z1 = (float(c) for c in v)
        return cls(t0, t1, x1, y1, z1)

    def vector(self) -> np.ndarray:
        return np.array([self.t0, self.t1, self.x1, self.y1, self.z1])

    @property
    def xt1(self) -> tuple[float, float, float, float]:
        return (self.t1, self.x1, self.y1, self.z1)

    @property
    def k(self) -> float:
        """Transverse length ``sqrt(x1^2 + y1^2)``."""
        return math.hypot(self.x1, self.y1)

    def violation(self) -> float:
        """Total positivity violation; zero iff the assemblage is valid."""
        v = max(0.0, abs(self.t0) - 1.0)
        v += max(0.0, math.sqrt(self.k**2 + (self.z1 + self.t0) ** 2) - 1.0 - self.t1)
        v += max(0.0, math.sqrt(self.k**2 + (self.z1 - self.t0) ** 2) - 1.0 + self.t1)
        return v

    def is_valid(self, tol: float = _FEAS_TOL) -> bool:
        return self.violation() <= tol

    def to_bloch(self) -> BlochAssemblage:
        return BlochAssemblage(
            np.array([0.0, 0.0, self.t0]),
            np.array([[self.t0, 0.0, 0.0, 1.0], [self.t1, self.x1, self.y1, self.z1]]),
        )

    def to_assemblage(self) -> Assemblage:
        return from_bloch(self.to_bloch())

    def __add__(self, other: "RestrictedAssemblage") -> "RestrictedAssemblage":
        return RestrictedAssemblage.from_vector(self.vector() + other.vector())

    def __mul__(self, s: float) -> "RestrictedAssemblage":
        return RestrictedAssemblage.from_vector(self.vector() * s)

    __rmul__ = __mul__


def to_restricted(a: Assemblage, tol: float = 1e-9) -> RestrictedAssemblage:
    """Read restricted parameters off an assemblage, or raise ShapeError."""
    b = to_bloch(a)
    if np.max(np.abs(b.x[:2])) > tol or np.max(np.abs(b.xt[0] - [b.x[2], 0, 0, 1])) > tol:
        raise ShapeError("assemblage is not in the restricted family (sigma_n|0 must be |n><n| weighted)")
    return RestrictedAssemblage(float(b.x[2]), *(float(c) for c in b.xt[1]))


def entropy_of_bloch(x) -> float:
    """Von Neumann entropy (bits) of the qubit with Bloch vector ``x``."""
    n = float(np.linalg.norm(np.asarray(x, dtype=float)))
    if n > 1.0 + 1e-12:
        raise ConstraintError(f"Bloch vector length {n:.12g} exceeds 1")
    return binary_entropy((1.0 + min(n, 1.0)) / 2.0)


@dataclass(frozen=True)
class ExtremalityWitness:
    extremal: bool
    reason: str
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.extremal


def _directions(b: BlochAssemblage, r: int, tol: float) -> list[np.ndarray]:
    out = []
    for sign in (1.0, -1.0):
        v = b.x + sign * b.vec(r)
        n = np.linalg.norm(v)
        if n > tol:
            out.append(v / n)
    return out


def _same_set(u: list[np.ndarray], v: list[np.ndarray], tol: float) -> bool:
    if len(u) != len(v):
        return False
    left = list(v)
    for a in u:
        hit = next((i for i, c in enumerate(left) if np.linalg.norm(a - c) <= tol), None)
        if hit is None:
            return False
        left.pop(hit)
    return True


def is_extremal(b: BlochAssemblage, tol: float = EXTREMAL_TOL) -> ExtremalityWitness:
    """Extremality test for qubit assemblages with two inputs and two outputs.

    Every element must be rank one, and the two inputs must not produce the
    same set of pure states (otherwise the assemblage is a relabelled copy of
    a single ensemble and has an LHS decomposition). With a pure marginal the
    only extremal points are deterministic: ``x_r = +-x`` for both inputs.
    """
    xn = float(np.linalg.norm(b.x))
    if abs(xn - 1.0) <= tol:
        devs = [min(np.linalg.norm(b.vec(r) - b.x), np.linalg.norm(b.vec(r) + b.x)) for r in range(2)]
        tdev = [abs(abs(b.t(r)) - 1.0) for r in range(2)]
        if max(devs) <= tol and max(tdev) <= tol:
            return ExtremalityWitness(True, "degenerate", {"marginal_norm": xn})
        return ExtremalityWitness(False, "pure marginal but not deterministic", {"deviation": max(devs + tdev)})

    for r in range(2):
        plus = float(np.linalg.norm(b.x + b.vec(r)))
        minus = float(np.linalg.norm(b.x - b.vec(r)))
        mean_dev = abs((plus + minus) / 2.0 - 1.0)
        diff_dev = abs((plus - minus) / 2.0 - b.t(r))
        if mean_dev > tol or diff_dev > tol:
            return ExtremalityWitness(
                False, f"input {r} has a mixed element",
                {"input": r, "mean_deviation": mean_dev, "trace_deviation": diff_dev},
            )
    if _same_set(_directions(b, 0, tol), _directions(b, 1, tol), math.sqrt(tol)):
        return ExtremalityWitness(False, "both inputs prepare the same pure states", {})
    return ExtremalityWitness(True, "rank-one elements, distinct ensembles", {})


def rebit_canonicalize(rb: RestrictedAssemblage) -> RestrictedAssemblage:
    """Rotate about z so that ``y1 = 0`` and ``x1 >= 0``.

    The rotation is a local unitary commuting with ``sigma_z``, so the first
    input and every entanglement bound are unchanged.
    """
    return RestrictedAssemblage(rb.t0, rb.t1, rb.k, 0.0, rb.z1)


def equal_value_T(rb: RestrictedAssemblage) -> float:
    """Largest ``T`` for which ``rb`` (with ``t0 = t1 = 0``) splits into
    extremal points with ``|t0| = T``."""
    if abs(rb.t0) > 1e-9 or abs(rb.t1) > 1e-9:
        raise ConstraintError("equal_value_T needs t0 = t1 = 0; use max_equal_T for general points")
    r2 = rb.k**2 + rb.z1**2
    if r2 > 1.0 + 1e-12:
        raise ConstraintError(f"(x1, y1, z1) has length {math.sqrt(r2):.12g} > 1")
    den = 1.0 - rb.z1**2
    if den <= 1e-15:
        return 1.0
    # (1 - k^2 - z^2) / (1 - z^2), kept exact at k = 0 near the poles
    t2 = 1.0 - rb.k**2 / den
    if t2 <= 1e-14:
        return 0.0  # on the extremal sphere up to rounding
    return math.sqrt(min(1.0, t2))


def _family_slack(rb: RestrictedAssemblage, T):
    """Smallest constraint slack of the +-T extremal split (>= 0 iff feasible).

    Vectorised over ``T``; ``T = 0`` is only feasible when ``t0 = t1 = 0``.
    """
    T = np.asarray(T, dtype=float)
    t0, t1, z, k = rb.t0, rb.t1, rb.z1, rb.k
    up, dn = T + t0, T - t0
    zu, zd = z * T + t1, z * T - t1
    s1, s2 = up - np.abs(zu), dn - np.abs(zd)
    root = np.sqrt(np.maximum(0.0, 1.0 - T * T))
    reach = root * (np.sqrt(np.maximum(0.0, up * up - zu * zu)) + np.sqrt(np.maximum(0.0, dn * dn - zd * zd)))
    out = np.minimum(np.minimum(s1, s2), reach - 2.0 * T * k)
    at_zero = -max(abs(t0), abs(t1), k * k + z * z - 1.0)
    return np.where(T <= 0.0, at_zero, out)


def max_equal_T(rb: RestrictedAssemblage, tol: float = 1e-13) -> float | None:
    """Largest ``T`` admitting a split into extremal points with ``t0 = +-T``.

    Works for any valid restricted point and reduces to :func:`equal_value_T`
    when ``t0 = t1 = 0``. Returns None for invalid points and for points that
    admit no such split at all.
    """
    if not rb.is_valid(1e-12):
        return None
    if abs(rb.t0) <= 1e-15 and abs(rb.t1) <= 1e-15:
        return equal_value_T(RestrictedAssemblage(0.0, 0.0, rb.x1, rb.y1, rb.z1))
    lo = abs(rb.t0)
    for n in (65, 1025):
        ts = lo + (1.0 - lo) * np.linspace(0.0, 1.0, n)
        idx = np.flatnonzero(_family_slack(rb, ts) >= -tol)
        if idx.size:
            break
    else:
        return None
    i = int(idx[-1])
    if i == ts.size - 1:
        return 1.0

    t0, t1, z, k = rb.t0, rb.t1, rb.z1, rb.k

    def g(T):
        # scalar copy of _family_slack, for speed inside the root finder
        up, dn, zu, zd = T + t0, T - t0, z * T + t1, z * T - t1
        reach = math.sqrt(max(0.0, 1.0 - T * T)) * (
            math.sqrt(max(0.0, up * up - zu * zu)) + math.sqrt(max(0.0, dn * dn - zd * zd))
        )
        return min(up - abs(zu), dn - abs(zd), reach - 2.0 * T * k) + tol

    return float(brentq(g, float(ts[i]), float(ts[i + 1]), xtol=1e-14))


def component_value(rb: RestrictedAssemblage) -> float | None:
    """Upper bound on the entanglement of a general restricted point.

    The equal-value bound ``E(T)`` at the largest feasible ``T``; points with
    no equal-``|t0|`` split fall back to the marginal entropy. None when the
    point is not a valid assemblage.
    """
    if not rb.is_valid(1e-12):
        return None
    T = max_equal_T(rb)
    return entropy_of_bloch((0.0, 0.0, rb.t0 if T is None else T))


@dataclass(frozen=True)
class ExtremalFamily:
    members: tuple[RestrictedAssemblage, RestrictedAssemblage]
    weights: tuple[float, float]
    extremal: bool  # members sit on the extremal surface (T is maximal)

    def mixture(self) -> RestrictedAssemblage:
        (a, b), (w, v) = self.members, self.weights
        return w * a + v * b


def extremal_family(rb: RestrictedAssemblage, T: float, tol: float = 1e-10) -> ExtremalFamily:
    """Split ``rb`` into two points with ``t0 = +T`` and ``t0 = -T``.

    The members satisfy ``t1 = z1 t0`` and lie inside the extremal ellipsoid;
    they are extremal exactly when ``T`` is the largest feasible value.
    """
    T = float(T)
    if T < 0 or T > 1 or float(_family_slack(rb, T)) < -tol:
        raise ConstraintError(f"T = {T} is infeasible for this assemblage")
    k = rb.k
    if T == 0.0:
        w, zp, zm = 0.5, rb.z1, rb.z1
    else:
        w = (T + rb.t0) / (2 * T)
        # (z T +- t1) / (T +- t0), written so that tiny T keeps z exact
        zp = rb.z1 + (rb.t1 - rb.z1 * rb.t0) / (T + rb.t0) if w > 0 else rb.z1
        zm = rb.z1 + (rb.z1 * rb.t0 - rb.t1) / (T - rb.t0) if w < 1 else rb.z1
    zp, zm = float(np.clip(zp, -1, 1)), float(np.clip(zm, -1, 1))
    root = math.sqrt(max(0.0, 1.0 - T * T))
    rp, rm = math.sqrt(1 - zp * zp) * root, math.sqrt(1 - zm * zm) * root
    R = w * rp + (1 - w) * rm
    sp, sm = (rp / R, rm / R) if k > 0 and R > 0 else (0.0, 0.0)
    plus = RestrictedAssemblage(T, zp * T, rb.x1 * sp, rb.y1 * sp, zp)
    minus = RestrictedAssemblage(-T, -zm * T, rb.x1 * sm, rb.y1 * sm, zm)
    on_surface = abs(k - R) <= math.sqrt(tol) if k > 0 else abs(R) <= math.sqrt(tol)
    return ExtremalFamily((plus, minus), (w, 1.0 - w), on_surface)


def noncontinuity_assemblage(eps: float) -> Assemblage:
    """Extremal for ``eps > 0``; at ``eps = 0`` input 1 relabels input 0."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    s = math.sqrt(1.0 - eps * eps)
    phi_p = np.array([eps, s], dtype=complex)
    phi_m = np.array([-s, eps], dtype=complex)
    el = np.empty((2, 2, 2, 2), dtype=complex)
    el[0, 0] = np.diag([0.5, 0.0])
    el[1, 0] = np.diag([0.0, 0.5])
    el[0, 1] = np.outer(phi_p, phi_p.conj()) / 2
    el[1, 1] = np.outer(phi_m, phi_m.conj()) / 2
    a = Assemblage(el)
    require_valid(a)
    return a


def noncontinuity_restricted(eps: float) -> RestrictedAssemblage:
    s = math.sqrt(1.0 - eps * eps)
    return RestrictedAssemblage(0.0, 0.0, 2 * eps * s, 0.0, 2 * eps * eps - 1.0)
