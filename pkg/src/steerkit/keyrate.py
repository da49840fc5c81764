"""Secret-key lower bound from the entropic uncertainty relation.

For a pair of inputs ``(r, r~)`` Bob guesses Alice's outputs with a
discrimination measurement on each input. The bound is::

    -log2 c - F(P_r) - F(P_r~),    F(P) = h2(P) + P log2(|N| - 1)

with ``c`` the incompatibility of the two measurements and ``P`` the guessing
error probabilities (Fano's inequality bounds the conditional entropies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assemblage import Assemblage, marginal
from .errors import ConstraintError, ShapeError
from .linalg import binary_entropy, eigenspace_projectors, pinv_sqrt, psd_sqrt, trace_norm

PSD_TOL = 1e-10
CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiscriminationMeasurement:
    r: int
    elements: np.ndarray  # (K, m, m)
    kind: str  # "eigenspace" or "pretty-good"

    def completeness_error(self, support: np.ndarray | None = None) -> float:
        target = np.eye(self.elements.shape[1]) if support is None else support
        return float(np.max(np.abs(self.elements.sum(axis=0) - target)))


@dataclass(frozen=True)
class KeyRateBound:
    pair: tuple[int, int]
    c: float
    error_probabilities: tuple[float, float]
    raw: float
    clamped: float


def incompatibility(m1: DiscriminationMeasurement, m2: DiscriminationMeasurement) -> float:
    """``max ||sqrt(M) sqrt(M')||_inf^2`` over all element pairs."""
    if m1.elements.shape[1:] != m2.elements.shape[1:]:
        raise ShapeError("measurements act on different dimensions")
    roots = []
    for m in (m1, m2):
        for e in m.elements:
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T))[0] < -PSD_TOL:
                raise ConstraintError("measurement element is not positive semidefinite")
        roots.append([psd_sqrt(e) for e in m.elements])
    return max(float(np.linalg.norm(a @ b, 2)) ** 2 for a in roots[0] for b in roots[1])


def build_measurement(a: Assemblage, r: int) -> DiscriminationMeasurement:
    """Eigenspace projectors of ``sigma_0|r - sigma_1|r`` for two outputs,
    the pretty-good measurement otherwise."""
    if not 0 <= r < a.n_inputs:
        raise ValueError(f"input {r} out of range")
    if a.n_outputs == 2:
        plus, minus = eigenspace_projectors(a[0, r] - a[1, r])
        return DiscriminationMeasurement(r, np.array([plus, minus]), "eigenspace")
    root = pinv_sqrt(marginal(a))
    els = np.array([root @ a[n, r] @ root for n in range(a.n_outputs)])
    return DiscriminationMeasurement(r, 0.5 * (els + np.conj(np.swapaxes(els, 1, 2))), "pretty-good")


def _operational_error(a: Assemblage, r: int, m: DiscriminationMeasurement) -> float:
    hit = sum(np.real(np.trace(m.elements[n] @ a[n, r])) for n in range(a.n_outputs))
    return float(1.0 - hit)


def error_probability(a: Assemblage, r: int, m: DiscriminationMeasurement) -> float:
    """Probability that Bob's guess differs from Alice's output on input ``r``."""
    if m.r != r:
        raise ValueError(f"measurement was built for input {m.r}, not {r}")
    if a.n_outputs == 2:
        closed = 0.5 - 0.5 * trace_norm(a[0, r] - a[1, r])
        op = _operational_error(a, r, m)
        if abs(closed - op) > CONSISTENCY_TOL:
            raise ConstraintError(
                f"error probability mismatch on input {r}: closed form {closed:.12g}, "
                f"operational {op:.12g}"
            )
        return float(np.clip(closed, 0.0, 1.0))
    root = pinv_sqrt(marginal(a))
    hit = sum(np.real(np.trace(np.linalg.matrix_power(a[n, r] @ root, 2))) for n in range(a.n_outputs))
    return float(np.clip(1.0 - hit, 0.0, 1.0))


def fano_term(p: float, n_outputs: int) -> float:
    extra = p * math.log2(n_outputs - 1) if n_outputs > 2 else 0.0
    return binary_entropy(p) + extra


def key_rate_lower_bound(a: Assemblage) -> KeyRateBound:
    """Best bound over ordered input pairs ``r != r~``, clamped at 0."""
    if a.n_inputs < 2:
        raise ConstraintError("the key-rate bound needs at least two inputs")
    meas = [build_measurement(a, r) for r in range(a.n_inputs)]
    perr = [error_probability(a, r, meas[r]) for r in range(a.n_inputs)]
    best = None
    for r in range(a.n_inputs):
        for s in range(a.n_inputs):
            if r == s:
                continue
            c = incompatibility(meas[r], meas[s])
            raw = -math.log2(c) - fano_term(perr[r], a.n_outputs) - fano_term(perr[s], a.n_outputs)
            if best is None or raw > best.raw:
                best = KeyRateBound((r, s), c, (perr[r], perr[s]), raw, max(0.0, raw))
    return best
