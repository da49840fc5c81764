"""Assemblages, their constraints, and structural operations.

An assemblage is stored as a dense complex array of shape
``(n_outputs, n_inputs, dim_b, dim_b)`` holding the sub-normalised states
``sigma[n, r]``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConstraintError, ShapeError
from .linalg import hermitian_part, kron_all, proj

TOL_PSD = 1e-9
TOL_NS = 1e-9


@dataclass(frozen=True, eq=False)
class Assemblage:
    elements: np.ndarray

    def __post_init__(self):
        arr = np.array(self.elements, dtype=complex)
        if arr.ndim != 4 or arr.shape[2] != arr.shape[3]:
            raise ShapeError(
                f"elements must have shape (n_outputs, n_inputs, d, d), got {arr.shape}"
            )
        if min(arr.shape) < 1:
            raise ShapeError("assemblage needs at least one output, input and dimension")
        arr.setflags(write=False)
        object.__setattr__(self, "elements", arr)

    @property
    def n_outputs(self) -> int:
        return self.elements.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.elements.shape[1]

    @property
    def dim_b(self) -> int:
        return self.elements.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n_outputs, self.n_inputs, self.dim_b

    def __getitem__(self, key) -> np.ndarray:
        n, r = key
        return self.elements[n, r]

    def __add__(self, other: "Assemblage") -> "Assemblage":
        _check_same_shape(self, other)
        return Assemblage(self.elements + other.elements)

    def __sub__(self, other: "Assemblage") -> "Assemblage":
        _check_same_shape(self, other)
        return Assemblage(self.elements - other.elements)

    def __mul__(self, scalar) -> "Assemblage":
        return Assemblage(self.elements * scalar)

    __rmul__ = __mul__

    @classmethod
    def from_dict(cls, mapping: dict, n_outputs: int, n_inputs: int) -> "Assemblage":
        """Build from ``{(n, r): matrix}``; missing entries are an error."""
        mats = []
        for n in range(n_outputs):
            row = []
            for r in range(n_inputs):
                if (n, r) not in mapping:
                    raise ShapeError(f"missing element sigma[{n}|{r}]")
                row.append(np.asarray(mapping[n, r], dtype=complex))
            mats.append(row)
        dims = {m.shape for row in mats for m in row}
        if len(dims) != 1:
            raise ShapeError(f"inconsistent element shapes {sorted(dims)}")
        return cls(np.array(mats))


def _check_same_shape(a: Assemblage, b: Assemblage) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class Violation:
    kind: str  # "positivity", "hermiticity", "no-signalling", "normalization"
    index: tuple
    magnitude: float

    def as_dict(self) -> dict:
        return {"kind": self.kind, "index": list(self.index), "magnitude": self.magnitude}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(a: Assemblage, tol_psd: float = TOL_PSD, tol_ns: float = TOL_NS) -> ValidationReport:
    """Check positivity, no-signalling and normalisation.

    Every violated constraint is reported with its (n, r) index (or (0, r)
    for no-signalling, comparing input r against input 0) and magnitude.
    """
    el = a.elements
    found = []
    for n in range(a.n_outputs):
        for r in range(a.n_inputs):
            s = el[n, r]
            herm = float(np.max(np.abs(s - s.conj().T)))
            if herm > tol_psd:
                found.append(Violation("hermiticity", (n, r), herm))
            lo = float(np.linalg.eigvalsh(hermitian_part(s))[0])
            if lo < -tol_psd:
                found.append(Violation("positivity", (n, r), -lo))
    sums = el.sum(axis=0)
    for r in range(1, a.n_inputs):
        dev = float(np.max(np.abs(sums[r] - sums[0])))
        if dev > tol_ns:
            found.append(Violation("no-signalling", (0, r), dev))
    tr = float(np.real(np.trace(sums[0])))
    if abs(tr - 1.0) > tol_ns:
        found.append(Violation("normalization", (0,), abs(tr - 1.0)))
    return ValidationReport(tuple(found))


def require_valid(a: Assemblage, tol_psd: float = TOL_PSD, tol_ns: float = TOL_NS) -> None:
    report = validate(a, tol_psd, tol_ns)
    if not report.ok:
        worst = max(report.violations, key=lambda v: v.magnitude)
        raise ConstraintError(
            f"invalid assemblage: {len(report.violations)} violation(s), worst "
            f"{worst.kind} at {worst.index} of magnitude {worst.magnitude:.3g}"
        )


def marginal(a: Assemblage) -> np.ndarray:
    """Bob's reduced state: the sum over outputs for input 0."""
    return a.elements[:, 0].sum(axis=0)


def assemblage_norm(a: Assemblage) -> float:
    """Sum of the Frobenius norms of all elements."""
    return float(np.sum(np.linalg.norm(a.elements, ord="fro", axis=(2, 3))))


def distance(a: Assemblage, b: Assemblage) -> float:
    _check_same_shape(a, b)
    return assemblage_norm(a - b)


def tensor_power(a: Assemblage, k: int, max_dim: int = 64, max_elements: int = 1 << 16) -> Assemblage:
    """k parallel copies of ``a`` as one assemblage.

    Outputs and inputs of the copy are tuples flattened in lexicographic order,
    so index ``n = n_1 * N**(k-1) + ... + n_k`` and likewise for inputs.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    dim = a.dim_b**k
    count = (a.n_outputs * a.n_inputs) ** k
    if dim > max_dim or count > max_elements:
        raise BudgetError(
            f"tensor power k={k} needs dim {dim} and {count} elements "
            f"(budget {max_dim}, {max_elements})"
        )
    N, R = a.n_outputs, a.n_inputs
    out = np.empty((N**k, R**k, dim, dim), dtype=complex)
    for ni, ns in enumerate(itertools.product(range(N), repeat=k)):
        for ri, rs in enumerate(itertools.product(range(R), repeat=k)):
            out[ni, ri] = kron_all(a.elements[n, r] for n, r in zip(ns, rs))
    return Assemblage(out)


@dataclass(frozen=True, eq=False)
class RewiringMap:
    """A classical wiring applied by Alice.

    ``kind == "input"``: ``table[r, r_new] = p(r | r_new)``; shape (R, R').
    ``kind == "output"``: ``table[n_new, r, n] = p(n_new | r, n)``; shape (N', R, N).
    """

    kind: str
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if self.kind == "input":
            if t.ndim != 2:
                raise ShapeError("input rewiring table must be 2-d (R, R')")
            sums = t.sum(axis=0)
        elif self.kind == "output":
            if t.ndim != 3:
                raise ShapeError("output rewiring table must be 3-d (N', R, N)")
            sums = t.sum(axis=0)
        else:
            raise ValueError(f"unknown rewiring kind {self.kind!r}")
        if np.any(t < 0):
            raise ConstraintError("rewiring probabilities must be non-negative")
        if np.max(np.abs(sums - 1.0)) > 1e-12:
            raise ConstraintError("rewiring is not normalised (each conditional must sum to 1)")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def identity_inputs(cls, n_inputs: int) -> "RewiringMap":
        return cls("input", np.eye(n_inputs))

    @classmethod
    def identity_outputs(cls, n_outputs: int, n_inputs: int) -> "RewiringMap":
        return cls("output", np.repeat(np.eye(n_outputs)[:, None, :], n_inputs, axis=1))


def rewire(a: Assemblage, w: RewiringMap) -> Assemblage:
    el = a.elements
    if w.kind == "input":
        if w.table.shape[0] != a.n_inputs:
            raise ShapeError(f"input map expects {w.table.shape[0]} inputs, assemblage has {a.n_inputs}")
        return Assemblage(np.einsum("rs,nrab->nsab", w.table, el))
    if w.table.shape[1:] != (a.n_inputs, a.n_outputs):
        raise ShapeError(
            f"output map shape {w.table.shape} incompatible with (N={a.n_outputs}, R={a.n_inputs})"
        )
    return Assemblage(np.einsum("mrn,nrab->mrab", w.table, el))


# -- named assemblages -------------------------------------------------------

def uniform_assemblage(n_outputs: int = 2, n_inputs: int = 2, dim_b: int = 2) -> Assemblage:
    el = np.zeros((n_outputs, n_inputs, dim_b, dim_b), dtype=complex)
    el[...] = np.eye(dim_b) / (n_outputs * dim_b)
    return Assemblage(el)


def bell_xz_assemblage() -> Assemblage:
    """The maximally entangled pair measured in the Z (r=0) and X (r=1) bases."""
    s = 1 / math.sqrt(2)
    vecs = {
        (0, 0): [1, 0], (1, 0): [0, 1],
        (0, 1): [s, s], (1, 1): [s, -s],
    }
    return Assemblage.from_dict({k: proj(v) / 2 for k, v in vecs.items()}, 2, 2)


# -- JSON interchange --------------------------------------------------------

def to_json_dict(a: Assemblage) -> dict:
    elements = {}
    for n in range(a.n_outputs):
        for r in range(a.n_inputs):
            m = a.elements[n, r]
            elements[f"{n}|{r}"] = [[[float(z.real), float(z.imag)] for z in row] for row in m]
    return {"n_outputs": a.n_outputs, "n_inputs": a.n_inputs, "dim_b": a.dim_b, "elements": elements}


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ShapeError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def from_json_dict(doc: dict) -> Assemblage:
    try:
        N, R, d = int(doc["n_outputs"]), int(doc["n_inputs"]), int(doc["dim_b"])
        raw = doc["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed assemblage document: {exc}") from exc
    mapping = {}
    for key, rows in raw.items():
        try:
            n, r = (int(x) for x in key.split("|"))
        except ValueError as exc:
            raise ShapeError(f"bad element key {key!r}, expected 'n|r'") from exc
        if not (0 <= n < N and 0 <= r < R):
            raise ShapeError(f"element key {key!r} out of range")
        m = matrix_from_json(rows)
        if m.shape != (d, d):
            raise ShapeError(f"element {key} has shape {m.shape}, expected {(d, d)}")
        mapping[n, r] = m
    return Assemblage.from_dict(mapping, N, R)


def dumps(a: Assemblage, **kw) -> str:
    return json.dumps(to_json_dict(a), **kw)


def loads(text: str) -> Assemblage:
    return from_json_dict(json.loads(text))
