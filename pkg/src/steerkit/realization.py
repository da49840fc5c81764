"""States and measurements that realise assemblages."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assemblage import Assemblage, marginal, require_valid
from .errors import ConstraintError, ShapeError
from .linalg import PINV_CUTOFF, SX, SZ, I2, hermitian_part, ket, kron_all, proj, von_neumann_entropy

REALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Realization:
    """Bipartite state on ``A (x) B`` and POVMs ``measurements[n, r]`` on A."""

    state: np.ndarray  # (dim_a * dim_b, dim_a * dim_b)
    measurements: np.ndarray  # (N, R, dim_a, dim_a)

    @property
    def dim_a(self) -> int:
        return self.measurements.shape[2]

    @property
    def dim_b(self) -> int:
        return self.state.shape[0] // self.dim_a

    def check(self, tol: float = REALIZATION_TOL) -> None:
        da = self.dim_a
        if self.state.shape[0] % da or self.state.shape[0] != self.state.shape[1]:
            raise ShapeError(f"state of shape {self.state.shape} does not factor with dim_a = {da}")
        if abs(np.trace(self.state) - 1.0) > tol:
            raise ConstraintError("state is not unit trace")
        if np.linalg.eigvalsh(hermitian_part(self.state))[0] < -tol:
            raise ConstraintError("state is not positive semidefinite")
        for r in range(self.measurements.shape[1]):
            if np.max(np.abs(self.measurements[:, r].sum(axis=0) - np.eye(da))) > tol:
                raise ConstraintError(f"POVM for input {r} does not sum to the identity")
            for n in range(self.measurements.shape[0]):
                if np.linalg.eigvalsh(hermitian_part(self.measurements[n, r]))[0] < -tol:
                    raise ConstraintError(f"POVM element ({n}, {r}) is not positive")


def induce_assemblage(re: Realization, tol: float = REALIZATION_TOL) -> Assemblage:
    """``sigma_n|r = Tr_A[(M_n|r (x) I) rho]``."""
    re.check(tol)
    da, db = re.dim_a, re.dim_b
    rho = re.state.reshape(da, db, da, db)
    # (M (x) I) rho traced over A: sum_{a,c} M[a,c] rho[c,b,a,d]
    el = np.einsum("nrac,cbad->nrbd", re.measurements, rho)
    return Assemblage(el)


def _ordered_eigh(rho: np.ndarray):
    """Eigenpairs by descending eigenvalue, each vector with its first
    significant component real and positive."""
    w, v = np.linalg.eigh(hermitian_part(rho))
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    for i in range(v.shape[1]):
        j = int(np.argmax(np.abs(v[:, i]) > 1e-9))
        v[:, i] *= np.exp(-1j * np.angle(v[j, i]))
    return np.clip(w, 0.0, None), v


def canonical_realization(a: Assemblage) -> Realization:
    """Purification of the marginal plus the matching measurements on A.

    With ``rho = sum_i l_i |v_i><v_i|`` the state is
    ``sum_i sqrt(l_i) |i>|v_i>`` and ``M_n|r = D (V^H sigma_n|r V)^T D`` with
    ``D = diag(l_i^(-1/2))`` on the support; the kernel of the marginal is
    added to ``M_0|r`` so each POVM is complete.
    """
    require_valid(a)
    w, V = _ordered_eigh(marginal(a))
    d = a.dim_b
    keep = w > PINV_CUTOFF
    psi = np.zeros(d * d, dtype=complex)
    for i in np.flatnonzero(keep):
        psi += math.sqrt(w[i]) * np.kron(np.eye(d)[i], V[:, i])
    dinv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    kernel = np.diag((~keep).astype(float))
    M = np.empty((a.n_outputs, a.n_inputs, d, d), dtype=complex)
    for r in range(a.n_inputs):
        for n in range(a.n_outputs):
            core = (V.conj().T @ a[n, r] @ V).T
            M[n, r] = hermitian_part(dinv[:, None] * core * dinv[None, :])
        M[0, r] += kernel
    return Realization(proj(psi), M)


def marginal_entropy_bound(a: Assemblage) -> float:
    """Von Neumann entropy (bits) of the marginal state."""
    return von_neumann_entropy(marginal(a))


# -- named realizations ------------------------------------------------------

_Z_BASIS = (ket(1, 0), ket(0, 1))
_X_BASIS = (ket(1, 1) / math.sqrt(2), ket(1, -1) / math.sqrt(2))


def werner_state(p: float) -> np.ndarray:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter p = {p} outside [0, 1]")
    phi = ket(1, 0, 0, 1) / math.sqrt(2)
    return p * proj(phi) + (1.0 - p) * np.eye(4) / 4


def werner_realization(p: float) -> Realization:
    """Werner state measured by Alice in the Z (r = 0) and X (r = 1) bases."""
    M = np.array([[proj(_Z_BASIS[n]), proj(_X_BASIS[n])] for n in range(2)])
    return Realization(werner_state(p), M)


def werner_assemblage(p: float) -> Assemblage:
    return induce_assemblage(werner_realization(p))


def separable_realization() -> Realization:
    """Separable state on a four-level A and a qubit B that gives the same
    assemblage as the Werner state at ``p = 1/sqrt(2)``.

    A holds two classical bits ``(i, j)``; input 0 reads ``i`` and input 1
    reads ``j``.
    """
    s = 1.0 / math.sqrt(2)
    rho = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        for j in range(2):
            sigma = 0.5 * (I2 + (-1) ** j * s * SX + (-1) ** i * s * SZ)
            rho += 0.25 * np.kron(proj(np.eye(4)[2 * i + j]), sigma)
    M = np.empty((2, 2, 4, 4), dtype=complex)
    for n in range(2):
        e = proj(np.eye(2)[n])
        M[n, 0] = kron_all([e, I2])
        M[n, 1] = kron_all([I2, e])
    return Realization(rho, M)
