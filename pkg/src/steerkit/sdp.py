"""Interior-point solver for the LHS-fraction semidefinite program.

The problem solved is::

    maximise   sum_l Tr(s_l)
    subject to s_l >= 0,   S_b = sigma_b - sum_{l in b} s_l >= 0   for every block b = (n, r)

where ``l in b`` means strategy ``l`` outputs ``n`` on input ``r``.

Rank-deficient ``sigma_b`` leave the problem without interior points. One
facial-reduction step removes that: ``s_l`` must live on ``V_l``, the
intersection of the supports of the blocks it enters, and ``S_b`` on the
support ``U_b`` of its block. In those coordinates both the problem and its
dual are strictly feasible, and a primal-dual path-following method (HKM
search direction, Mehrotra predictor-corrector, infeasible start) converges
to high accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import SolverError
from .linalg import hermitian_basis, hermitian_part

SUPPORT_TOL = 1e-11


@dataclass
class SdpResult:
    lhs_states: np.ndarray  # (d, m, m); zero for strategies with no room
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int


def _support(a: np.ndarray, tol: float = SUPPORT_TOL) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return v[:, w > tol]


def _intersect(spaces: list[np.ndarray], m: int) -> np.ndarray:
    """Orthonormal basis of the intersection of column spaces."""
    stack = np.vstack([np.eye(m) - s @ s.conj().T for s in spaces])
    _, sv, vh = np.linalg.svd(stack)
    sv = np.concatenate([sv, np.zeros(m - sv.size)])
    return vh[sv < 1e-7].conj().T


def _coords(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("kab,ba->k", basis, x))


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha * dx >= 0, for positive definite x."""
    L = np.linalg.cholesky(x)
    Li = np.linalg.solve(L, np.eye(x.shape[0]))
    lo = np.linalg.eigvalsh(_herm(Li @ dx @ Li.conj().T))[0]
    return np.inf if lo >= 0 else -1.0 / lo


class _Reduced:
    """Block structure of the facially reduced problem.

    Primal blocks are ordered: one slack ``S_b`` per block with nonzero
    support, then one ``s_l`` per strategy with a nontrivial ``V_l``.
    """

    def __init__(self, sigma_blocks: np.ndarray, membership: np.ndarray):
        m = sigma_blocks.shape[1]
        U = [_support(s) for s in sigma_blocks]
        self.slack_ids = [b for b, u in enumerate(U) if u.shape[1] > 0]
        self.U = {b: U[b] for b in self.slack_ids}
        self.basis = {b: hermitian_basis(U[b].shape[1]) for b in self.slack_ids}
        self.rows, pos = {}, 0
        for b in self.slack_ids:
            q = self.basis[b].shape[0]
            self.rows[b] = slice(pos, pos + q)
            pos += q
        self.n_rows = pos
        self.b = np.concatenate(
            [_coords(U[b].conj().T @ sigma_blocks[b] @ U[b], self.basis[b]) for b in self.slack_ids]
        )

        self.strategies = []  # (l, V, [(b, A_lb, Phi_lb)])
        for l, blocks in enumerate(membership):
            blocks = [int(b) for b in blocks]
            if any(b not in self.U for b in blocks):
                continue
            V = _intersect([self.U[b] for b in blocks], m)
            if V.shape[1] == 0:
                continue
            parts = []
            for b in blocks:
                A = self.U[b].conj().T @ V
                phi = np.einsum("ab,iac,cd->ibd", A.conj(), self.basis[b], A)
                parts.append((b, A, phi))
            self.strategies.append((l, V, parts))

        self.n_slack = len(self.slack_ids)
        self.dims = [self.U[b].shape[1] for b in self.slack_ids] + [s[1].shape[1] for s in self.strategies]
        self.C = [np.zeros((k, k), dtype=complex) for k in self.dims[: self.n_slack]] + [
            -np.eye(s[1].shape[1], dtype=complex) for s in self.strategies
        ]

    def A(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.n_rows)
        for i, b in enumerate(self.slack_ids):
            out[self.rows[b]] += _coords(X[i], self.basis[b])
        for j, (_, _, parts) in enumerate(self.strategies):
            xl = X[self.n_slack + j]
            for b, A, _ in parts:
                out[self.rows[b]] += _coords(A @ xl @ A.conj().T, self.basis[b])
        return out

    def At(self, y: np.ndarray) -> list[np.ndarray]:
        Y = {b: np.einsum("k,kab->ab", y[self.rows[b]], self.basis[b]) for b in self.slack_ids}
        out = [Y[b] for b in self.slack_ids]
        for _, V, parts in self.strategies:
            acc = np.zeros((V.shape[1], V.shape[1]), dtype=complex)
            for b, A, _ in parts:
                acc = acc + A.conj().T @ Y[b] @ A
            out.append(acc)
        return out

    def schur(self, X: list[np.ndarray], Zinv: list[np.ndarray]) -> np.ndarray:
        # M_ij = Re Tr(A_i X A_j Z^-1), accumulated block by block
        M = np.zeros((self.n_rows, self.n_rows))
        for i, b in enumerate(self.slack_ids):
            E = self.basis[b]
            P = np.einsum("ab,jbc,cd->jad", X[i], E, Zinv[i])
            M[self.rows[b], self.rows[b]] += np.real(np.einsum("kab,jba->kj", E, P))
        for j, (_, _, parts) in enumerate(self.strategies):
            xl, zl = X[self.n_slack + j], Zinv[self.n_slack + j]
            Ps = [np.einsum("ab,jbc,cd->jad", xl, phi, zl) for _, _, phi in parts]
            for b1, _, phi1 in parts:
                for (b2, _, _), P in zip(parts, Ps):
                    M[self.rows[b1], self.rows[b2]] += np.real(np.einsum("kab,jba->kj", phi1, P))
        return 0.5 * (M + M.T)


def _inner(X, Z) -> float:
    return float(sum(np.real(np.vdot(z, x)) for x, z in zip(X, Z)))


def _norm(blocks) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(x) ** 2) for x in blocks)))


def _step(prob: _Reduced, X, y, Z, rp, Rd, mu):
    """One Mehrotra predictor-corrector step with the HKM direction."""
    Zinv = [_herm(np.linalg.inv(z)) for z in Z]
    M = prob.schur(X, Zinv)
    try:
        fac = cho_factor(M)

        def solve(r):
            return cho_solve(fac, r)
    except (LinAlgError, ValueError):
        def solve(r):
            return np.linalg.lstsq(M, r, rcond=None)[0]

    def direction(target, corr):
        # dX = sym(-X + target Z^-1 - X dZ Z^-1 - corr), dZ = Rd - At(dy), A(dX) = rp
        base = [-x + target * zi - x @ rd @ zi - c for x, zi, rd, c in zip(X, Zinv, Rd, corr)]
        dy = solve(rp - prob.A([_herm(v) for v in base]))
        dZ = [rd - a for rd, a in zip(Rd, prob.At(dy))]
        dX = [_herm(-x + target * zi - x @ dz @ zi - c) for x, zi, dz, c in zip(X, Zinv, dZ, corr)]
        return dX, dy, dZ

    zero = [0.0] * len(X)
    dXa, _, dZa = direction(0.0, zero)
    ap = min(1.0, min(_max_step(x, dx) for x, dx in zip(X, dXa)))
    ad = min(1.0, min(_max_step(z, dz) for z, dz in zip(Z, dZa)))
    gap_a = _inner([x + ap * dx for x, dx in zip(X, dXa)], [z + ad * dz for z, dz in zip(Z, dZa)])
    sigma = min(1.0, max(gap_a, 0.0) / _inner(X, Z)) ** 3
    corr = [dx @ dz @ zi for dx, dz, zi in zip(dXa, dZa, Zinv)]
    dX, dy, dZ = direction(sigma * mu, corr)

    ap = min(1.0, 0.98 * min(_max_step(x, dx) for x, dx in zip(X, dX)))
    ad = min(1.0, 0.98 * min(_max_step(z, dz) for z, dz in zip(Z, dZ)))
    X = [_herm(x + ap * dx) for x, dx in zip(X, dX)]
    y = y + ad * dy
    Z = [_herm(z + ad * dz) for z, dz in zip(Z, dZ)]
    return X, y, Z


def solve_lhs_fraction(
    sigma_blocks: np.ndarray,
    membership: np.ndarray,
    gap_tol: float = 1e-9,
    feas_tol: float = 1e-10,
    max_iter: int = 200,
) -> SdpResult:
    """Maximise the total weight of an LHS model below ``sigma_blocks``.

    ``sigma_blocks`` has shape (B, m, m); ``membership[l]`` lists the block
    indices strategy ``l`` contributes to (one per input). The run stops once
    the duality gap and the scaled residuals are below tolerance; if rounding
    breaks the iteration first, the current point is accepted when it is
    within a factor 100 of the tolerances.
    """
    sigma_blocks = hermitian_part(np.asarray(sigma_blocks, dtype=complex))
    membership = np.asarray(membership, dtype=int)
    d, m = membership.shape[0], sigma_blocks.shape[1]
    prob = _Reduced(sigma_blocks, membership)
    if not prob.strategies:
        return SdpResult(np.zeros((d, m, m), complex), 0.0, 0.0, 0.0, 0.0, 0.0, 0)

    n_tot = sum(prob.dims)
    X = [np.eye(k, dtype=complex) for k in prob.dims]
    Z = [np.eye(k, dtype=complex) for k in prob.dims]
    y = np.zeros(prob.n_rows)
    bnorm = 1.0 + float(np.linalg.norm(prob.b))
    cnorm = 1.0 + _norm(prob.C)

    it = 0
    while True:
        rp = prob.b - prob.A(X)
        Rd = [c - z - a for c, z, a in zip(prob.C, Z, prob.At(y))]
        gap = _inner(X, Z)
        pres = float(np.linalg.norm(rp)) / bnorm
        dres = _norm(Rd) / cnorm
        if gap <= gap_tol and pres <= feas_tol and dres <= feas_tol:
            break
        if it >= max_iter:
            raise SolverError(
                f"interior-point method stopped after {it} iterations "
                f"(gap {gap:.3g}, residuals {pres:.3g}/{dres:.3g})",
                diagnostics={"iterations": it, "gap": gap, "primal_residual": pres, "dual_residual": dres},
                last_iterate=X,
            )
        try:
            X, y, Z = _step(prob, X, y, Z, rp, Rd, gap / n_tot)
        except LinAlgError:
            if gap <= 100 * gap_tol and pres <= 100 * feas_tol and dres <= 100 * feas_tol:
                break
            raise SolverError(
                f"interior-point method broke down after {it} iterations (gap {gap:.3g})",
                diagnostics={"iterations": it, "gap": gap, "primal_residual": pres, "dual_residual": dres},
                last_iterate=X,
            ) from None
        it += 1

    lhs = np.zeros((d, m, m), dtype=complex)
    for j, (l, V, _) in enumerate(prob.strategies):
        lhs[l] = V @ X[prob.n_slack + j] @ V.conj().T
    lhs = hermitian_part(lhs)
    primal = float(np.real(np.trace(lhs, axis1=1, axis2=2)).sum())
    dual = -float(prob.b @ y)
    return SdpResult(lhs, primal, dual, dual - primal, pres, dres, it)
