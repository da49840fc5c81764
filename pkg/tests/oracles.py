"""Independent reference values and random generators for the tests.

Nothing here calls into steerkit: generators build assemblages from explicit
states and measurements with plain loops, and the closed forms are derived by
hand for the restricted qubit family.
"""

from __future__ import annotations

import math

import numpy as np

# frozen with mpmath at 30 digits
H2_OF_0P9 = 0.468995593589281221
WERNER_KEYRATE_ZERO = 0.779944271123280897
EV_RHO98_PHI60 = 0.895313689781185684
SW_RHO98_PHI60 = 0.869129935877607267


def h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def werner_keyrate(p: float) -> float:
    return 1.0 - 2.0 * h2((1.0 - p) / 2.0)


def restricted_sw_closed_form(k: float, z: float) -> float:
    """Steering weight of the ``t0 = t1 = 0`` point with transverse length ``k``."""
    if k <= 1.0 - abs(z):
        return k
    return (k * k / (1.0 - abs(z)) + 1.0 - abs(z)) / 2.0


def equal_value_closed_form(k: float, z: float) -> float:
    if abs(z) >= 1.0:
        return 0.0
    T = math.sqrt(max(0.0, (1.0 - k * k - z * z) / (1.0 - z * z)))
    return h2((1.0 + T) / 2.0)


def bloch_matrix(t: float, v) -> np.ndarray:
    x, y, z = v
    return 0.5 * np.array([[t + z, x - 1j * y], [x + 1j * y, t - z]])


def restricted_matrices(x1: float, y1: float, z1: float) -> np.ndarray:
    """(2, 2, 2, 2) elements of the ``t0 = t1 = 0`` restricted point."""
    el = np.zeros((2, 2, 2, 2), dtype=complex)
    el[0, 0] = np.diag([0.5, 0.0])
    el[1, 0] = np.diag([0.0, 0.5])
    for n, s in enumerate((1.0, -1.0)):
        el[n, 1] = 0.5 * bloch_matrix(1.0, (s * x1, s * y1, s * z1))
    return el


def random_ball(rng, r_max: float = 1.0) -> np.ndarray:
    while True:
        v = rng.uniform(-1, 1, 3)
        if np.linalg.norm(v) <= 1.0:
            return r_max * v


def random_density(rng, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(rng, n: int, d: int) -> np.ndarray:
    """``n`` positive elements summing to the identity on ``C^d``."""
    g = [random_density(rng, d) * rng.uniform(0.1, 1.0) for _ in range(n)]
    s = sum(g)
    w, v = np.linalg.eigh(s)
    root = v @ np.diag(w**-0.5) @ v.conj().T
    return np.array([root @ e @ root for e in g])


def induced_elements(rho_ab: np.ndarray, povms: np.ndarray, da: int, db: int) -> np.ndarray:
    """Loop-based ``Tr_A[(M (x) I) rho]`` for POVMs shaped (N, R, da, da)."""
    N, R = povms.shape[:2]
    out = np.zeros((N, R, db, db), dtype=complex)
    for n in range(N):
        for r in range(R):
            op = np.kron(povms[n, r], np.eye(db)) @ rho_ab
            for i in range(da):
                out[n, r] += op[i * db:(i + 1) * db, i * db:(i + 1) * db]
    return out


def random_elements(rng, n_outputs: int = 2, n_inputs: int = 2, db: int = 2, da: int | None = None) -> np.ndarray:
    """Elements of an assemblage created from a random state and random POVMs."""
    da = da or db
    rho = random_density(rng, da * db)
    arr = np.zeros((n_outputs, n_inputs, da, da), dtype=complex)
    for r in range(n_inputs):
        arr[:, r] = random_povm(rng, n_outputs, da)
    return induced_elements(rho, arr, da, db)


def random_stochastic(rng, rows: int, cols: int) -> np.ndarray:
    """Columns are probability vectors."""
    t = rng.exponential(size=(rows, cols))
    return t / t.sum(axis=0, keepdims=True)


def printed_werner_elements() -> np.ndarray:
    """Worked-example elements at p = 1/sqrt(2): ``(I +- sigma/sqrt2) / 4``."""
    s = 1 / math.sqrt(2)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    el = np.empty((2, 2, 2, 2), dtype=complex)
    for n, sign in enumerate((1, -1)):
        el[n, 0] = 0.25 * (np.eye(2) + sign * s * sz)
        el[n, 1] = 0.25 * (np.eye(2) + sign * s * sx)
    return el


def bell_xz_elements() -> np.ndarray:
    s = 1 / math.sqrt(2)
    vecs = {(0, 0): (1, 0), (1, 0): (0, 1), (0, 1): (s, s), (1, 1): (s, -s)}
    el = np.empty((2, 2, 2, 2), dtype=complex)
    for (n, r), v in vecs.items():
        v = np.array(v, dtype=complex)
        el[n, r] = np.outer(v, v.conj()) / 2
    return el
