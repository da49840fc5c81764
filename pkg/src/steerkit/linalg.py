"""Small dense linear-algebra and entropy helpers."""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

# eigenvalues below this are treated as zero by pseudo-inverse roots
PINV_CUTOFF = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix (negative eigenvalues clipped)."""
    w, v = np.linalg.eigh(hermitian_part(a))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def pinv_sqrt(a: np.ndarray, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Pseudo-inverse square root, restricted to eigenvalues above ``cutoff``."""
    w, v = np.linalg.eigh(hermitian_part(a))
    inv = np.zeros_like(w)
    keep = w > cutoff
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ dagger(v)


def eigenspace_projectors(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the strictly positive and the non-positive eigenspaces.

    Zero eigenvalues go to the second projector.
    """
    w, v = np.linalg.eigh(hermitian_part(a))
    pos = v[:, w > 0]
    neg = v[:, w <= 0]
    return pos @ dagger(pos), neg @ dagger(neg)


def trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(a)))))


def min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def binary_entropy(p) -> float:
    """Shannon entropy in bits of the distribution (p, 1 - p)."""
    p = float(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def shannon_entropy(probs) -> float:
    probs = np.asarray(probs, dtype=float)
    probs = probs[probs > 0]
    return float(-np.sum(probs * np.log2(probs))) + 0.0  # no negative zero


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -Tr(rho log2 rho), with tiny negative eigenvalues clipped."""
    w = np.clip(np.linalg.eigvalsh(hermitian_part(rho)), 0.0, None)
    return shannon_entropy(w)


def hermitian_basis(m: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of m x m Hermitian matrices.

    Returns an array of shape (m*m, m, m). Coordinates of a Hermitian X are
    ``Tr(E_k X)``, all real.
    """
    basis = []
    for j in range(m):
        e = np.zeros((m, m), dtype=complex)
        e[j, j] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(m):
        for k in range(j + 1, m):
            e = np.zeros((m, m), dtype=complex)
            e[j, k] = e[k, j] = s
            basis.append(e)
            e = np.zeros((m, m), dtype=complex)
            e[j, k] = -1j * s
            e[k, j] = 1j * s
            basis.append(e)
    return np.array(basis)


def to_coords(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real coordinates of (a stack of) Hermitian matrices in ``basis``."""
    # Tr(E_k X) = sum_ab E_k[a,b] X[b,a]
    return np.real(np.einsum("kab,...ba->...k", basis, x))


def from_coords(c: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.einsum("...k,kab->...ab", c, basis)


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def partial_trace_first(rho: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the first tensor factor of a (dim_a*dim_b) square matrix."""
    r = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    return np.einsum("ibic->bc", r)
