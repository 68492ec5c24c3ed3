"""Small dense linear algebra for one- and two-qubit operators.

Basis ordering for two-qubit operators is ``|0↑>, |0↓>, |1↑>, |1↓>``:
the path qubit is the left (slow) tensor factor and the spin qubit the
right (fast) one.  Entropies are in bits.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-10
PSD_ATOL = 1e-10
ENTROPY_CUTOFF = 1e-12

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(M, dims=(2, 4)) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] not in dims:
        raise ValueError(f"expected a square matrix of dimension {dims}, got shape {M.shape}")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def is_hermitian(M: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.max(np.abs(M - dagger(M)), initial=0.0) < atol)


def kron(A, B) -> np.ndarray:
    """Tensor product ``A ⊗ B`` of two single-qubit operators (path ⊗ spin)."""
    A = as_matrix(A, dims=(2,))
    B = as_matrix(B, dims=(2,))
    return np.kron(A, B)


def check_density(rho, dims=(2, 4), atol: float = 1e-12) -> np.ndarray:
    """Validate a density operator and return it as a complex array.

    Raises ValueError if ``rho`` is not Hermitian, not unit trace or has an
    eigenvalue below ``-1e-10``.
    """
    rho = as_matrix(rho, dims)
    if np.max(np.abs(rho - rho.conj().T)) >= atol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(rho) - 1.0) >= atol:
        raise ValueError(f"density operator has trace {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_ATOL:
        raise ValueError("density operator is not positive semidefinite")
    return rho


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduced state of a two-qubit operator.

    ``keep`` is ``"A"`` (path, traces out spin) or ``"B"`` (spin, traces out path).
    Linear in ``rho`` and works on any 4x4 operator, not only density matrices.
    """
    rho = as_matrix(rho, dims=(4,))
    t = rho.reshape(2, 2, 2, 2)  # (path, spin, path', spin')
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijik->jk", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def eig_hermitian(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of a Hermitian matrix."""
    M = as_matrix(M)
    if not is_hermitian(M):
        raise ValueError("matrix is not Hermitian")
    M = 0.5 * (M + M.conj().T)
    w, v = np.linalg.eigh(M)
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvals_hermitian_2x2(M: np.ndarray) -> np.ndarray:
    """Closed-form eigenvalues of a stack of 2x2 Hermitian matrices, shape (..., 2), descending."""
    a = M[..., 0, 0].real
    d = M[..., 1, 1].real
    b = M[..., 0, 1]
    mean = 0.5 * (a + d)
    rad = np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)
    return np.stack([mean + rad, mean - rad], axis=-1)


def sqrt_psd(M, cutoff: float = 0.0) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-10, cutoff]`` are set to zero before taking roots;
    anything more negative is rejected.
    """
    w, v = eig_hermitian(M)
    if w.min() < -PSD_ATOL:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    w = np.where(w <= cutoff, 0.0, w)
    R = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (R + R.conj().T)


def entropy_from_eigenvalues(w) -> np.ndarray:
    """Shannon entropy in bits along the last axis; entries below 1e-12 count as zero."""
    w = np.asarray(w, dtype=float)
    safe = np.where(w > ENTROPY_CUTOFF, w, 1.0)
    return 0.0 - np.sum(np.where(w > ENTROPY_CUTOFF, w * np.log2(safe), 0.0), axis=-1)


def vn_entropy(rho) -> float:
    """Von Neumann entropy ``-tr(rho log2 rho)``."""
    w, _ = eig_hermitian(rho)
    return float(entropy_from_eigenvalues(w))


def binary_entropy(x) -> float:
    return float(entropy_from_eigenvalues([x, 1.0 - x]))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real
