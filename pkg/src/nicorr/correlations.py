"""Quantum correlations between path (A) and spin (B).

Discord ``D(A|B)`` is minimized over rank-one orthogonal projective
measurements on the spin.  This is exact for rank-two states (the
interferometer output at full polarization) and an upper bound on the
POVM discord otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .qmath import (
    ENTROPY_CUTOFF,
    I2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_matrix,
    binary_entropy,
    eig_hermitian,
    entropy_from_eigenvalues,
    kron,
    partial_trace,
    sqrt_psd,
    vn_entropy,
)

P_MIN = 1e-12
GRID_THETA = 64
GRID_VARPHI = 128
REFINE_XATOL = 1e-6
# Eigenvalues of the spin-flipped product below this are rounding noise.
CONCURRENCE_CUTOFF = 1e-14

_YY = kron(PAULI_Y, PAULI_Y)
_PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def bloch_vector(theta, varphi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    varphi = np.asarray(varphi, dtype=float)
    return np.stack(
        [np.sin(theta) * np.cos(varphi), np.sin(theta) * np.sin(varphi), np.cos(theta)], axis=-1
    )


def spin_state(theta: float, varphi: float) -> np.ndarray:
    """``cos(theta/2)|↑> + e^{i varphi} sin(theta/2)|↓>``."""
    return np.array([math.cos(theta / 2), np.exp(1j * varphi) * math.sin(theta / 2)])


def spin_projector(theta: float, varphi: float) -> np.ndarray:
    s = spin_state(theta, varphi)
    return np.outer(s, s.conj())


@dataclass(frozen=True)
class SpinPVM:
    """Orthogonal spin measurement ``{|S><S|, 1 - |S><S|}`` with ``S = S(theta, varphi)``."""

    theta: float
    varphi: float

    @property
    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        P0 = spin_projector(self.theta, self.varphi)
        return P0, I2 - P0

    @classmethod
    def from_angles(cls, theta: float, varphi: float) -> SpinPVM:
        """Canonical angles: theta in [0, pi], varphi in [0, 2pi)."""
        n = bloch_vector(theta, varphi)
        theta = math.acos(max(-1.0, min(1.0, n[2])))
        varphi = math.atan2(n[1], n[0]) % (2 * math.pi) if abs(math.sin(theta)) > 1e-15 else 0.0
        return cls(theta, varphi)


@dataclass(frozen=True)
class CorrelationReport:
    mutual_info: float
    classical_corr_J: float
    discord: float
    concurrence: float
    eof: float
    optimal_pvm: SpinPVM


def mutual_information(rho) -> float:
    rho = as_matrix(rho, dims=(4,))
    return (
        vn_entropy(partial_trace(rho, "A"))
        + vn_entropy(partial_trace(rho, "B"))
        - vn_entropy(rho)
    )


def conditional_state(rho, E_b) -> tuple[float, np.ndarray | None]:
    """Outcome probability and post-measurement path state for spin effect ``E_b``.

    Returns ``(p_b, None)`` when the outcome is impossible (``p_b <= 1e-12``).
    """
    rho = as_matrix(rho, dims=(4,))
    unnorm = partial_trace(kron(I2, as_matrix(E_b, dims=(2,))) @ rho, "A")
    p = float(np.trace(unnorm).real)
    if p <= P_MIN:
        return p, None
    cond = unnorm / p
    return p, 0.5 * (cond + cond.conj().T)


def conditional_entropy(rho, pvm: SpinPVM) -> float:
    total = 0.0
    for E in pvm.projectors:
        p, cond = conditional_state(rho, E)
        if cond is not None:
            total += p * vn_entropy(cond)
    return total


def _spin_moments(rho: np.ndarray) -> np.ndarray:
    """``[rho_A, tr_B((1⊗X)rho), tr_B((1⊗Y)rho), tr_B((1⊗Z)rho)]``, shape (4, 2, 2)."""
    ops = (I2,) + _PAULIS
    return np.stack([partial_trace(kron(I2, s) @ rho, "A") for s in ops])


def _conditional_entropy_batch(moments: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Conditional path entropy for PVMs with Bloch directions ``n`` (shape (..., 3)).

    Uses ``tr_B((1⊗P)rho) = (rho_A + n·T)/2`` for ``P = (1 + n·sigma)/2``.
    """
    a0, d0, b0 = moments[0, 0, 0].real, moments[0, 1, 1].real, moments[0, 0, 1]
    na = n @ moments[1:, 0, 0].real
    nd = n @ moments[1:, 1, 1].real
    nb = n @ moments[1:, 0, 1]
    total = np.zeros(n.shape[:-1])
    for sign in (1.0, -1.0):
        a = 0.5 * (a0 + sign * na)
        d = 0.5 * (d0 + sign * nd)
        b = 0.5 * (b0 + sign * nb)
        p = a + d
        ok = p > P_MIN
        p_safe = np.where(ok, p, 1.0)
        rad = np.sqrt(0.25 * (a - d) ** 2 + (b.real**2 + b.imag**2))
        w = np.stack([(0.5 * p + rad) / p_safe, (0.5 * p - rad) / p_safe], axis=-1)
        total += np.where(ok, p * entropy_from_eigenvalues(w), 0.0)
    return total


def _conditional_entropy_point(coeffs, theta: float, varphi: float) -> float:
    """Scalar version of :func:`_conditional_entropy_batch` for the local refinement."""
    st = math.sin(theta)
    n = (st * math.cos(varphi), st * math.sin(varphi), math.cos(theta))
    (a0, d0, b0), *rest = coeffs
    na = sum(ni * m[0] for ni, m in zip(n, rest))
    nd = sum(ni * m[1] for ni, m in zip(n, rest))
    nb = sum(ni * m[2] for ni, m in zip(n, rest))
    total = 0.0
    for sign in (1.0, -1.0):
        a = 0.5 * (a0 + sign * na)
        d = 0.5 * (d0 + sign * nd)
        b = 0.5 * (b0 + sign * nb)
        p = a + d
        if p <= P_MIN:
            continue
        rad = math.sqrt(0.25 * (a - d) ** 2 + abs(b) ** 2)
        for lam in ((0.5 * p + rad) / p, (0.5 * p - rad) / p):
            if lam > ENTROPY_CUTOFF:
                total -= p * lam * math.log2(lam)
    return total


def _hemisphere_grid(n_theta: int, n_varphi: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.linspace(0.0, math.pi / 2, n_theta)
    varphi = np.linspace(0.0, 2 * math.pi, n_varphi, endpoint=False)
    return np.meshgrid(theta, varphi, indexing="ij")


def min_conditional_entropy_grid(rho, n_theta: int = GRID_THETA, n_varphi: int = GRID_VARPHI):
    """Brute-force minimum of ``S(A|E)`` over a hemisphere grid of spin PVMs.

    Returns ``(value, theta, varphi)``; ties go to the lexicographically
    smallest ``(theta, varphi)``.
    """
    rho = as_matrix(rho, dims=(4,))
    moments = _spin_moments(rho)
    TH, VP = _hemisphere_grid(n_theta, n_varphi)
    vals = _conditional_entropy_batch(moments, bloch_vector(TH, VP))
    i = int(np.argmin(vals))
    return float(vals.flat[i]), float(TH.flat[i]), float(VP.flat[i])


def min_conditional_entropy(rho) -> tuple[float, SpinPVM]:
    """Grid search followed by Nelder-Mead refinement of ``S(A|E)`` over spin PVMs."""
    rho = as_matrix(rho, dims=(4,))
    moments = _spin_moments(rho)
    coarse, th0, vp0 = min_conditional_entropy_grid(rho)

    coeffs = [(m[0, 0].real, m[1, 1].real, complex(m[0, 1])) for m in moments]

    def f(x):
        return _conditional_entropy_point(coeffs, x[0], x[1])

    dth = 0.5 * math.pi / (GRID_THETA - 1)
    dvp = 2 * math.pi / GRID_VARPHI
    simplex = np.array([[th0, vp0], [th0 + dth, vp0], [th0, vp0 + dvp]])
    res = minimize(
        f,
        simplex[0],
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": REFINE_XATOL, "fatol": 1e-15, "maxiter": 4000},
    )
    if res.fun <= coarse:
        return float(res.fun), SpinPVM.from_angles(*res.x)
    return coarse, SpinPVM.from_angles(th0, vp0)


def discord_A_given_B(rho) -> tuple[float, SpinPVM]:
    """Quantum discord ``D(A|B)`` in bits and the minimizing spin PVM."""
    rho = as_matrix(rho, dims=(4,))
    s_cond, pvm = min_conditional_entropy(rho)
    d = s_cond + vn_entropy(partial_trace(rho, "B")) - vn_entropy(rho)
    if -1e-9 < d < 0:
        d = 0.0
    return d, pvm


def classical_correlation(rho) -> float:
    """``J(A|B) = S(rho_A) - min_E S(A|E)`` over spin PVMs."""
    s_cond, _ = min_conditional_entropy(rho)
    return vn_entropy(partial_trace(as_matrix(rho, dims=(4,)), "A")) - s_cond


def concurrence(rho) -> float:
    """Wootters concurrence from the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``."""
    rho = as_matrix(rho, dims=(4,))
    rho_tilde = _YY @ rho.conj() @ _YY
    s = sqrt_psd(rho, cutoff=CONCURRENCE_CUTOFF)
    M = s @ rho_tilde @ s
    M = 0.5 * (M + M.conj().T)
    lam, _ = eig_hermitian(sqrt_psd(M, cutoff=CONCURRENCE_CUTOFF))
    lam = np.maximum(lam, 0.0)
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def eof_from_concurrence(c: float) -> float:
    c = min(max(float(c), 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def eof(rho) -> float:
    """Entanglement of formation in bits."""
    return eof_from_concurrence(concurrence(rho))


def correlation_report(rho) -> CorrelationReport:
    rho = as_matrix(rho, dims=(4,))
    s_cond, pvm = min_conditional_entropy(rho)
    s_a = vn_entropy(partial_trace(rho, "A"))
    s_b = vn_entropy(partial_trace(rho, "B"))
    s_ab = vn_entropy(rho)
    d = s_cond + s_b - s_ab
    if -1e-9 < d < 0:
        d = 0.0
    c = concurrence(rho)
    return CorrelationReport(
        mutual_info=s_a + s_b - s_ab,
        classical_corr_J=s_a - s_cond,
        discord=d,
        concurrence=c,
        eof=eof_from_concurrence(c),
        optimal_pvm=pvm,
    )
