"""Two-qubit circuit model of a three-blade neutron interferometer.

The path qubit (A) is split by the first blade (Hadamard), picks up a
controlled spin rotation in path ``|0>``, is swapped by the second blade
(bit flip), acquires a relative phase at the phase flag and random phase
noise, and is recombined by the third blade (Hadamard).  Neutrons lost at
the second blade are post-selected away, so the path space stays two
dimensional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qmath import I2, PAULI_X, kron

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)

HADAMARD_PATH = kron(_H, I2)
BITFLIP_PATH = kron(PAULI_X, I2)

_SHOT_CHUNK = 1 << 16


@dataclass(frozen=True)
class NoiseModel:
    """Random relative phase between the two paths.

    ``kind`` is ``"none"``, ``"gaussian"`` (zero mean, standard deviation
    ``sigma``) or ``"uniform"`` (uniform over a full period).
    """

    kind: str = "none"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "uniform"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        if self.kind != "gaussian" and self.sigma != 0:
            raise ValueError(f"sigma only applies to gaussian noise, got kind={self.kind!r}")

    @classmethod
    def gaussian(cls, sigma: float) -> NoiseModel:
        return cls("gaussian", float(sigma))

    @classmethod
    def uniform(cls) -> NoiseModel:
        return cls("uniform")

    @classmethod
    def none(cls) -> NoiseModel:
        return cls("none")

    @property
    def coherence(self) -> float:
        """Damping factor ``k`` applied to path coherences (characteristic function at 1)."""
        if self.kind == "none":
            return 1.0
        if self.kind == "uniform":
            return 0.0
        return math.exp(-0.5 * self.sigma**2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, n)
        if self.kind == "uniform":
            return rng.uniform(-math.pi, math.pi, n)
        raise ValueError("noise model 'none' has nothing to sample")


@dataclass(frozen=True)
class CircuitParams:
    alpha: float = 0.0
    phi: float = 0.0
    epsilon: float = 1.0
    noise: NoiseModel = NoiseModel()

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.phi)):
            raise ValueError("alpha and phi must be finite")
        if not -1.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [-1, 1], got {self.epsilon!r}")


def rx(alpha) -> np.ndarray:
    """Spin rotation ``exp(i alpha/2 X)``; broadcasts over an array of angles."""
    a = np.asarray(alpha, dtype=float)[..., None, None]
    return np.cos(a / 2) * I2 + 1j * np.sin(a / 2) * PAULI_X


def rz(phi) -> np.ndarray:
    """Single-qubit ``diag(e^{-i phi/2}, e^{i phi/2})``."""
    p = np.asarray(phi, dtype=float)[..., None]
    return np.exp(1j * p * np.array([-0.5, 0.5]))[..., None] * np.eye(2)


def hadamard_path() -> np.ndarray:
    return HADAMARD_PATH.copy()


def bitflip_path() -> np.ndarray:
    return BITFLIP_PATH.copy()


def controlled_rx(alpha) -> np.ndarray:
    """Rotate the spin by ``alpha`` about x when the path is ``|0>``."""
    R = rx(alpha)
    out = np.zeros(R.shape[:-2] + (4, 4), dtype=complex)
    out[..., :2, :2] = R
    out[..., 2:, 2:] = I2
    return out


def phase_flag(phi) -> np.ndarray:
    """Relative phase ``diag(e^{-i phi/2}, e^{i phi/2})`` on the path, identity on spin."""
    d = np.exp(1j * np.asarray(phi, dtype=float)[..., None] * np.array([-0.5, -0.5, 0.5, 0.5]))
    out = np.zeros(d.shape[:-1] + (4, 4), dtype=complex)
    idx = np.arange(4)
    out[..., idx, idx] = d
    return out


def gate(name: str, angle: float | None = None) -> np.ndarray:
    if name == "hadamard_path":
        return hadamard_path()
    if name == "bitflip_path":
        return bitflip_path()
    if name == "controlled_rx":
        return controlled_rx(angle)
    if name == "phase_flag":
        return phase_flag(angle)
    raise ValueError(f"unknown gate {name!r}")


def input_state(epsilon: float) -> np.ndarray:
    """Beam entering the first blade: path ``|0>``, spin polarized along z with polarization ``epsilon``."""
    if not -1.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [-1, 1], got {epsilon!r}")
    return kron(_P0, np.diag([(1 + epsilon) / 2, (1 - epsilon) / 2]))


def dephase_path(rho, phi, noise: NoiseModel | float) -> np.ndarray:
    """Phase flag followed by averaging over the random path phase.

    Equivalent to ``E[Rz(phi + r) rho Rz(phi + r)^dagger]``: the diagonal path
    blocks are untouched and the ``|0><1|`` block is scaled by ``k e^{-i phi}``.
    ``noise`` may be a NoiseModel or the coherence factor ``k`` itself.
    Broadcasts over leading axes of ``rho`` and ``phi``.
    """
    k = noise.coherence if isinstance(noise, NoiseModel) else float(noise)
    rho = np.array(rho, dtype=complex)
    phase = k * np.exp(-1j * np.asarray(phi, dtype=float))[..., None, None]
    out = np.broadcast_to(rho, np.broadcast_shapes(rho.shape, phase.shape[:-2] + (4, 4))).copy()
    out[..., :2, 2:] *= phase
    out[..., 2:, :2] *= np.conj(phase)
    return out


def _front(alpha) -> np.ndarray:
    """Blade 1, spin rotation, blade 2."""
    return BITFLIP_PATH @ controlled_rx(alpha) @ HADAMARD_PATH


def evolve(alpha, phi, epsilon: float, k: float) -> np.ndarray:
    """Output state for arrays of ``alpha`` and ``phi`` at coherence factor ``k``.

    Vectorized core of :func:`output_state`; returns shape ``broadcast(alpha, phi) + (4, 4)``.
    """
    alpha, phi = np.broadcast_arrays(np.asarray(alpha, dtype=float), np.asarray(phi, dtype=float))
    U = _front(alpha)
    mid = U @ input_state(epsilon) @ np.conj(np.swapaxes(U, -1, -2))
    mid = dephase_path(mid, phi, k)
    return HADAMARD_PATH @ mid @ HADAMARD_PATH


def output_state(params: CircuitParams) -> np.ndarray:
    """Two-qubit state at the detectors, averaged over the phase noise."""
    return evolve(params.alpha, params.phi, params.epsilon, params.noise.coherence)


def shot_unitary(alpha: float, phi) -> np.ndarray:
    """Noiseless interferometer unitary for one (or an array of) phase values."""
    return HADAMARD_PATH @ phase_flag(phi) @ _front(alpha)


def sample_output(params: CircuitParams, seed: int, n_samples: int, return_stderr: bool = False):
    """Monte Carlo estimate of :func:`output_state`.

    Draws one random phase per shot from ``params.noise`` with
    ``numpy.random.default_rng(seed)``, evolves the input state with the
    noiseless unitary at ``phi + r`` and averages.  Phases are drawn in shot
    order from a single stream, so the result depends only on
    ``(seed, n_samples)``.

    With ``return_stderr`` also returns the entrywise standard error of the
    mean as a complex array (real part: error of the real parts, imaginary
    part: error of the imaginary parts).
    """
    if params.noise.kind == "none":
        raise ValueError("sample_output needs a gaussian or uniform noise model")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    shifts = params.noise.sample(rng, n_samples)
    front = _front(params.alpha)
    mid = front @ input_state(params.epsilon) @ front.conj().T
    path_sign = np.array([-0.5, -0.5, 0.5, 0.5])
    total = np.zeros((4, 4), dtype=complex)
    sq_re = np.zeros((4, 4))
    sq_im = np.zeros((4, 4))
    for start in range(0, n_samples, _SHOT_CHUNK):
        r = shifts[start:start + _SHOT_CHUNK]
        # The phase flag is diagonal: conjugation is an entrywise phase.
        d = np.exp(1j * (params.phi + r)[:, None] * path_sign)
        shots = mid * (d[:, :, None] * d[:, None, :].conj())
        shots = np.matmul(np.matmul(HADAMARD_PATH, shots), HADAMARD_PATH)
        total += shots.sum(axis=0)
        sq_re += (shots.real**2).sum(axis=0)
        sq_im += (shots.imag**2).sum(axis=0)
    mean = total / n_samples
    if not return_stderr:
        return mean
    if n_samples == 1:
        return mean, np.zeros((4, 4), dtype=complex)
    var_re = np.maximum(sq_re - n_samples * mean.real**2, 0.0) / (n_samples - 1)
    var_im = np.maximum(sq_im - n_samples * mean.imag**2, 0.0) / (n_samples - 1)
    stderr = (np.sqrt(var_re) + 1j * np.sqrt(var_im)) / math.sqrt(n_samples)
    return mean, stderr
