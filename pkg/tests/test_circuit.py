import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from nicorr.circuit import (
    BITFLIP_PATH,
    HADAMARD_PATH,
    CircuitParams,
    NoiseModel,
    controlled_rx,
    dephase_path,
    gate,
    input_state,
    output_state,
    phase_flag,
    rx,
    sample_output,
    shot_unitary,
)
from nicorr.qmath import I2, PAULI_X, PAULI_Z, dagger, kron, partial_trace, random_density

PI = math.pi


def basis(i):
    v = np.zeros(4, dtype=complex)
    v[i] = 1
    return v


def test_input_state_examples():
    assert np.abs(input_state(1.0) - np.diag([1, 0, 0, 0])).max() == 0
    assert np.abs(input_state(0.0) - np.diag([0.5, 0.5, 0, 0])).max() == 0
    assert np.abs(np.diag(input_state(0.86)).real - [0.93, 0.07, 0, 0]).max() < 1e-15
    with pytest.raises(ValueError):
        input_state(1.01)


def test_params_validation():
    with pytest.raises(ValueError):
        CircuitParams(epsilon=-1.5)
    with pytest.raises(ValueError):
        CircuitParams(alpha=math.inf)
    with pytest.raises(ValueError):
        NoiseModel("gaussian", -1.0)
    with pytest.raises(ValueError):
        NoiseModel("lorentz")


def test_coherence_factor():
    assert NoiseModel.none().coherence == 1
    assert NoiseModel.uniform().coherence == 0
    assert abs(NoiseModel.gaussian(1.0).coherence - 0.60653) < 5e-6


def test_rx_matches_matrix_exponential():
    for a in np.linspace(-7, 7, 29):
        assert np.abs(rx(a) - expm(0.5j * a * PAULI_X)).max() < 1e-13


def test_gates_are_unitary():
    for a in np.linspace(-2 * PI, 4 * PI, 25):
        for name in ("hadamard_path", "bitflip_path", "controlled_rx", "phase_flag"):
            G = gate(name, a)
            assert np.abs(dagger(G) @ G - np.eye(4)).max() < 1e-12
    with pytest.raises(ValueError):
        gate("toffoli")


def test_gate_definitions():
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.abs(HADAMARD_PATH - kron(H, I2)).max() < 1e-15
    assert np.abs(BITFLIP_PATH - kron(PAULI_X, I2)).max() == 0
    phi = 0.7
    rz = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    assert np.abs(phase_flag(phi) - kron(rz, I2)).max() < 1e-15


def test_controlled_rx_examples():
    assert np.abs(controlled_rx(0.0) - np.eye(4)).max() == 0
    assert np.abs(controlled_rx(PI) @ basis(0) - 1j * basis(1)).max() < 1e-15
    assert np.abs(controlled_rx(PI) @ basis(2) - basis(2)).max() == 0


def test_dephase_cases():
    rng = np.random.default_rng(0)
    rho = random_density(4, rng)
    phi = 1.3
    U = phase_flag(phi)
    assert np.abs(dephase_path(rho, phi, NoiseModel.none()) - U @ rho @ dagger(U)).max() < 1e-15

    out = dephase_path(rho, phi, NoiseModel.uniform())
    assert np.abs(out[:2, 2:]).max() == 0 and np.abs(out[2:, :2]).max() == 0
    assert np.abs(out[:2, :2] - rho[:2, :2]).max() == 0

    out = dephase_path(rho, 0.0, NoiseModel.gaussian(1.0))
    assert np.abs(out[:2, 2:] - 0.60653066 * rho[:2, 2:]).max() < 1e-8


def test_dephase_matches_gauss_hermite_average():
    # E[f(r)] for r ~ N(0, s^2) by probabilists' Gauss-Hermite quadrature.
    x, w = np.polynomial.hermite_e.hermegauss(60)
    w = w / math.sqrt(2 * PI)
    rng = np.random.default_rng(1)
    for sigma in (0.3, 1.0, 2.0):
        rho = random_density(4, rng)
        phi = rng.uniform(-PI, PI)
        U = phase_flag(phi + sigma * x)
        avg = np.einsum("n,nij->ij", w, U @ rho @ dagger(U))
        got = dephase_path(rho, phi, NoiseModel.gaussian(sigma))
        assert np.abs(got - avg).max() < 1e-12


def test_dephase_preserves_trace_and_positivity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        rho = random_density(4, rng, rank=int(rng.integers(1, 5)))
        for k in (0.0, 0.3, 1.0):
            out = dephase_path(rho, rng.uniform(-PI, PI), k)
            assert abs(np.trace(out) - 1) < 1e-12
            assert np.linalg.eigvalsh(out).min() > -1e-10


def test_output_state_examples():
    rho = output_state(CircuitParams(0.0, 0.0, 1.0, NoiseModel.gaussian(0.0)))
    assert np.abs(rho - np.diag([1, 0, 0, 0])).max() < 1e-15

    rho = output_state(CircuitParams(PI, 0.0, 1.0))
    w = np.linalg.eigvalsh(rho)
    assert abs(w[-1] - 1) < 1e-12
    assert np.abs(partial_trace(rho, "A") - I2 / 2).max() < 1e-12


def test_output_state_uniform_noise_structure():
    # k = 0 leaves (1/2)|0↑><0↑| + (1/2)|1 s_a><1 s_a| ahead of the last blade.
    for a in np.linspace(0, 2 * PI, 13):
        s = rx(a) @ np.array([1, 0])
        pre = 0.5 * kron(np.diag([1, 0]), np.diag([1, 0])) + 0.5 * kron(np.diag([0, 1]), np.outer(s, s.conj()))
        want = HADAMARD_PATH @ pre @ HADAMARD_PATH
        got = output_state(CircuitParams(a, 0.4, 1.0, NoiseModel.uniform()))
        assert np.abs(got - want).max() < 1e-14
        assert np.sum(np.linalg.eigvalsh(got) > 1e-10) <= 2


def _stress_grid():
    alphas = np.linspace(-PI, 3 * PI, 9)
    phis = np.linspace(-PI, PI, 7)
    noises = [NoiseModel.gaussian(s) for s in (0, 0.5, 1, 2, 2 * PI)] + [NoiseModel.uniform()]
    return itertools.product(alphas, phis, noises, (-1.0, -0.3, 0.0, 0.5, 0.86, 1.0))


def test_output_state_is_density_on_stress_grid():
    for a, p, n, e in _stress_grid():
        rho = output_state(CircuitParams(a, p, e, n))
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.abs(rho - dagger(rho)).max() < 1e-12
        w = np.linalg.eigvalsh(rho)
        assert w.min() > -1e-10
        if e == 1.0:
            assert np.sum(w > 1e-10) <= 2


def test_detector_probability_symmetric_in_phase():
    P0 = kron(np.diag([1, 0]), I2)
    for a, p, n, e in _stress_grid():
        d_plus = np.trace(P0 @ output_state(CircuitParams(a, p, e, n))).real
        d_minus = np.trace(P0 @ output_state(CircuitParams(a, -p, e, n))).real
        assert abs(d_plus - d_minus) < 1e-12


def test_noise_placement_relabels_phase():
    # Flag + noise before the bit flip instead of after: same state with phi -> -phi.
    H, X = HADAMARD_PATH, BITFLIP_PATH
    for a, p, e in itertools.product((0.3, 1.7, PI), (0.0, 0.9, -2.2), (1.0, 0.5)):
        for noise in (NoiseModel.gaussian(0.8), NoiseModel.uniform()):
            mid = controlled_rx(a) @ H @ input_state(e) @ H @ dagger(controlled_rx(a))
            early = H @ X @ dephase_path(mid, p, noise) @ X @ H
            late = output_state(CircuitParams(a, -p, e, noise))
            assert np.abs(early - late).max() < 1e-14


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-10, 10), p=st.floats(-10, 10), e=st.floats(-1, 1), s=st.floats(0, 7),
)
def test_output_state_density_property(a, p, e, s):
    rho = output_state(CircuitParams(a, p, e, NoiseModel.gaussian(s)))
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-10


def test_sample_output_zero_sigma_exact():
    params = CircuitParams(1.1, 0.4, 0.7, NoiseModel.gaussian(0.0))
    for seed in (0, 7):
        assert np.abs(sample_output(params, seed, 100) - output_state(params)).max() < 1e-13


def test_sample_output_within_three_standard_errors():
    params = CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.gaussian(1.0))
    mean, se = sample_output(params, 2024, 100_000, return_stderr=True)
    exact = output_state(params)
    d = mean - exact
    assert np.max(np.abs(d.real) - 3 * se.real) < 1e-12
    assert np.max(np.abs(d.imag) - 3 * se.imag) < 1e-12


def test_sample_output_matches_per_shot_unitaries():
    params = CircuitParams(0.9, -0.3, 0.6, NoiseModel.gaussian(0.7))
    r = np.random.default_rng(11).normal(0.0, 0.7, 500)
    U = shot_unitary(params.alpha, params.phi + r)
    want = (U @ input_state(params.epsilon) @ dagger(U)).mean(axis=0)
    assert np.abs(sample_output(params, 11, 500) - want).max() < 1e-14


def test_sample_output_uniform_kills_path_coherence():
    n = 1_000_000
    params = CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.uniform())
    mid = HADAMARD_PATH @ sample_output(params, 3, n) @ HADAMARD_PATH
    off = np.abs(mid[:2, 2:]).max()
    assert off < 5 / math.sqrt(n)
    assert off > 1e-5


def test_sample_output_deterministic():
    params = CircuitParams(0.5, 0.2, 1.0, NoiseModel.gaussian(1.5))
    a = sample_output(params, 42, 70_000)
    b = sample_output(params, 42, 70_000)
    c = sample_output(params, 43, 70_000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_output_convergence_slope():
    params = CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.gaussian(1.0))
    exact = output_state(params)
    ns = np.array([1_000, 10_000, 100_000])
    rms = []
    for n in ns:
        devs = [np.abs(sample_output(params, seed, int(n)) - exact).max() for seed in range(16)]
        rms.append(math.sqrt(np.mean(np.square(devs))))
    slope = np.polyfit(np.log10(ns), np.log10(rms), 1)[0]
    assert abs(slope + 0.5) < 0.1


def test_sample_output_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_output(CircuitParams(), 0, 10)
    with pytest.raises(ValueError):
        sample_output(CircuitParams(noise=NoiseModel.uniform()), 0, 0)


def test_z_rotation_helper_consistency():
    # phase_flag acts as Rz on the path: commutes with Z_path.
    Zp = kron(PAULI_Z, I2)
    F = phase_flag(0.77)
    assert np.abs(F @ Zp - Zp @ F).max() < 1e-15
