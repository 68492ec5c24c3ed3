import math

import numpy as np
import pytest

from nicorr.circuit import HADAMARD_PATH, CircuitParams, NoiseModel, output_state
from nicorr.correlations import (
    SpinPVM,
    classical_correlation,
    concurrence,
    conditional_entropy,
    conditional_state,
    correlation_report,
    discord_A_given_B,
    eof,
    eof_from_concurrence,
    min_conditional_entropy_grid,
    mutual_information,
)
from nicorr.qmath import (
    I2,
    binary_entropy,
    kron,
    partial_trace,
    random_density,
    random_unitary,
    vn_entropy,
)

PI = math.pi
UP = np.diag([1.0, 0.0]).astype(complex)
DOWN = np.diag([0.0, 1.0]).astype(complex)
BELL = np.outer([1, 0, 0, 1], [1, 0, 0, 1]).astype(complex) / 2
CLASSICAL = 0.5 * (kron(UP, UP) + kron(DOWN, DOWN))


def state(alpha, sigma=0.0, eps=1.0, phi=0.0):
    noise = NoiseModel.uniform() if sigma == "uniform" else NoiseModel.gaussian(sigma)
    return output_state(CircuitParams(alpha, phi, eps, noise))


def brute_discord(rho, n=100):
    """Discord from a dense grid over the full sphere using the public conditional entropy."""
    best = min(
        conditional_entropy(rho, SpinPVM(t, v))
        for t in np.linspace(0, PI, n)
        for v in np.linspace(0, 2 * PI, n, endpoint=False)
    )
    return best + vn_entropy(partial_trace(rho, "B")) - vn_entropy(rho)


def test_pvm_projectors():
    for t, v in [(0, 0), (PI / 2, 0), (1.1, 2.3), (PI, 0.4)]:
        P0, P1 = SpinPVM(t, v).projectors
        assert np.abs(P0 + P1 - I2).max() < 1e-12
        assert np.abs(P0 @ P0 - P0).max() < 1e-12
        assert np.abs(P1 @ P1 - P1).max() < 1e-12


def test_mutual_information_examples():
    rng = np.random.default_rng(0)
    assert abs(mutual_information(kron(random_density(2, rng), random_density(2, rng)))) < 1e-9
    assert abs(mutual_information(BELL) - 2.0) < 1e-12
    assert abs(mutual_information(CLASSICAL) - 1.0) < 1e-12


def test_conditional_state_examples():
    rho = kron(I2 / 2, UP)
    p, cond = conditional_state(rho, DOWN)
    assert p == 0 and cond is None

    p, cond = conditional_state(BELL, UP)
    assert abs(p - 0.5) < 1e-15
    assert np.abs(cond - UP).max() < 1e-15


def test_conditional_state_uniform_noise_half_turn():
    # Before the last blade the state is (1/2)(|0↑><0↑| + |1↓><1↓|); contract by hand.
    rho = state(PI, "uniform")
    p, cond = conditional_state(rho, DOWN)
    t = rho.reshape(2, 2, 2, 2)
    want = t[:, 1, :, 1] / 0.5
    assert abs(p - 0.5) < 1e-12
    assert np.abs(cond - want).max() < 1e-12
    one = np.diag([0.0, 1.0])
    H = HADAMARD_PATH[::2, ::2]
    assert np.abs(cond - H @ one @ H).max() < 1e-12


def test_conditional_entropy_examples():
    rng = np.random.default_rng(1)
    rho_a = random_density(2, rng)
    prod = kron(rho_a, random_density(2, rng))
    for t, v in [(0, 0), (0.7, 1.9), (PI / 2, 0)]:
        assert abs(conditional_entropy(prod, SpinPVM(t, v)) - vn_entropy(rho_a)) < 1e-12
    assert abs(conditional_entropy(BELL, SpinPVM(0, 0))) < 1e-12
    assert abs(conditional_entropy(BELL, SpinPVM(PI / 2, 0))) < 1e-12


def test_discord_anchors():
    rng = np.random.default_rng(2)
    d, _ = discord_A_given_B(kron(random_density(2, rng), random_density(2, rng)))
    assert abs(d) < 1e-9
    d, _ = discord_A_given_B(BELL)
    assert abs(d - 1.0) < 1e-6
    assert abs(brute_discord(BELL) - 1.0) < 1e-6
    d, _ = discord_A_given_B(state(PI, "uniform"))
    assert abs(d) < 1e-6
    d, _ = discord_A_given_B(CLASSICAL)
    assert abs(d) < 1e-9


def test_discord_not_above_brute_force_grid():
    rng = np.random.default_rng(3)
    states = [random_density(4, rng, rank=r) for r in (2, 4)]
    states += [state(1.0, 0.5, 0.8, 0.3), state(PI / 2, "uniform"), state(2.2, 1.0)]
    for rho in states:
        d, _ = discord_A_given_B(rho)
        assert d <= brute_discord(rho) + 1e-9
        assert -1e-9 <= d <= mutual_information(rho) + 1e-9


def test_grid_minimum_tie_break_is_lexicographic():
    # Product state: every PVM ties, so the first grid point wins.
    val, t, v = min_conditional_entropy_grid(kron(I2 / 2, I2 / 2))
    assert (t, v) == (0.0, 0.0)
    assert abs(val - 1.0) < 1e-12


def test_concurrence_examples():
    assert abs(concurrence(kron(UP, UP))) < 1e-12
    assert abs(concurrence(BELL) - 1) < 1e-12
    rho = state(PI / 2)
    rho_a = partial_trace(rho, "A")
    oracle = 2 * math.sqrt(max(np.linalg.det(rho_a).real, 0.0))
    assert abs(oracle - 0.70711) < 5e-6
    assert abs(concurrence(rho) - oracle) < 1e-9


def test_eof_examples():
    assert eof_from_concurrence(0.0) == 0
    assert abs(eof_from_concurrence(1.0) - 1) < 1e-15
    h = binary_entropy(0.5 * (1 + math.sqrt(1 - 0.5)))
    assert abs(h - 0.60088) < 5e-6
    assert abs(eof_from_concurrence(math.sqrt(0.5)) - h) < 1e-12
    assert abs(eof(state(PI)) - 1) < 1e-9


def test_eof_monotone_in_concurrence():
    cs = np.linspace(0, 1, 201)
    e = [eof_from_concurrence(c) for c in cs]
    assert np.all(np.diff(e) >= -1e-15)


def test_pure_state_discord_equals_eof():
    for a in np.linspace(0, 2 * PI, 17):
        rho = state(a)
        d, _ = discord_A_given_B(rho)
        s_a = vn_entropy(partial_trace(rho, "A"))
        assert abs(d - eof(rho)) < 1e-4
        assert abs(eof(rho) - s_a) < 1e-6


def test_local_unitary_invariance():
    rng = np.random.default_rng(4)
    states = [random_density(4, rng, rank=r) for r in (1, 2, 4)] + [state(1.3, 0.7), state(2.0, "uniform")]
    for rho in states:
        d0, _ = discord_A_given_B(rho)
        e0 = eof(rho)
        for _ in range(3):
            U = kron(random_unitary(2, rng), random_unitary(2, rng))
            r = U @ rho @ U.conj().T
            d, _ = discord_A_given_B(r)
            assert abs(eof(r) - e0) < 1e-6
            assert abs(d - d0) < 1e-4


def test_report_consistency():
    rng = np.random.default_rng(5)
    for rho in [random_density(4, rng), state(0.9, 0.4, 0.86), BELL]:
        rep = correlation_report(rho)
        assert abs(rep.discord - (rep.mutual_info - rep.classical_corr_J)) < 1e-9
        assert rep.classical_corr_J >= -1e-9
        assert abs(rep.classical_corr_J - classical_correlation(rho)) < 1e-12
        assert 0 <= rep.concurrence <= 1 and 0 <= rep.eof <= 1
        P0, _ = rep.optimal_pvm.projectors
        assert abs(np.trace(P0) - 1) < 1e-12


def test_family_eof_decays_with_noise():
    sigmas = np.linspace(0, 2 * PI, 21)
    for a in np.linspace(0, 2 * PI, 9):
        e = np.array([eof(state(a, s)) for s in sigmas])
        assert np.all(np.diff(e) <= 1e-9)
        assert eof(state(a, "uniform")) < 1e-6


def test_uniform_noise_discord_persists_off_multiples_of_pi():
    d, _ = discord_A_given_B(state(PI / 2, "uniform"))
    assert d > 0.01
    for a in (0, PI, 2 * PI):
        d, _ = discord_A_given_B(state(a, "uniform"))
        assert d < 1e-4


def test_conditional_state_rejects_bad_shape():
    with pytest.raises(ValueError):
        conditional_state(np.eye(3) / 3, UP)
