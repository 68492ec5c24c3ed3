"""Cross-check suites behind ``nicorr verify``.

Each suite compares two independent routes (closed form against circuit
model, numeric extremization against closed form, Monte Carlo against the
analytic channel, refined optimizer against brute-force grid) and reports
the worst deviation.  The report contains no timings so that repeated runs
with the same seed are byte-identical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitParams, NoiseModel, evolve, output_state, sample_output
from .correlations import (
    concurrence,
    correlation_report,
    discord_A_given_B,
    eof,
    min_conditional_entropy,
    min_conditional_entropy_grid,
    mutual_information,
)
from .intensities import (
    FILTER_ANGLES,
    OutOfValidityError,
    SpinFilter,
    UndefinedContrastError,
    closed_form_intensity,
    closed_form_id,
    contrast_closed_form,
    d0_ideal,
    path_contrast,
    spin_contrast,
)
from .qmath import kron, random_density, random_unitary, vn_entropy

PI = math.pi


@dataclass
class Suite:
    name: str
    tol: float
    worst: float = 0.0
    failure: str | None = None
    checks: int = 0
    notes: list[str] = field(default_factory=list)

    def close(self, label: str, got, want, tol: float | None = None) -> None:
        tol = self.tol if tol is None else tol
        dev = float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
        self.checks += 1
        self.worst = max(self.worst, dev)
        if not dev <= tol and self.failure is None:
            self.failure = f"{label}: deviation {dev:.3e} > {tol:.1e}"

    def holds(self, label: str, cond: bool) -> None:
        self.checks += 1
        if not cond and self.failure is None:
            self.failure = label

    @property
    def ok(self) -> bool:
        return self.failure is None


def _noises(level: str):
    sigmas = [0.0, 0.5, 1.0, 2.0, 2 * PI]
    return [NoiseModel.gaussian(s) for s in sigmas] + [NoiseModel.uniform()]


def suite_intensities(level: str) -> Suite:
    s = Suite("intensity closed forms vs circuit", 1e-9)
    n = 8 if level == "fast" else 24
    angles = np.arange(n) * (2 * PI / n)
    A, P = np.meshgrid(np.concatenate([angles, angles + 2 * PI]), angles, indexing="ij")
    filters = [SpinFilter()] + [SpinFilter.named(m) for m in FILTER_ANGLES]
    filters += [SpinFilter.general(t, v) for t, v in [(0.7, 0.3), (2.1, 4.0), (1.3, 1.9)]]
    for noise, eps in itertools.product(_noises(level), [0.0, 0.5, 0.86, 1.0, -0.4]):
        rho = evolve(A, P, eps, noise.coherence)
        trace_d0 = np.einsum("...ii->...", rho[..., :2, :2]).real
        trace_d1 = np.einsum("...ii->...", rho[..., 2:, 2:]).real
        s.close(f"D0 unfiltered {noise}", trace_d0, 0.5 * (1 + noise.coherence * np.cos(A / 2) * np.cos(P)))
        s.close("D0 + D1 = 1", trace_d0 + trace_d1, 1.0)
        if noise.coherence == 1.0:
            s.close("D0 ideal", trace_d0, d0_ideal(P, A))
        for filt in filters:
            proj = filt.projector
            joint = np.einsum("ij,...ji->...", proj, rho[..., :2, :2]).real
            joint_d1 = np.einsum("ij,...ji->...", proj, rho[..., 2:, 2:]).real
            comp = np.eye(2) - proj
            rest = np.einsum("ij,...ji->...", comp, rho[..., :2, :2] + rho[..., 2:, 2:]).real
            s.close("four-way normalization", joint + joint_d1 + rest, 1.0)
            want = closed_form_intensity(filt, P, A, noise, eps)
            s.close(f"D0 filter={filt.mode} eps={eps} {noise}", joint, want)
    return s


def _contrast_grid(level: str):
    if level == "fast":
        return [0.3, 1.1, 2.5], [0.0, 0.4, 1.2], [0.0, 0.5, 1.0], [0.0, 0.5, 0.86, 1.0]
    return (
        [0.0, 0.3, 1.1, PI / 2, 2.5, PI, 4.0, 5.5],
        [0.0, 0.4, PI / 4, 1.2, 2.0, 3.0],
        [0.0, 0.5, 1.0, 2.0],
        [0.0, 0.25, 1 / 3, 0.5, 0.86, 1.0],
    )


def suite_contrasts(level: str) -> Suite:
    s = Suite("contrast closed forms vs numeric", 1e-6)
    alphas, phis, sigmas, epss = _contrast_grid(level)
    filters = [SpinFilter()] + [SpinFilter.named(m) for m in FILTER_ANGLES]
    for sigma, eps in itertools.product(sigmas, epss):
        noise = NoiseModel.gaussian(sigma)
        for kind, values, numeric in (("path", alphas, path_contrast), ("spin", phis, spin_contrast)):
            for x, filt in itertools.product(values, filters):
                params = (CircuitParams(x, 0.0, eps, noise) if kind == "path"
                          else CircuitParams(0.0, x, eps, noise))
                which = closed_form_id(kind, filt)
                try:
                    want = contrast_closed_form(which, params)
                except UndefinedContrastError:
                    try:
                        numeric(params, filt)
                    except UndefinedContrastError:
                        s.holds("undefined in both routes", True)
                    else:
                        s.holds(f"{which} undefined in closed form only", False)
                    continue
                got = numeric(params, filt).value
                s.close(f"{which} alpha/phi={x} sigma={sigma} eps={eps}", got, want)
    return s


def suite_ordering(level: str) -> Suite:
    s = Suite("path contrast ordering z-up >= none >= z-down", 1e-9)
    alphas, _, sigmas, _ = _contrast_grid(level)
    for alpha, sigma, eps in itertools.product(alphas, sigmas, [0.0, 0.25, 0.5, 0.86, 1.0]):
        params = CircuitParams(alpha, 0.0, eps, NoiseModel.gaussian(sigma))
        up = path_contrast(params, SpinFilter.named("z-up")).value
        plain = path_contrast(params).value
        try:
            down = path_contrast(params, SpinFilter.named("z-down")).value
        except UndefinedContrastError:
            down = 0.0
        s.holds(f"ordering alpha={alpha} sigma={sigma} eps={eps}", up >= plain - 1e-9 >= down - 2e-9)
        if eps == 0.0:
            s.close("equality at eps=0 (up)", up, plain)
            s.close("equality at eps=0 (down)", down, plain)
        if eps == 1.0 and abs(math.cos(alpha / 2)) < 1 - 1e-12:
            s.close("z-down path contrast vanishes at eps=1", down, 0.0)
    for phi, sigma in itertools.product([0.0, 0.4, 1.2], sigmas):
        params = CircuitParams(0.0, phi, 1.0, NoiseModel.gaussian(sigma))
        s.close("z-down spin contrast is 1 at eps=1", spin_contrast(params, SpinFilter.named("z-down")).value, 1.0)
    return s


def suite_strong_noise(level: str) -> Suite:
    s = Suite("strong-noise spin contrast limits (sigma=2pi)", 2e-3)
    for eps, phi in itertools.product([0.0, 0.25, 0.5, 0.86, 1.0], [0.0, 1.0]):
        for mode, which in (("z-up", "spin_z_up_strong"), ("z-down", "spin_z_down_strong")):
            params = CircuitParams(0.0, phi, eps, NoiseModel.gaussian(2 * PI))
            got = spin_contrast(params, SpinFilter.named(mode)).value
            s.close(f"{which} eps={eps} phi={phi}", got, contrast_closed_form(which, params))
    return s


def suite_monte_carlo(level: str, seed: int, samples: int) -> Suite:
    s = Suite("Monte Carlo vs analytic dephasing (3 std err)", 1e-12)
    cases = [
        CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.gaussian(1.0)),
        CircuitParams(1.1, 0.7, 0.86, NoiseModel.gaussian(0.5)),
        CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.uniform()),
    ]
    for i, params in enumerate(cases):
        mean, err = sample_output(params, seed + i, samples, return_stderr=True)
        exact = output_state(params)
        for part in ("real", "imag"):
            excess = np.abs(getattr(mean - exact, part)) - 3.0 * getattr(err, part)
            s.close(f"case {i} {part} parts beyond 3 std err", max(excess.max(), 0.0), 0.0, tol=1e-12)
    degenerate = CircuitParams(PI / 2, 0.3, 1.0, NoiseModel.gaussian(0.0))
    s.close("sigma=0 sample equals exact", sample_output(degenerate, seed, 100), output_state(degenerate), tol=1e-12)
    return s


def _test_states(level: str, seed: int):
    rng = np.random.default_rng(seed)
    states = []
    for a, noise in itertools.product([0.4, PI / 2, 2.2, PI], [NoiseModel.gaussian(0.0), NoiseModel.gaussian(1.0),
                                                                NoiseModel.uniform()]):
        states.append(output_state(CircuitParams(a, 0.3, 1.0, noise)))
    n_random = 4 if level == "fast" else 20
    for rank in (1, 2, 4):
        states += [random_density(4, rng, rank) for _ in range(n_random)]
    return states, rng


def suite_discord_optimizer(level: str, seed: int) -> Suite:
    s = Suite("discord refinement <= brute-force grid", 1e-9)
    states, _ = _test_states(level, seed)
    for i, rho in enumerate(states):
        refined, _ = min_conditional_entropy(rho)
        grid, _, _ = min_conditional_entropy_grid(rho, 100, 100)
        s.holds(f"state {i}: refined {refined:.12f} > grid {grid:.12f}", refined <= grid + 1e-9)
        d, _ = discord_A_given_B(rho)
        mi = mutual_information(rho)
        s.holds(f"state {i}: 0 <= discord <= I", -1e-9 <= d <= mi + 1e-9)
    return s


def suite_local_unitary(level: str, seed: int) -> Suite:
    s = Suite("local-unitary invariance (eof 1e-6, discord 1e-4)", 1e-6)
    states, rng = _test_states(level, seed + 1)
    for i, rho in enumerate(states):
        U = kron(random_unitary(2, rng), random_unitary(2, rng))
        rho2 = U @ rho @ U.conj().T
        s.close(f"state {i} eof", eof(rho2), eof(rho), tol=1e-6)
        s.close(f"state {i} discord", discord_A_given_B(rho2)[0], discord_A_given_B(rho)[0], tol=1e-4)
        s.close(f"state {i} entropy", vn_entropy(rho2), vn_entropy(rho), tol=1e-9)
    return s


def suite_anchors(level: str) -> Suite:
    s = Suite("correlation anchors", 1e-6)
    bell = np.zeros(4, dtype=complex)
    bell[[0, 3]] = 1 / math.sqrt(2)
    bell = np.outer(bell, bell.conj())
    product = np.diag([1, 0, 0, 0]).astype(complex)
    classical = np.diag([0.5, 0, 0, 0.5]).astype(complex)
    for name, rho, want in (("bell", bell, 1.0), ("product", product, 0.0), ("classical", classical, 0.0)):
        s.close(f"{name} concurrence", concurrence(rho), want)
        s.close(f"{name} eof", eof(rho), want)
        s.close(f"{name} discord", discord_A_given_B(rho)[0], want, tol=1e-4)
    for alpha in np.linspace(0, 2 * PI, 9):
        rep = correlation_report(output_state(CircuitParams(alpha, 0.0, 1.0, NoiseModel.gaussian(0.0))))
        s.close(f"pure-state discord = eof at alpha={alpha:.3f}", rep.discord, rep.eof, tol=1e-4)
        uni = correlation_report(output_state(CircuitParams(alpha, 0.0, 1.0, NoiseModel.uniform())))
        s.close(f"uniform-noise eof at alpha={alpha:.3f}", uni.eof, 0.0)
    rep = correlation_report(output_state(CircuitParams(PI, 0.0, 1.0, NoiseModel.gaussian(0.0))))
    s.close("eof(alpha=pi, sigma=0)", rep.eof, 1.0, tol=1e-9)
    uni = correlation_report(output_state(CircuitParams(PI / 2, 0.0, 1.0, NoiseModel.uniform())))
    s.holds("uniform-noise discord > 0.01 at alpha=pi/2", uni.discord > 0.01)
    for alpha in (0.0, PI, 2 * PI):
        d = correlation_report(output_state(CircuitParams(alpha, 0.0, 1.0, NoiseModel.uniform()))).discord
        s.holds(f"uniform-noise discord < 1e-4 at alpha={alpha:.3f}", d < 1e-4)
    return s


def quoted_form_deviation(level: str) -> str:
    """Largest gap between the quoted z-filtered spin forms and numeric extremization."""
    _, phis, sigmas, epss = _contrast_grid(level)
    worst = {"spin_z_up_quoted": 0.0, "spin_z_down_quoted": 0.0}
    for phi, sigma, eps in itertools.product(phis, sigmas, epss):
        params = CircuitParams(0.0, phi, eps, NoiseModel.gaussian(sigma))
        for which, mode in (("spin_z_up_quoted", "z-up"), ("spin_z_down_quoted", "z-down")):
            try:
                want = contrast_closed_form(which, params)
            except OutOfValidityError:
                continue
            got = spin_contrast(params, SpinFilter.named(mode)).value
            worst[which] = max(worst[which], abs(got - want))
    return ", ".join(f"{k} max dev {v:.3e}" for k, v in worst.items())


def run_suites(level: str = "fast", seed: int = 0, samples: int | None = None) -> tuple[bool, str]:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    if samples is None:
        samples = 20_000 if level == "fast" else 100_000
    suites = [
        suite_intensities(level),
        suite_contrasts(level),
        suite_ordering(level),
        suite_strong_noise(level),
        suite_monte_carlo(level, seed, samples),
        suite_discord_optimizer(level, seed),
        suite_local_unitary(level, seed),
        suite_anchors(level),
    ]
    lines = [f"nicorr verify level={level} seed={seed} samples={samples}", ""]
    width = max(len(x.name) for x in suites)
    for x in suites:
        status = "PASS" if x.ok else "FAIL"
        lines.append(f"{status}  {x.name:<{width}}  checks={x.checks:<5d} worst={x.worst:.3e}")
    lines.append(f"INFO  quoted z-filtered spin forms (not gating): {quoted_form_deviation(level)}")
    ok = all(x.ok for x in suites)
    lines.append("")
    if ok:
        lines.append("overall: PASS")
    else:
        first = next(x for x in suites if not x.ok)
        lines.append(f"overall: FAIL (first failure: {first.name}: {first.failure})")
    return ok, "\n".join(lines) + "\n"
