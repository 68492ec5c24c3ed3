"""Detector probabilities and interference contrasts.

Every quantity has two routes: a closed-form expression and a numeric one
read off the circuit model (projection of the output state, then grid plus
golden-section extremization).  The circuit model is authoritative; the
closed forms are cross-checked against it in the test-suite.

Filtered intensities are joint probabilities ``P(detector D0, spin passes
filter)``; the four joint outcomes at D0/D1 for a filter and its
orthogonal complement sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import CircuitParams, NoiseModel, evolve
from .correlations import spin_projector
from .qmath import I2

TWO_PI = 2 * math.pi
# Intensities are 4*pi periodic in the spin rotation angle (the rotation acts
# on one path only, so Rx(2 pi) = -1 is a relative phase).
SWEEP_PERIOD = {"phi": TWO_PI, "alpha": 2 * TWO_PI}
GRID_POINTS = 2048
GOLDEN_XTOL = 1e-9
_INVPHI = (math.sqrt(5) - 1) / 2


class UndefinedContrastError(ArithmeticError):
    """Intensity vanishes over the whole sweep, so the contrast is 0/0."""


class OutOfValidityError(ValueError):
    pass


FILTER_ANGLES = {
    "z-up": (0.0, 0.0),
    "z-down": (math.pi, 0.0),
    "x-up": (math.pi / 2, 0.0),
    "x-down": (3 * math.pi / 2, 0.0),
}


@dataclass(frozen=True)
class SpinFilter:
    """Spin analyser transmitting ``|S(theta, varphi)>``; ``mode="none"`` transmits everything."""

    mode: str = "none"
    theta: float = 0.0
    varphi: float = 0.0

    @classmethod
    def named(cls, mode: str) -> SpinFilter:
        mode = mode.lower().replace("_", "-")
        if mode == "none":
            return cls()
        if mode not in FILTER_ANGLES:
            raise ValueError(f"unknown filter {mode!r}")
        return cls(mode, *FILTER_ANGLES[mode])

    @classmethod
    def general(cls, theta: float, varphi: float) -> SpinFilter:
        return cls("general", float(theta), float(varphi))

    @property
    def projector(self) -> np.ndarray:
        if self.mode == "none":
            return I2.copy()
        return spin_projector(self.theta, self.varphi)


@dataclass(frozen=True)
class ContrastResult:
    value: float
    argmax: float
    argmin: float
    method: str
    i_max: float = float("nan")
    i_min: float = float("nan")


# ---------------------------------------------------------------- closed forms

def d0_ideal(phi, alpha):
    return 0.5 * (1 + np.cos(np.asarray(alpha) / 2) * np.cos(phi))


def d1_ideal(phi, alpha):
    return 0.5 * (1 - np.cos(np.asarray(alpha) / 2) * np.cos(phi))


def d0_noisy(phi, alpha, noise: NoiseModel):
    k = noise.coherence
    return 0.5 * (1 + k * np.cos(np.asarray(alpha) / 2) * np.cos(phi))


def d0_z_up(phi, alpha, noise: NoiseModel, epsilon: float):
    return 0.5 * (1 + epsilon) * d0_noisy(phi, alpha, noise) + epsilon / 8 * (np.cos(alpha) - 1)


def d0_z_down(phi, alpha, noise: NoiseModel, epsilon: float):
    return 0.5 * (1 - epsilon) * d0_noisy(phi, alpha, noise) - epsilon / 8 * (np.cos(alpha) - 1)


def d0_x_up(phi, alpha, noise: NoiseModel):
    return 0.25 * (1 + noise.coherence * np.cos(np.asarray(alpha) / 2 + phi))


def d0_x_down(phi, alpha, noise: NoiseModel):
    return 0.25 * (1 + noise.coherence * np.cos(np.asarray(alpha) / 2 - phi))


def d0_general_closed(phi, alpha, noise: NoiseModel, epsilon: float, theta: float, varphi: float):
    """Joint D0 probability behind a spin filter ``|S(theta, varphi)>``.

    Obtained by projecting the circuit output state symbolically.  The last
    term couples the phase flag to the filter azimuth as
    ``sin(phi) cos(varphi) - epsilon cos(phi) sin(varphi)``.
    """
    k = noise.coherence
    c, s = np.cos(np.asarray(alpha) / 2), np.sin(np.asarray(alpha) / 2)
    return 0.25 * (
        1
        + epsilon * c**2 * math.cos(theta)
        + 0.5 * epsilon * np.sin(alpha) * math.sin(theta) * math.sin(varphi)
        + k * c * (1 + epsilon * math.cos(theta)) * np.cos(phi)
        - k * s * math.sin(theta) * (np.sin(phi) * math.cos(varphi) - epsilon * np.cos(phi) * math.sin(varphi))
    )


def closed_form_intensity(filt: SpinFilter, phi, alpha, noise: NoiseModel, epsilon: float):
    """Closed-form joint D0 probability behind ``filt``; broadcasts over ``phi`` and ``alpha``."""
    if filt.mode == "none":
        return d0_noisy(phi, alpha, noise)
    if filt.mode == "z-up":
        return d0_z_up(phi, alpha, noise, epsilon)
    if filt.mode == "z-down":
        return d0_z_down(phi, alpha, noise, epsilon)
    if filt.mode == "x-up":
        return d0_x_up(phi, alpha, noise)
    if filt.mode == "x-down":
        return d0_x_down(phi, alpha, noise)
    return d0_general_closed(phi, alpha, noise, epsilon, filt.theta, filt.varphi)


# --------------------------------------------------------------- circuit route

def _d0_projector(filt: SpinFilter) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = filt.projector
    return out


def _d1_projector(filt: SpinFilter) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[2:, 2:] = filt.projector
    return out


def _expectation(proj: np.ndarray, rho: np.ndarray):
    return np.einsum("ij,...ji->...", proj, rho).real


def d0_filtered(params: CircuitParams, filt: SpinFilter = SpinFilter()) -> float:
    """``tr((|0><0| ⊗ P) rho_out)`` from the circuit model."""
    rho = evolve(params.alpha, params.phi, params.epsilon, params.noise.coherence)
    return float(_expectation(_d0_projector(filt), rho))


def d1_filtered(params: CircuitParams, filt: SpinFilter = SpinFilter()) -> float:
    rho = evolve(params.alpha, params.phi, params.epsilon, params.noise.coherence)
    return float(_expectation(_d1_projector(filt), rho))


def d0_conditional(params: CircuitParams, filt: SpinFilter) -> float:
    """D0 probability given that the neutron passed the filter (renormalized form)."""
    rho = evolve(params.alpha, params.phi, params.epsilon, params.noise.coherence)
    pass_prob = _expectation(_d0_projector(filt) + _d1_projector(filt), rho)
    if pass_prob <= 1e-12:
        raise UndefinedContrastError("filter transmits nothing")
    return float(_expectation(_d0_projector(filt), rho) / pass_prob)


def circuit_intensity(sweep: str, params: CircuitParams, filt: SpinFilter = SpinFilter()) -> Callable:
    """Vectorized D0 intensity from the circuit model as a function of ``phi`` or ``alpha``."""
    proj = _d0_projector(filt)
    k = params.noise.coherence

    if sweep == "phi":
        def intensity(x):
            return _expectation(proj, evolve(params.alpha, x, params.epsilon, k))
    elif sweep == "alpha":
        def intensity(x):
            return _expectation(proj, evolve(x, params.phi, params.epsilon, k))
    else:
        raise ValueError(f"sweep must be 'phi' or 'alpha', got {sweep!r}")
    return intensity


# ------------------------------------------------------------------- contrasts

def _golden(f: Callable[[float], float], a: float, b: float, xtol: float) -> float:
    """Minimize a unimodal ``f`` on ``[a, b]``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def contrast_numeric(
    intensity: Callable,
    period: float = TWO_PI,
    n_grid: int = GRID_POINTS,
    xtol: float = GOLDEN_XTOL,
) -> ContrastResult:
    """``(max - min) / (max + min)`` of a periodic intensity over one period.

    ``intensity`` must accept a numpy array of sweep values.  The grid
    extremum is refined by golden-section search on the two neighbouring
    cells, wrapping around the period.
    """
    grid = np.arange(n_grid) * (period / n_grid)
    vals = np.asarray(intensity(grid), dtype=float)
    h = period / n_grid

    def scalar(x):
        return float(intensity(np.array([x]))[0])

    i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))
    x_max = _golden(lambda x: -scalar(x), grid[i_max] - h, grid[i_max] + h, xtol)
    x_min = _golden(scalar, grid[i_min] - h, grid[i_min] + h, xtol)
    hi = max(scalar(x_max), vals[i_max])
    lo = min(scalar(x_min), vals[i_min])
    if hi + lo <= 1e-12:
        raise UndefinedContrastError("intensity vanishes over the sweep")
    return ContrastResult(
        value=(hi - lo) / (hi + lo),
        argmax=x_max % period,
        argmin=x_min % period,
        method="numeric_extremization",
        i_max=hi,
        i_min=lo,
    )


def path_contrast(params: CircuitParams, filt: SpinFilter = SpinFilter()) -> ContrastResult:
    """Contrast of D0 as the phase flag sweeps a full period, at fixed ``alpha``."""
    return contrast_numeric(circuit_intensity("phi", params, filt), SWEEP_PERIOD["phi"])


def spin_contrast(params: CircuitParams, filt: SpinFilter = SpinFilter()) -> ContrastResult:
    """Contrast of D0 as the spin rotation sweeps a full period, at fixed ``phi``."""
    return contrast_numeric(circuit_intensity("alpha", params, filt), SWEEP_PERIOD["alpha"])


def _quadratic_contrast(lin: float, quad: float) -> float:
    """Contrast of ``1 + lin*c + quad*c**2`` over ``c`` in ``[-1, 1]``."""
    cands = [-1.0, 1.0]
    if quad != 0 and abs(lin / (2 * quad)) < 1:
        cands.append(-lin / (2 * quad))
    vals = [1 + lin * c + quad * c * c for c in cands]
    hi, lo = max(vals), min(vals)
    if hi + lo <= 1e-12:
        raise UndefinedContrastError("intensity vanishes over the sweep")
    return (hi - lo) / (hi + lo)


def _ratio(num: float, den: float) -> float:
    if abs(den) <= 1e-15:
        if abs(num) <= 1e-15:
            raise UndefinedContrastError("closed form is 0/0 at these parameters")
        return math.inf
    return abs(num / den)


CLOSED_FORMS = (
    "path", "spin",
    "path_x_up", "path_x_down", "spin_x_up", "spin_x_down",
    "path_z_up", "path_z_down",
    "spin_z_up", "spin_z_down",
    "spin_z_up_quoted", "spin_z_down_quoted",
    "spin_z_up_strong", "spin_z_down_strong",
)


def contrast_closed_form(which: str, params: CircuitParams) -> float:
    """Closed-form contrast ``which`` (one of :data:`CLOSED_FORMS`).

    ``path*`` forms depend on ``alpha``, ``spin*`` forms on ``phi``; all on
    the coherence factor and, for z filters, the polarization.

    ``spin_z_up`` / ``spin_z_down`` are the exact extremum of the z-filtered
    intensity, a quadratic in ``cos(alpha/2)``.  The ``*_quoted`` variants
    are the frequently quoted rational forms.  The up form coincides with the
    exact one only at full polarization; the down form only at full
    polarization or vanishing coherence, and is restricted to
    ``epsilon >= 1/3``.
    """
    k = params.noise.coherence
    eps = params.epsilon
    ca = abs(math.cos(params.alpha / 2))
    cs = k * abs(math.cos(params.phi))
    if which == "path":
        return k * ca
    if which == "spin":
        return cs
    if which in ("path_x_up", "path_x_down", "spin_x_up", "spin_x_down"):
        return k
    if which == "path_z_up":
        return _ratio((1 + eps) * k * ca, 1 + eps / 2 * (1 + math.cos(params.alpha)))
    if which == "path_z_down":
        return _ratio((1 - eps) * k * ca, 1 - eps / 2 * (1 + math.cos(params.alpha)))
    if which == "spin_z_up":
        return _quadratic_contrast((1 + eps) * cs, eps)
    if which == "spin_z_down":
        return _quadratic_contrast((1 - eps) * cs, -eps)
    if which == "spin_z_up_quoted":
        return (eps + (1 + eps) * cs + cs**2) / (2 + eps + (1 + eps) * cs - cs**2)
    if which == "spin_z_down_quoted":
        if not 1 / 3 <= eps <= 1:
            raise OutOfValidityError(
                "quoted spin-down form needs 1/3 <= epsilon <= 1; use spin_z_down or contrast_numeric"
            )
        q = (1 - eps) ** 2 / (4 * eps)
        return (eps - (1 - eps) * cs + q * cs**2) / (2 - eps + (1 - eps) * cs - q * cs**2)
    if which == "spin_z_up_strong":
        return eps / (2 + eps)
    if which == "spin_z_down_strong":
        return eps / (2 - eps)
    raise ValueError(f"unknown closed form {which!r}")


def closed_form_id(kind: str, filt: SpinFilter) -> str | None:
    """Closed-form name matching a (path|spin, filter) pair, or None for general filters."""
    if filt.mode == "none":
        return kind
    if filt.mode == "general":
        return None
    return f"{kind}_{filt.mode.replace('-', '_')}"
