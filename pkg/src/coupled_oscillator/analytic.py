"""Closed-form results for the coupled oscillator.

Eigenenergies, complex eigenfunctions, eigenstate and coherent-state moments,
the uncertainty-product bound, coherent-state trajectories and the classical
phase-space flow. Also a fixed-step RK4 integrator for Hamilton's equations,
used as an independent route against the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedQuantities, OscillatorParams, derive
from .special import hermite_functions

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CoherentParams:
    """alpha = magnitude * exp(i * phase); phase is stored in [0, 2 pi)."""

    magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.magnitude >= 0:
            raise ValueError(f"coherent magnitude must be >= 0, got {self.magnitude!r}")
        phase = math.fmod(float(self.phase), TWO_PI)
        if phase < 0:
            phase += TWO_PI
        if phase >= TWO_PI:  # fmod rounding for tiny negative inputs
            phase = 0.0
        object.__setattr__(self, "phase", phase)

    @property
    def alpha(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    @classmethod
    def from_complex(cls, alpha: complex) -> "CoherentParams":
        return cls(abs(alpha), math.atan2(alpha.imag, alpha.real))


@dataclass(frozen=True)
class PhasePoint:
    """One (t, <x>, <p>) sample; fields may also hold equal-length arrays."""

    t: float
    x: float
    p: float


@dataclass(frozen=True)
class MomentSet:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float

    @property
    def product(self) -> float:
        """Delta x * Delta p."""
        return math.sqrt(self.var_x * self.var_p)


def energy(d: DerivedQuantities, n: int) -> float:
    return d.hbar * d.big_omega * (n + 0.5)


def wave_function(d: DerivedQuantities, n: int, x):
    """Complex eigenfunction psi_n(x).

    psi_n(x) = (m Omega / hbar)^{1/4} h_n(xi) exp(-i m mu x^2 / 2 hbar) with
    xi = sqrt(m Omega / hbar) x and h_n the normalized Hermite function. The
    chirp factor leaves |psi_n| equal to the standard oscillator at frequency
    Omega but changes the momentum statistics.
    """
    return wave_functions(d, n, x)[n][()]


def wave_functions(d: DerivedQuantities, n_max: int, x) -> np.ndarray:
    """psi_0..psi_{n_max} stacked along the first axis."""
    x = np.asarray(x, dtype=float)
    scale = math.sqrt(d.mass * d.big_omega / d.hbar)
    envelope = hermite_functions(n_max, scale * x) * math.sqrt(scale)
    chirp = np.exp(-0.5j * d.mass * d.mu * x**2 / d.hbar)
    return envelope * chirp


def eigen_moments(d: DerivedQuantities, n: int) -> MomentSet:
    var_x = d.hbar * (2 * n + 1) / (2.0 * d.mass * d.big_omega)
    var_p = d.hbar * d.mass * d.omega**2 * (2 * n + 1) / (2.0 * d.big_omega)
    return MomentSet(0.0, 0.0, var_x, var_p)


def uncertainty_product(d: DerivedQuantities, n: int) -> float:
    return d.hbar * d.omega * (n + 0.5) / d.big_omega


def minimum_bound(d: DerivedQuantities) -> float:
    """Smallest Delta x Delta p over eigenstates and coherent states.

    Equal to hbar omega / (2 Omega) = (hbar/2) / sqrt(1 - mu^2/omega^2), so it
    rises above hbar/2 as soon as mu != 0 and diverges as |mu| -> omega.
    """
    return d.hbar * d.omega / (2.0 * d.big_omega)


def _x_amplitude(d):
    # 2 sqrt(hbar / (2 m Omega)), multiplies |alpha|
    return 2.0 * math.sqrt(d.hbar / (2.0 * d.mass * d.big_omega))


def _p_amplitude(d):
    # 2 sqrt(m hbar / (2 Omega)), multiplies |alpha|
    return 2.0 * math.sqrt(d.mass * d.hbar / (2.0 * d.big_omega))


def coherent_moments(d: DerivedQuantities, a: CoherentParams) -> MomentSet:
    r, phi = a.magnitude, a.phase
    mean_x = _x_amplitude(d) * r * math.cos(phi)
    mean_p = _p_amplitude(d) * r * (d.big_omega * math.sin(phi) - d.mu * math.cos(phi))
    vac = eigen_moments(d, 0)
    return MomentSet(mean_x, mean_p, vac.var_x, vac.var_p)


def coherent_trajectory(d: DerivedQuantities, a: CoherentParams, t) -> PhasePoint:
    """<x>(t), <p>(t) for the time-evolved coherent state.

    alpha(t) = alpha exp(-i Omega t), so with s = Omega t - phi:
    x(t) = X |alpha| cos(s) and p(t) = -P |alpha| (mu cos(s) + Omega sin(s)).
    The mu-dependent terms that appear before simplifying x(t) cancel exactly.
    """
    t_arr = np.asarray(t, dtype=float)
    s = d.big_omega * t_arr - a.phase
    x = _x_amplitude(d) * a.magnitude * np.cos(s)
    p = -_p_amplitude(d) * a.magnitude * (d.mu * np.cos(s) + d.big_omega * np.sin(s))
    return PhasePoint(t_arr[()], x[()], p[()])


def simplified_position_with_extra_term(d: DerivedQuantities, a: CoherentParams, t):
    """x(t) = X |alpha| [cos(s) + (mu/Omega) sin(s)], s = Omega t - phi.

    This form carries a spurious (mu/Omega) sin(s) term relative to
    :func:`coherent_trajectory`; it is evaluated only to quantify that gap
    and disagrees with the static mean at t = 0 whenever mu*sin(phi) != 0.
    """
    s = d.big_omega * np.asarray(t, dtype=float) - a.phase
    out = _x_amplitude(d) * a.magnitude * (np.cos(s) + d.mu / d.big_omega * np.sin(s))
    return out[()]


def hamilton_rhs(p: OscillatorParams):
    """Right-hand side of xdot = p/m + mu x, pdot = -m omega^2 x - mu p."""
    m, w2, mu = p.mass, p.omega**2, p.mu

    def rhs(t, y):
        x, mom = y
        return np.array([mom / m + mu * x, -m * w2 * x - mu * mom])

    return rhs


def classical_trajectory(p: OscillatorParams, x0: float, p0: float, t) -> PhasePoint:
    """Exact solution of Hamilton's equations from (x0, p0) at t = 0."""
    d = derive(p)
    big = d.big_omega
    t_arr = np.asarray(t, dtype=float)
    c, s = np.cos(big * t_arr), np.sin(big * t_arr)
    v0 = p0 / p.mass + p.mu * x0
    x = x0 * c + (v0 / big) * s
    xdot = -x0 * big * s + v0 * c
    mom = p.mass * (xdot - p.mu * x)
    return PhasePoint(t_arr[()], x[()], mom[()])


def rk4_trajectory(p: OscillatorParams, x0: float, p0: float, times, max_step: float = 1e-4):
    """Integrate Hamilton's equations with classical RK4.

    ``times`` must be non-decreasing and start at or after 0. Each interval
    between consecutive sample times is split into equal steps no longer than
    ``max_step``. Returns arrays (x, p) sampled at ``times``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be non-decreasing and >= 0")
    f = hamilton_rhs(p)
    y = np.array([x0, p0], dtype=float)
    t = 0.0
    xs = np.empty(times.size)
    ps = np.empty(times.size)
    for i, target in enumerate(times):
        span = target - t
        if span > 0:
            steps = max(1, math.ceil(span / max_step))
            h = span / steps
            for _ in range(steps):
                k1 = f(t, y)
                k2 = f(t + h / 2, y + h / 2 * k1)
                k3 = f(t + h / 2, y + h / 2 * k2)
                k4 = f(t + h, y + h * k3)
                y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                t += h
            t = target
        xs[i], ps[i] = y
    return xs, ps
