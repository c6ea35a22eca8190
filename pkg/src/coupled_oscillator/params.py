"""Physical parameters of the coupled oscillator and the symbols derived from them.

The Hamiltonian is ``p^2/2m + m omega^2 x^2/2 + (mu/2)(xp + px)``. Everything
downstream works in the single unit system implied by ``mass``, ``omega`` and
``hbar`` (natural units by default).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CouplingTooStrong, NonPositive, ParameterError


@dataclass(frozen=True)
class OscillatorParams:
    mass: float = 1.0
    omega: float = 1.0
    mu: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mass", "omega", "mu", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite, got {getattr(self, name)!r}")
        for name in ("mass", "omega", "hbar"):
            if getattr(self, name) <= 0:
                raise NonPositive(name, getattr(self, name))
        if abs(self.mu) >= self.omega:
            raise CouplingTooStrong(self.mu, self.omega)


def validate(mass: float, omega: float, mu: float, hbar: float = 1.0) -> OscillatorParams:
    """Build validated parameters from raw numbers.

    Raises
    ------
    NonPositive
        if ``mass``, ``omega`` or ``hbar`` is not strictly positive.
    CouplingTooStrong
        if ``|mu| >= omega``.
    """
    return OscillatorParams(float(mass), float(omega), float(mu), float(hbar))


@dataclass(frozen=True)
class DerivedQuantities:
    """Derived symbols for one parameter set.

    ``big_omega`` is the effective frequency sqrt(omega^2 - mu^2), ``rho`` the
    complex Gaussian exponent of the eigenfunctions, and ``gamma``/``theta``
    the coefficients of the annihilation operator ``a = i(gamma x + theta p)``.
    """

    params: OscillatorParams
    big_omega: float
    rho: complex
    theta: float
    gamma: complex
    length_scale: float

    # convenience passthroughs, used all over the numerical routes
    @property
    def mass(self):
        return self.params.mass

    @property
    def omega(self):
        return self.params.omega

    @property
    def mu(self):
        return self.params.mu

    @property
    def hbar(self):
        return self.params.hbar


def derive(p: OscillatorParams) -> DerivedQuantities:
    m, w, mu, hbar = p.mass, p.omega, p.mu, p.hbar
    # (w - mu)(w + mu) keeps precision when |mu| is close to w
    big_omega = math.sqrt((w - mu) * (w + mu))
    rho = (m / (2.0 * hbar)) * complex(big_omega, mu)
    theta = 1.0 / (math.sqrt(2.0 * m * hbar) * math.sqrt(big_omega))
    gamma = complex(theta * m * mu, -theta * m * big_omega)
    length_scale = math.sqrt(hbar / (m * big_omega))
    return DerivedQuantities(p, big_omega, rho, theta, gamma, length_scale)
