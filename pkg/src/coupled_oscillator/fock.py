"""Truncated Fock-space representation of the coupled oscillator.

The number basis |n> of the ladder operators built for this Hamiltonian is
also its energy eigenbasis, so time evolution is a diagonal phase. Position
and momentum are tridiagonal in this basis; anything built from products of
them (the Hamiltonian, commutators) is wrong in the last one or two rows and
columns because the ladder is cut off. Block invariants are therefore only
meaningful on the leading ``dim - 2`` block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import CoherentParams, MomentSet
from .errors import DimensionMismatch, DimensionTooSmall, TruncationInsufficient
from .params import DerivedQuantities, OscillatorParams, derive
from .special import log_factorial

MIN_DIM = 4


def annihilation_matrix(dim: int) -> np.ndarray:
    """a with a[n, n+1] = sqrt(n+1); zero elsewhere."""
    if dim < 1:
        raise DimensionTooSmall(f"dim must be >= 1, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


@dataclass(frozen=True)
class FockSet:
    a: np.ndarray
    adag: np.ndarray
    x: np.ndarray
    p: np.ndarray
    h: np.ndarray
    derived: DerivedQuantities

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @property
    def number(self) -> np.ndarray:
        return self.adag @ self.a


def build_fock_set(params: OscillatorParams, dim: int) -> FockSet:
    """Matrices of a, a^dag, x, p and H in the first ``dim`` number states.

    x = sqrt(hbar/(2 m Omega)) (a + a^dag)
    p = -i sqrt(m hbar/(2 Omega)) [Omega (a - a^dag) - i mu (a + a^dag)]
    H = p^2/2m + m omega^2 x^2/2 + (mu/2)(xp + px), assembled from x and p
    directly rather than written down as hbar Omega (N + 1/2).
    """
    if dim < MIN_DIM:
        raise DimensionTooSmall(f"Fock dimension must be >= {MIN_DIM}, got {dim}")
    d = derive(params)
    m, w, mu, hbar, big = d.mass, d.omega, d.mu, d.hbar, d.big_omega
    a = annihilation_matrix(dim)
    adag = a.conj().T
    x = math.sqrt(hbar / (2.0 * m * big)) * (a + adag)
    p = -1j * math.sqrt(m * hbar / (2.0 * big)) * (big * (a - adag) - 1j * mu * (a + adag))
    h = p @ p / (2.0 * m) + 0.5 * m * w**2 * (x @ x) + 0.5 * mu * (x @ p + p @ x)
    for arr in (a, adag, x, p, h):
        arr.flags.writeable = False
    return FockSet(a, adag, x, p, h, d)


def required_dim(a: CoherentParams) -> int:
    """Fock dimension that keeps the truncated Poisson tail far below 1e-16."""
    n_mean = a.magnitude**2
    return max(MIN_DIM, math.ceil(n_mean + 10.0 * math.sqrt(n_mean + 1.0) + 20.0))


def _tail_log_mass(r: float, dim: int) -> float:
    # log of exp(-r^2) r^(2 dim) / dim!, the leading term of the discarded tail
    if r == 0:
        return -math.inf
    return -r * r + 2 * dim * math.log(r) - log_factorial(dim)


def coherent_vector(a: CoherentParams, dim: int | None = None) -> np.ndarray:
    """Truncated coherent state c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    Renormalized after truncation. ``dim`` defaults to :func:`required_dim`.
    """
    if dim is None:
        dim = required_dim(a)
    if dim < 1:
        raise DimensionTooSmall(f"dim must be >= 1, got {dim}")
    if _tail_log_mass(a.magnitude, dim) >= math.log(1e-16):
        raise TruncationInsufficient(
            f"dim={dim} truncates too much of the coherent state with |alpha|="
            f"{a.magnitude:g}; need at least {required_dim(a)}"
        )
    n = np.arange(dim)
    r = a.magnitude
    if r == 0:
        c = np.zeros(dim, dtype=complex)
        c[0] = 1.0
        return c
    log_fact = np.array([log_factorial(k) for k in n])
    log_mod = -0.5 * r * r + n * math.log(r) - 0.5 * log_fact
    c = np.exp(log_mod) * np.exp(1j * n * a.phase)
    return c / np.linalg.norm(c)


def evolve(state: np.ndarray, d: DerivedQuantities, t: float) -> np.ndarray:
    """Apply exp(-i H t / hbar): c_n -> c_n exp(-i Omega t (n + 1/2))."""
    n = np.arange(state.shape[0])
    return state * np.exp(-1j * d.big_omega * t * (n + 0.5))


def _check_dims(state, op):
    if op.shape != (state.shape[0], state.shape[0]):
        raise DimensionMismatch(
            f"state has dim {state.shape[0]} but operator is {op.shape[0]}x{op.shape[1]}"
        )


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    _check_dims(state, op)
    return complex(np.vdot(state, op @ state))


def variance(state: np.ndarray, op: np.ndarray) -> float:
    """<M^2> - <M>^2 for a Hermitian M, with <M^2> taken as ||M v||^2."""
    _check_dims(state, op)
    mv = op @ state
    mean = np.vdot(state, mv).real
    var = np.vdot(mv, mv).real - mean * mean
    if -1e-12 <= var < 0:
        var = 0.0
    return float(var)


def moments(state: np.ndarray, fs: FockSet) -> MomentSet:
    return MomentSet(
        expectation(state, fs.x).real,
        expectation(state, fs.p).real,
        variance(state, fs.x),
        variance(state, fs.p),
    )


def product_of_uncertainties(state: np.ndarray, fs: FockSet) -> float:
    return math.sqrt(variance(state, fs.x) * variance(state, fs.p))


def basis_state(n: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v
