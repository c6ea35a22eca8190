"""Position-grid route: finite-difference Hamiltonian, lowest eigenpairs,
quadrature moments and Crank-Nicolson propagation.

States live on all ``n_points`` nodes of a uniform grid, with the two
boundary nodes pinned to zero (Dirichlet). Operators act on the interior
nodes only and are stored as sparse banded matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh, splu

from .analytic import CoherentParams, MomentSet, wave_functions
from .errors import ConvergenceFailure, SolveFailure, ZeroOverlap
from .fock import coherent_vector, required_dim
from .params import OscillatorParams, derive

DEFAULT_POINTS = 4000
DEFAULT_ORDER = 4

# central-difference weights for offsets 1..r; the -k weight is -c_k (first
# derivative) or +c_k (second derivative), the centre weight is listed apart
_FIRST = {
    2: (1 / 2,),
    4: (2 / 3, -1 / 12),
    6: (3 / 4, -3 / 20, 1 / 60),
}
_SECOND = {
    2: (-2.0, (1.0,)),
    4: (-5 / 2, (4 / 3, -1 / 12)),
    6: (-49 / 18, (3 / 2, -3 / 20, 1 / 90)),
}


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got {self.x_min} >= {self.x_max}")
        if self.n_points < 64:
            raise ValueError(f"n_points must be >= 64, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @classmethod
    def symmetric(cls, half_width: float, n_points: int = DEFAULT_POINTS) -> "GridSpec":
        return cls(-half_width, half_width, n_points)


def auto_grid(params: OscillatorParams, n_max: int, n_points: int = DEFAULT_POINTS) -> GridSpec:
    """Domain wide enough that eigenfunction tails up to ``n_max`` vanish.

    x_max = 1.5 * (classical turning point of level n_max) + 5 length scales.
    """
    d = derive(params)
    turning = math.sqrt((2 * n_max + 1) * d.hbar / (d.mass * d.big_omega))
    return GridSpec.symmetric(1.5 * turning + 5.0 * d.length_scale, n_points)


def coherent_grid(params: OscillatorParams, a: CoherentParams, n_points: int = 2048) -> GridSpec:
    """Domain for propagating a coherent packet: orbit amplitude + 10 length scales."""
    d = derive(params)
    amplitude = 2.0 * math.sqrt(d.hbar / (2.0 * d.mass * d.big_omega)) * a.magnitude
    return GridSpec.symmetric(amplitude + 10.0 * d.length_scale, n_points)


def trapz(values, g: GridSpec):
    return np.trapezoid(values, dx=g.spacing)


def inner_product(f, h, g: GridSpec) -> complex:
    """<f|h> by trapezoidal quadrature."""
    return complex(trapz(np.conj(f) * h, g))


def normalize(state, g: GridSpec):
    return state / math.sqrt(trapz(np.abs(state) ** 2, g))


def build_hamiltonian(params: OscillatorParams, g: GridSpec, order: int = DEFAULT_ORDER):
    """Hermitian finite-difference Hamiltonian on the interior nodes.

    H = -(hbar^2/2m) D2 + (m omega^2/2) X^2 + (mu/2)(X P + P X), P = -i hbar D1,
    with D1 antisymmetric and D2 symmetric central stencils of the given order
    (2, 4 or 6). The symmetrized coupling makes H exactly Hermitian entry by
    entry. Returns a CSR matrix.
    """
    if order not in _FIRST:
        raise ValueError(f"stencil order must be one of {sorted(_FIRST)}, got {order}")
    m, w, mu, hbar = params.mass, params.omega, params.mu, params.hbar
    h = g.spacing
    x = g.points[1:-1]
    n = x.size
    centre, side = _SECOND[order]
    kin = -hbar**2 / (2.0 * m * h * h)
    diagonals = [kin * centre + 0.5 * m * w * w * x * x]
    offsets = [0]
    for k, (c1, c2) in enumerate(zip(_FIRST[order], side), start=1):
        s = x[:-k] + x[k:]  # x_i + x_j on the k-th off-diagonal
        # (mu/2) (x_i + x_j) P_ij with P_ij = -i hbar D1_ij
        upper = kin * c2 + 0.5 * mu * (-1j * hbar * c1 / h) * s
        lower = kin * c2 + 0.5 * mu * (1j * hbar * c1 / h) * s
        diagonals += [upper, lower]
        offsets += [k, -k]
    return sp.diags(diagonals, offsets, shape=(n, n), format="csr", dtype=complex)


@dataclass(frozen=True)
class GridEigenResult:
    spec: GridSpec
    energies: np.ndarray
    states: np.ndarray  # shape (k, n_points)


def solve_lowest(H, g: GridSpec, k: int = 12, references=None) -> GridEigenResult:
    """The ``k`` lowest eigenpairs of the grid Hamiltonian.

    Shift-invert Lanczos about 0, which lies below the spectrum: the discrete
    operator is positive definite for |mu| < omega. The start vector is seeded
    so results are reproducible. Eigenvectors are padded with the boundary
    zeros, normalized by trapezoidal quadrature, and phase-aligned either to
    ``references`` (one array per state) or, without references, so that the
    largest-modulus sample is real and positive.
    """
    if not 1 <= k <= 32:
        raise ValueError(f"k must be in [1, 32], got {k}")
    n = H.shape[0]
    if n != g.n_points - 2:
        raise ValueError(f"operator size {n} does not match grid with {g.n_points} nodes")
    v0 = np.random.default_rng(12345).standard_normal(n).astype(complex)
    try:
        vals, vecs = eigsh(H.tocsc(), k=k, sigma=0.0, which="LM", v0=v0)
    except (ArpackNoConvergence, ArpackError) as exc:
        raise ConvergenceFailure(f"grid eigensolve did not converge: {exc}") from exc
    order = np.argsort(vals)
    vals = vals[order]
    states = np.zeros((k, g.n_points), dtype=complex)
    for i, col in enumerate(order):
        psi = np.zeros(g.n_points, dtype=complex)
        psi[1:-1] = vecs[:, col]
        psi = normalize(psi, g)
        if references is not None:
            psi = phase_align(psi, references[i], g)
        else:
            peak = psi[np.argmax(np.abs(psi))]
            psi = psi * (abs(peak) / peak)
        states[i] = psi
    return GridEigenResult(g, vals, states)


def phase_align(state, reference, g: GridSpec):
    """Rotate ``state`` by a unit scalar so that <state|reference> is real and >= 0."""
    overlap = inner_product(state, reference, g)
    if abs(overlap) < 1e-8:
        raise ZeroOverlap(f"overlap {abs(overlap):.3g} too small to fix a phase")
    return state * (overlap / abs(overlap))


def derivative(state, g: GridSpec):
    """Fourth-order central first derivative, zero outside the grid."""
    padded = np.concatenate([np.zeros(2), state, np.zeros(2)])
    return (
        -padded[4:] + 8.0 * padded[3:-1] - 8.0 * padded[1:-3] + padded[:-4]
    ) / (12.0 * g.spacing)


def moments_on_grid(state, g: GridSpec, params: OscillatorParams) -> MomentSet:
    """Position and momentum mean/variance of a normalized grid state.

    <p^2> uses the integrated-by-parts form hbar^2 int |psi'|^2, which is real
    and non-negative by construction.
    """
    x = g.points
    hbar = params.hbar
    dens = np.abs(state) ** 2
    mean_x = float(trapz(x * dens, g))
    mean_x2 = float(trapz(x * x * dens, g))
    dpsi = derivative(state, g)
    mean_p = float((-1j * hbar * trapz(np.conj(state) * dpsi, g)).real)
    mean_p2 = float(hbar * hbar * trapz(np.abs(dpsi) ** 2, g))
    return MomentSet(mean_x, mean_p, mean_x2 - mean_x**2, mean_p2 - mean_p**2)


def coherent_state_on_grid(params: OscillatorParams, a: CoherentParams, g: GridSpec):
    """Coherent state assembled from the closed-form eigenfunctions, normalized on ``g``."""
    d = derive(params)
    dim = required_dim(a)
    coeffs = coherent_vector(a, dim)
    psi = coeffs @ wave_functions(d, dim - 1, g.points)
    psi[0] = psi[-1] = 0.0
    return normalize(psi, g)


class CrankNicolson:
    """Crank-Nicolson stepper for i hbar dpsi/dt = H psi with a fixed step.

    (I + i H dt / 2 hbar) psi_{k+1} = (I - i H dt / 2 hbar) psi_k; the left
    operator is LU-factorized once.

    ``energy_shift`` replaces H by H - E I. That only changes the global phase,
    so expectation values are untouched, but CN's phase error grows like
    (E dt)^3 per step: shifting by the packet's mean energy removes most of it.
    """

    def __init__(self, H, dt: float, hbar: float = 1.0, energy_shift: float = 0.0):
        if not dt > 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        n = H.shape[0]
        eye = sp.identity(n, dtype=complex, format="csc")
        half = (0.5j * dt / hbar) * (H - energy_shift * eye)
        self.dt = dt
        self._rhs = (eye - half).tocsr()
        try:
            self._lu = splu((eye + half).tocsc())
        except RuntimeError as exc:
            raise SolveFailure(f"Crank-Nicolson factorization failed: {exc}") from exc

    def step(self, state, steps: int = 1):
        """Advance a full-grid state by ``steps`` steps; boundary nodes stay 0."""
        inner = np.asarray(state, dtype=complex)[1:-1]
        for _ in range(steps):
            inner = self._lu.solve(self._rhs @ inner)
        if not np.all(np.isfinite(inner)):
            raise SolveFailure("Crank-Nicolson produced non-finite values")
        out = np.zeros(inner.size + 2, dtype=complex)
        out[1:-1] = inner
        return out


def mean_energy(state, H, g: GridSpec) -> float:
    """<psi|H|psi> for a normalized full-grid state (rectangle rule; the ends are 0)."""
    inner = np.asarray(state, dtype=complex)[1:-1]
    return float(np.vdot(inner, H @ inner).real * g.spacing)


def propagate(state, H, dt: float, steps: int, hbar: float = 1.0, energy_shift: float = 0.0):
    """Apply ``steps`` Crank-Nicolson steps of size ``dt`` to a full-grid state."""
    if len(state) != H.shape[0] + 2:
        raise ValueError("state must include the two boundary nodes of H's grid")
    return CrankNicolson(H, dt, hbar, energy_shift).step(state, steps)


def propagate_samples(state, H, times, max_dt: float, hbar: float = 1.0,
                      energy_shift: float = 0.0):
    """Yield the propagated state at each of the non-decreasing ``times``.

    The step is the largest one <= ``max_dt`` dividing the (uniform) sample
    spacing, so the factorization is shared across all samples.
    """
    times = np.asarray(times, dtype=float)
    if times.size > 1:
        gaps = np.diff(times)
        if np.any(gaps <= 0) or not np.allclose(gaps, gaps[0], rtol=1e-12, atol=0):
            raise ValueError("times must be uniformly spaced and increasing")
        per_sample = max(1, math.ceil(gaps[0] / max_dt - 1e-9))
        stepper = CrankNicolson(H, gaps[0] / per_sample, hbar, energy_shift)
    if times.size and times[0] < 0:
        raise ValueError("times must be >= 0")
    psi = np.asarray(state, dtype=complex)
    if times.size and times[0] > 0:
        lead = math.ceil(times[0] / max_dt)
        psi = propagate(psi, H, times[0] / lead, lead, hbar, energy_shift)
    for i in range(times.size):
        if i:
            psi = stepper.step(psi, per_sample)
        yield times[i], psi
