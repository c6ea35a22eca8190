"""Cross-validation harness.

Each claim is computed along at least two independent routes (closed form,
Fock algebra, position grid, classical mechanics) and recorded as a
:class:`CheckResult` whose pass flag can be recomputed from its own fields.
Inequality claims are stored as "violation amount, expected 0".
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import analytic, fock, grid
from .analytic import CoherentParams
from .errors import CouplingTooStrong
from .params import OscillatorParams, derive
from .special import gauss_hermite, hermite_functions

log = logging.getLogger(__name__)

ROUTES = ("analytic", "fock", "grid", "classical")

GRID_TOL = 1e-3
FOCK_TOL = 1e-10
COHERENT_TOL = 1e-8
STATIONARY_TOL = 1e-10
FOCK_DYNAMICS_TOL = 1e-8
CN_TOL = 1e-4
RK4_TOL = 1e-6
EHRENFEST_DELTA = 1e-5
EHRENFEST_TOL = 1e-6
FLOOR_TOL = 1e-9
RATIO_TOL = 0.125  # |ratio - 4| <= 0.5
RANDOM_LEVELS = 8
RANDOM_SAMPLES = 1000
CN_POINTS = 2048
CN_ORDER = 6


@dataclass(frozen=True)
class CheckResult:
    name: str
    route: str
    expected: float
    observed: float
    tolerance: float
    passed: bool

    @classmethod
    def make(cls, name, route, expected, observed, tolerance):
        if route not in ROUTES:
            raise ValueError(f"unknown route {route!r}")
        expected, observed = float(expected), float(observed)
        return cls(name, route, expected, observed, float(tolerance),
                   passes(expected, observed, tolerance))

    def audit(self) -> bool:
        """True when the stored pass flag agrees with the stored numbers."""
        return self.passed == passes(self.expected, self.observed, self.tolerance)


def passes(expected, observed, tolerance) -> bool:
    return abs(observed - expected) <= tolerance * max(1.0, abs(expected))


@dataclass
class Report:
    params: dict
    checks: list = field(default_factory=list)
    erratum: list = field(default_factory=list)
    exploration: list = field(default_factory=list)

    @property
    def summary(self) -> dict:
        n_pass = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass}

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "summary": self.summary,
            "checks": [asdict(c) for c in self.checks],
            "erratum": self.erratum,
            "exploration": self.exploration,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "route", "expected", "observed", "tolerance", "passed"])
        for c in self.checks:
            writer.writerow([c.name, c.route, repr(c.expected), repr(c.observed),
                             repr(c.tolerance), str(c.passed).lower()])
        return buf.getvalue()


def _tag(p: OscillatorParams) -> str:
    return f"mu={p.mu!r}"


@lru_cache(maxsize=16)
def _grid_eigen(p: OscillatorParams, g: grid.GridSpec, k: int, order: int = grid.DEFAULT_ORDER):
    H = grid.build_hamiltonian(p, g, order)
    return grid.solve_lowest(H, g, k)


def _default_grid(p, n_max, n_points=grid.DEFAULT_POINTS, span=None):
    if span is None:
        return grid.auto_grid(p, n_max, n_points)
    return grid.GridSpec.symmetric(span, n_points)


def verify_spectrum(p: OscillatorParams, n_max: int = 10, grid_spec=None, fock_dim: int = 64):
    """Grid eigenvalues and the Fock Hamiltonian diagonal against hbar Omega (n + 1/2)."""
    if not 0 <= n_max <= 12:
        raise ValueError(f"n_max must be in [0, 12], got {n_max}")
    d = derive(p)
    tag = _tag(p)
    g = grid_spec or _default_grid(p, n_max)
    res = _grid_eigen(p, g, max(n_max + 1, 10))
    fs = fock.build_fock_set(p, fock_dim)
    out = []
    for n in range(n_max + 1):
        e = analytic.energy(d, n)
        out.append(CheckResult.make(f"{tag}/spectrum/grid/E{n}", "grid", e, res.energies[n], GRID_TOL))
        out.append(CheckResult.make(f"{tag}/spectrum/fock/E{n}", "fock", e, fs.h[n, n].real, FOCK_TOL))
    block = fock_dim - 2
    ref = d.hbar * d.big_omega * (fs.number + 0.5 * np.eye(fock_dim))
    dev = np.max(np.abs(fs.h - ref)[:block, :block]) / np.max(np.abs(ref[:block, :block]))
    out.append(CheckResult.make(f"{tag}/spectrum/fock/h_vs_number_block", "fock", 0.0, dev, FOCK_TOL))
    gaps = np.diff(res.energies[: min(n_max, 8) + 2])
    gap_dev = np.max(np.abs(gaps - d.hbar * d.big_omega)) / (d.hbar * d.big_omega)
    out.append(CheckResult.make(f"{tag}/spectrum/grid/gap_uniformity", "grid", 0.0, gap_dev, GRID_TOL))
    ground = 0.5 * d.hbar * d.big_omega
    below = max(0.0, ground * (1 - GRID_TOL) - res.energies[0])
    out.append(CheckResult.make(f"{tag}/spectrum/grid/no_mode_below_ground", "grid", 0.0, below, 0.0))
    return out


def random_superpositions(rng: np.random.Generator, count: int, levels: int, dim: int):
    """``count`` normalized complex-Gaussian states on the first ``levels`` of ``dim``."""
    coeffs = rng.standard_normal((count, levels)) + 1j * rng.standard_normal((count, levels))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    states = np.zeros((count, dim), dtype=complex)
    states[:, :levels] = coeffs
    return states


def verify_uncertainty(p: OscillatorParams, n_max: int = 10, grid_spec=None, fock_dim: int = 64,
                       seed: int = 42, alpha_set=(), samples: int = RANDOM_SAMPLES):
    """Eigenstate uncertainty products by three routes, the family minimum,
    and (report only) random-superposition products.

    Returns ``(checks, exploration)``.
    """
    if not 0 <= n_max <= 12:
        raise ValueError(f"n_max must be in [0, 12], got {n_max}")
    d = derive(p)
    tag = _tag(p)
    g = grid_spec or _default_grid(p, n_max)
    res = _grid_eigen(p, g, max(n_max + 1, 10))
    fs = fock.build_fock_set(p, fock_dim)
    bound = analytic.minimum_bound(d)
    out = []
    family = []
    for n in range(n_max + 1):
        exact = analytic.uncertainty_product(d, n)
        f_prod = fock.product_of_uncertainties(fock.basis_state(n, fock_dim), fs)
        g_prod = grid.moments_on_grid(res.states[n], g, p).product
        family.append(f_prod)
        out.append(CheckResult.make(f"{tag}/uncertainty/fock/n{n}", "fock", exact, f_prod, FOCK_TOL))
        out.append(CheckResult.make(f"{tag}/uncertainty/grid/n{n}", "grid", exact, g_prod, GRID_TOL))
    for a in alpha_set:
        family.append(fock.product_of_uncertainties(fock.coherent_vector(a, fock_dim), fs))
    out.append(CheckResult.make(f"{tag}/uncertainty/family_minimum", "fock", bound, min(family),
                                COHERENT_TOL))

    rng = np.random.default_rng(seed)
    states = random_superpositions(rng, samples, RANDOM_LEVELS, fock_dim)
    mx = states @ fs.x.T
    mp = states @ fs.p.T
    mean_x = np.einsum("ij,ij->i", states.conj(), mx).real
    mean_p = np.einsum("ij,ij->i", states.conj(), mp).real
    var_x = np.einsum("ij,ij->i", mx.conj(), mx).real - mean_x**2
    var_p = np.einsum("ij,ij->i", mp.conj(), mp).real - mean_p**2
    products = np.sqrt(np.clip(var_x, 0, None) * np.clip(var_p, 0, None))
    i_min = int(np.argmin(products))
    floor = 0.5 * d.hbar
    violation = max(0.0, floor - float(products[i_min]))
    out.append(CheckResult.make(f"{tag}/uncertainty/heisenberg_floor_violation", "fock", 0.0,
                                violation, FLOOR_TOL))
    exploration = {
        "mu": p.mu,
        "seed": seed,
        "samples": samples,
        "levels": RANDOM_LEVELS,
        "minProduct": float(products[i_min]),
        "familyBound": bound,
        "belowFamilyBound": bool(products[i_min] < bound),
        "argminCoefficients": [[float(c.real), float(c.imag)]
                               for c in states[i_min, :RANDOM_LEVELS]],
    }
    if exploration["belowFamilyBound"]:
        log.info("%s: random superposition reaches %.6g below the family bound %.6g "
                 "(informational)", tag, products[i_min], bound)
    return out, exploration


def verify_phase_factor(p: OscillatorParams, levels=(0, 1, 2), grid_spec=None):
    """Momentum variance of psi_n versus psi_n with its chirp stripped.

    The chirp exp(-i m mu x^2 / 2 hbar) carries all of the coupling's effect on
    momentum: varP(psi_n) = hbar m omega^2 (2n+1)/(2 Omega) while the real,
    chirp-free profile gives the bare-oscillator value hbar m Omega (2n+1)/2.
    For n = 0 the stripped profile is the modulus |psi_0|. (For n >= 1 |psi_n|
    itself would not do: it has kinks at the nodes.)
    """
    d = derive(p)
    tag = _tag(p)
    g = grid_spec or grid.auto_grid(p, max(levels))
    x = g.points
    psis = analytic.wave_functions(d, max(levels), x)
    out = []
    for n in levels:
        psi = psis[n].copy()
        psi[0] = psi[-1] = 0.0
        full = grid.moments_on_grid(grid.normalize(psi, g), g, p).var_p
        stripped = (psi * np.exp(0.5j * d.mass * d.mu * x**2 / d.hbar)).real
        bare = grid.moments_on_grid(grid.normalize(stripped, g), g, p).var_p
        out.append(CheckResult.make(f"{tag}/phase_factor/n{n}/var_p_chirped", "grid",
                                    analytic.eigen_moments(d, n).var_p, full, GRID_TOL))
        out.append(CheckResult.make(f"{tag}/phase_factor/n{n}/var_p_stripped", "grid",
                                    d.hbar * d.mass * d.big_omega * (2 * n + 1) / 2.0, bare,
                                    GRID_TOL))
    return out


def verify_coherent(p: OscillatorParams, alpha_set, fock_dim: int = 64, horizon=None,
                    samples: int = 200):
    """Fock-route coherent moments against the closed forms, plus phase- and
    time-independence of the variances."""
    d = derive(p)
    tag = _tag(p)
    fs = fock.build_fock_set(p, fock_dim)
    bound = analytic.minimum_bound(d)
    horizon = 4 * math.pi / d.big_omega if horizon is None else horizon
    ts = np.linspace(0.0, horizon, samples)
    out = []
    by_magnitude = {}
    for a in alpha_set:
        if a.magnitude > 4:
            raise ValueError(f"|alpha| must be <= 4, got {a.magnitude}")
        name = f"{tag}/coherent/|alpha|={a.magnitude!r},phi={a.phase!r}"
        v = fock.coherent_vector(a, fock_dim)
        got = fock.moments(v, fs)
        want = analytic.coherent_moments(d, a)
        for key in ("mean_x", "mean_p", "var_x", "var_p"):
            out.append(CheckResult.make(f"{name}/{key}", "fock", getattr(want, key),
                                        getattr(got, key), COHERENT_TOL))
        out.append(CheckResult.make(f"{name}/product", "fock", bound, got.product, COHERENT_TOL))
        drift = 0.0
        for t in ts:
            m_t = fock.moments(fock.evolve(v, d, t), fs)
            drift = max(drift, abs(m_t.var_x - got.var_x), abs(m_t.var_p - got.var_p))
        out.append(CheckResult.make(f"{name}/variance_time_drift", "fock", 0.0, drift,
                                    STATIONARY_TOL))
        by_magnitude.setdefault(a.magnitude, []).append((got.var_x, got.var_p))
    for r, vs in by_magnitude.items():
        arr = np.array(vs)
        spread = float(np.max(arr.max(axis=0) - arr.min(axis=0)))
        out.append(CheckResult.make(f"{tag}/coherent/|alpha|={r!r}/variance_phase_spread", "fock",
                                    0.0, spread, STATIONARY_TOL))
    return out


def verify_dynamics(p: OscillatorParams, a: CoherentParams, horizon=None, fock_dim: int = 64,
                    dt=None, samples: int = 200, cn_points: int = CN_POINTS):
    """Coherent-state trajectories by four routes, plus the erratum series.

    Returns ``(checks, erratum)``.
    """
    d = derive(p)
    tag = _tag(p)
    big = d.big_omega
    horizon = 4 * math.pi / big if horizon is None else float(horizon)
    if not 0 < horizon <= 8 * math.pi / big * (1 + 1e-12):
        raise ValueError(f"horizon must be in (0, 8 pi/Omega = {8 * math.pi / big:.6g}]")
    dt = 1e-3 / big if dt is None else float(dt)
    ts = np.linspace(0.0, horizon, samples)
    exact = analytic.coherent_trajectory(d, a, ts)
    out = []

    fs = fock.build_fock_set(p, fock_dim)
    v0 = fock.coherent_vector(a, fock_dim)
    fx = np.empty(samples)
    fp = np.empty(samples)
    for i, t in enumerate(ts):
        v = fock.evolve(v0, d, t)
        fx[i] = fock.expectation(v, fs.x).real
        fp[i] = fock.expectation(v, fs.p).real
    out.append(CheckResult.make(f"{tag}/dynamics/fock/x_max_error", "fock", 0.0,
                                np.max(np.abs(fx - exact.x)), FOCK_DYNAMICS_TOL))
    out.append(CheckResult.make(f"{tag}/dynamics/fock/p_max_error", "fock", 0.0,
                                np.max(np.abs(fp - exact.p)), FOCK_DYNAMICS_TOL))

    cx, cp = crank_nicolson_trajectory(p, a, ts, dt, cn_points)
    out.append(CheckResult.make(f"{tag}/dynamics/cn/x_max_error", "grid", 0.0,
                                np.max(np.abs(cx - exact.x)), CN_TOL))
    out.append(CheckResult.make(f"{tag}/dynamics/cn/p_max_error", "grid", 0.0,
                                np.max(np.abs(cp - exact.p)), CN_TOL))

    rx, rp = analytic.rk4_trajectory(p, fx[0], fp[0], ts, max_step=dt)
    out.append(CheckResult.make(f"{tag}/dynamics/rk4_vs_fock/x_max_error", "classical", 0.0,
                                np.max(np.abs(rx - fx)), RK4_TOL))
    out.append(CheckResult.make(f"{tag}/dynamics/rk4_vs_fock/p_max_error", "classical", 0.0,
                                np.max(np.abs(rp - fp)), RK4_TOL))

    m0 = analytic.coherent_moments(d, a)
    cl = analytic.classical_trajectory(p, m0.mean_x, m0.mean_p, ts)
    out.append(CheckResult.make(f"{tag}/dynamics/classical_closed_form/x_max_error", "classical",
                                0.0, np.max(np.abs(cl.x - exact.x)), COHERENT_TOL))

    lo = analytic.coherent_trajectory(d, a, ts - EHRENFEST_DELTA)
    hi = analytic.coherent_trajectory(d, a, ts + EHRENFEST_DELTA)
    xdot = (hi.x - lo.x) / (2 * EHRENFEST_DELTA)
    pdot = (hi.p - lo.p) / (2 * EHRENFEST_DELTA)
    ex_err = np.max(np.abs(xdot - (exact.p / p.mass + p.mu * exact.x)))
    ep_err = np.max(np.abs(pdot - (-p.mass * p.omega**2 * exact.x - p.mu * exact.p)))
    out.append(CheckResult.make(f"{tag}/dynamics/ehrenfest/x", "classical", 0.0, ex_err,
                                EHRENFEST_TOL))
    out.append(CheckResult.make(f"{tag}/dynamics/ehrenfest/p", "classical", 0.0, ep_err,
                                EHRENFEST_TOL))

    printed = analytic.simplified_position_with_extra_term(d, a, ts)
    deviation = np.abs(printed - fx)
    erratum = {
        "mu": p.mu,
        "alpha": a.magnitude,
        "phi": a.phase,
        "t": [float(t) for t in ts],
        "deviation": [float(v) for v in deviation],
        "maxDeviation": float(deviation.max()),
        "spuriousAmplitude": float(2 * math.sqrt(d.hbar / (2 * d.mass * big)) * a.magnitude
                                   * abs(p.mu) / big),
        "t0Mismatch": float(printed[0] - m0.mean_x),
    }
    return out, erratum


def crank_nicolson_trajectory(p: OscillatorParams, a: CoherentParams, ts, dt: float,
                              n_points: int = CN_POINTS):
    """<x>(t), <p>(t) of a grid coherent state propagated by Crank-Nicolson.

    Sixth-order stencil: the chirp of the eigenfunctions puts the packet at
    wavenumbers up to ~ m mu x / hbar, where the default fourth-order stencil
    loses 1e-4 over two periods at mu = 0.9 on 2048 points. The propagator
    is shifted by the packet's mean energy (global phase only).
    """
    g = grid.coherent_grid(p, a, n_points)
    H = grid.build_hamiltonian(p, g, CN_ORDER)
    psi0 = grid.coherent_state_on_grid(p, a, g)
    shift = grid.mean_energy(psi0, H, g)
    xs = np.empty(len(ts))
    ps = np.empty(len(ts))
    for i, (_, psi) in enumerate(grid.propagate_samples(psi0, H, ts, dt, p.hbar, shift)):
        m = grid.moments_on_grid(psi, g, p)
        xs[i], ps[i] = m.mean_x, m.mean_p
    return xs, ps


def convergence_ratios(p: OscillatorParams, n_levels: int = 6, intervals: int = 1000,
                       order: int = 2, n_max_domain: int = 10):
    """Eigenvalue-error ratios err(h) / err(h/2) for the lowest levels."""
    span = grid.auto_grid(p, n_max_domain).x_max
    d = derive(p)
    exact = np.array([analytic.energy(d, n) for n in range(n_levels)])
    errs = []
    for m in (intervals, 2 * intervals):
        g = grid.GridSpec.symmetric(span, m + 1)
        H = grid.build_hamiltonian(p, g, order)
        errs.append(grid.solve_lowest(H, g, n_levels).energies - exact)
    return errs[0] / errs[1]


def verify_properties(p: OscillatorParams, fock_dim: int = 64):
    """Operator-algebra invariants and the second-order grid convergence rate."""
    tag = _tag(p)
    fs = fock.build_fock_set(p, fock_dim)
    out = []
    for name in ("x", "p", "h"):
        A = getattr(fs, name)
        dev = np.max(np.abs(A - A.conj().T)) / np.max(np.abs(A))
        out.append(CheckResult.make(f"{tag}/properties/fock/{name}_hermitian", "fock", 0.0, dev,
                                    1e-12))
    comm = fs.a @ fs.adag - fs.adag @ fs.a
    b = fock_dim - 1
    out.append(CheckResult.make(f"{tag}/properties/fock/ladder_commutator_block", "fock", 0.0,
                                np.max(np.abs(comm[:b, :b] - np.eye(b))), 1e-12))
    comm = fs.x @ fs.p - fs.p @ fs.x
    b = fock_dim - 2
    out.append(CheckResult.make(f"{tag}/properties/fock/xp_commutator_block", "fock", 0.0,
                                np.max(np.abs(comm[:b, :b] - 1j * p.hbar * np.eye(b))), 1e-10))
    g = grid.auto_grid(p, 10, 512)
    H = grid.build_hamiltonian(p, g)
    out.append(CheckResult.make(f"{tag}/properties/grid/hamiltonian_hermitian", "grid", 0.0,
                                abs(H - H.conj().T).max(), 0.0))
    for n, ratio in enumerate(convergence_ratios(p)):
        out.append(CheckResult.make(f"{tag}/properties/grid/order2_convergence_ratio/n{n}", "grid",
                                    4.0, ratio, RATIO_TOL))
    return out


def verify_hermite_orthonormality(n_max: int = 40, k: int = 64):
    rule = gauss_hermite(k)
    h = hermite_functions(n_max, rule.nodes)
    gram = (h * (rule.weights * np.exp(rule.nodes**2))) @ h.T
    dev = np.max(np.abs(gram - np.eye(n_max + 1)))
    return [CheckResult.make("hermite_orthonormality", "analytic", 0.0, dev, 1e-10)]


def run_all(config) -> Report:
    """Run every verification over the configured mu sweep.

    ``config`` is a :class:`coupled_oscillator.cli.RunConfig` (or anything
    with the same attributes). Output is deterministic for a fixed seed.
    """
    param_sets = []
    for i, mu in enumerate(config.mus):
        try:
            param_sets.append(OscillatorParams(config.mass, config.omega, mu, config.hbar))
        except CouplingTooStrong:
            raise CouplingTooStrong(mu, config.omega, label=f"mu entry #{i}") from None
    report = Report(params=config.echo())
    report.checks += verify_hermite_orthonormality()
    for p in param_sets:
        log.info("verifying mu=%r", p.mu)
        g = None
        if config.grid_span is not None or config.grid_points != grid.DEFAULT_POINTS:
            g = _default_grid(p, config.n_max, config.grid_points, config.grid_span)
        report.checks += verify_spectrum(p, config.n_max, g, config.fock_dim)
        checks, exploration = verify_uncertainty(p, config.n_max, g, config.fock_dim, config.seed,
                                                 config.alpha_set)
        report.checks += checks
        report.exploration.append(exploration)
        report.checks += verify_phase_factor(p)
        report.checks += verify_coherent(p, config.alpha_set, config.fock_dim, config.horizon,
                                         config.samples)
        checks, erratum = verify_dynamics(p, config.trajectory_alpha, config.horizon,
                                          config.fock_dim, config.dt, config.samples)
        report.checks += checks
        report.erratum.append(erratum)
        report.checks += verify_properties(p, config.fock_dim)
    return report
