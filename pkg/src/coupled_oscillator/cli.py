"""Command-line front end.

    coupled-oscillator SUBCOMMAND [options]

Subcommands: spectrum, eigenstate, uncertainty, coherent, evolve, classical,
verify. Data (CSV or JSON) goes to stdout or ``--out``; diagnostics go to
stderr. Options may also come from a flat ``key = value`` config file
(``--config``) whose keys are the flag names without the leading dashes;
flags override the file, which overrides the defaults.

Exit status: 0 success, 1 verification failure, 2 usage or validation
error, 3 numerical-solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import analytic, fock, grid, harness
from .analytic import CoherentParams
from .errors import NumericalFailure, OscillatorError, ParameterError
from .params import OscillatorParams, derive

log = logging.getLogger("coupled_oscillator")

SUBCOMMANDS = ("spectrum", "eigenstate", "uncertainty", "coherent", "evolve", "classical", "verify")
DEFAULT_MU_SWEEP = (0.0, 0.3, 0.6, 0.9)
DEFAULT_SINGLE_MU = 0.6
DEFAULT_ALPHAS = (0.5, 2.0, 3.0)
DEFAULT_PHIS = (0.0, math.pi / 4, math.pi / 2)
DEFAULT_TRAJECTORY_ALPHA = CoherentParams(2.0, 0.0)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    mus: tuple = DEFAULT_MU_SWEEP
    n_max: int = 10
    n: int = 0
    fock_dim: int = 64
    grid_points: int = grid.DEFAULT_POINTS
    grid_span: float | None = None
    alpha_set: tuple = tuple(CoherentParams(a, f) for a, f in product(DEFAULT_ALPHAS, DEFAULT_PHIS))
    trajectory_alpha: CoherentParams = DEFAULT_TRAJECTORY_ALPHA
    horizon: float | None = None
    dt: float | None = None
    seed: int = 42
    samples: int = 200
    output_format: str = "csv"
    output_path: str | None = None

    @property
    def param_sets(self):
        return [OscillatorParams(self.mass, self.omega, mu, self.hbar) for mu in self.mus]

    def echo(self) -> dict:
        return {
            "mass": self.mass,
            "omega": self.omega,
            "hbar": self.hbar,
            "mu": list(self.mus),
            "nMax": self.n_max,
            "fockDim": self.fock_dim,
            "grid": "auto" if self.grid_span is None else {"span": self.grid_span},
            "gridPoints": self.grid_points,
            "alphaSet": [[a.magnitude, a.phase] for a in self.alpha_set],
            "trajectoryAlpha": [self.trajectory_alpha.magnitude, self.trajectory_alpha.phase],
            "horizon": "auto" if self.horizon is None else self.horizon,
            "dt": "auto" if self.dt is None else self.dt,
            "seed": self.seed,
            "samples": self.samples,
        }


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _optional_float(text):
    if str(text).strip().lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")


# flag name -> (converter, help)
OPTIONS = {
    "mass": (_float, "particle mass (default 1)"),
    "omega": (_float, "oscillator angular frequency (default 1)"),
    "mu": (_float_list, "coupling; comma list for a sweep (verify default 0,0.3,0.6,0.9; "
                        "other subcommands default 0.6)"),
    "hbar": (_float, "reduced Planck constant (default 1)"),
    "n-max": (_int, "highest level for spectrum/uncertainty checks (default 10, max 12)"),
    "n": (_int, "level sampled by 'eigenstate' (default 0)"),
    "fock-dim": (_int, "Fock truncation dimension (default 64)"),
    "grid-n": (_int, "grid points (default 4000)"),
    "grid-span": (_optional_float, "grid half-width, or 'auto' (default)"),
    "alpha": (_float_list, "coherent |alpha| value(s)"),
    "phi": (_float_list, "coherent phase(s) in radians"),
    "horizon": (_optional_float, "time horizon, or 'auto' = two periods 4 pi/Omega"),
    "dt": (_optional_float, "time step for Crank-Nicolson and RK4, or 'auto' = 1e-3/Omega"),
    "seed": (_int, "RNG seed for random superpositions (default 42)"),
    "samples": (_int, "number of time samples (default 200)"),
    "format": (str, "output format: csv or json"),
    "out": (str, "output path (default stdout)"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for name, (conv, help_text) in OPTIONS.items():
        kwargs = {"type": conv, "default": None, "help": help_text}
        if name == "format":
            kwargs["choices"] = ("csv", "json")
        common.add_argument(f"--{name}", **kwargs)
    common.add_argument("--config", default=None, help="flat key = value config file")
    parser = _Parser(
        prog="coupled-oscillator",
        description="Harmonic oscillator with position-momentum coupling: closed forms, "
                    "Fock-space and grid routes, and a cross-validation report.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "spectrum": "eigenenergies by closed form, grid and Fock routes",
        "eigenstate": "sampled complex eigenfunction psi_n(x)",
        "uncertainty": "eigenstate uncertainty products and the lower bound",
        "coherent": "coherent-state means, variances and products",
        "evolve": "coherent-state trajectories by all routes",
        "classical": "classical trajectory by RK4 and closed form",
        "verify": "run the full cross-validation report",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        conv = OPTIONS[key][0]
        try:
            values[key] = conv(value)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{lineno}: key {key!r}: {exc}")
    return values


def parse(argv=None) -> tuple[str, RunConfig]:
    """Parse argv (and an optional config file) into a validated RunConfig."""
    args = build_parser().parse_args(argv)
    merged = read_config_file(args.config) if args.config else {}
    for name in OPTIONS:
        value = getattr(args, name.replace("-", "_"))
        if value is not None:
            merged[name] = value
    return args.command, _make_config(args.command, merged)


def _make_config(command: str, opts: dict) -> RunConfig:
    single = command != "verify"
    mus = opts.get("mu", [DEFAULT_SINGLE_MU] if single else list(DEFAULT_MU_SWEEP))
    if not mus:
        raise UsageError("--mu needs at least one value")
    if single and len(mus) > 1:
        raise UsageError(f"'{command}' takes a single --mu value, got {len(mus)}")
    mass, omega, hbar = opts.get("mass", 1.0), opts.get("omega", 1.0), opts.get("hbar", 1.0)
    for i, mu in enumerate(mus):
        try:
            OscillatorParams(mass, omega, mu, hbar)
        except ParameterError as exc:
            where = f"mu entry #{i} ({mu!r})" if len(mus) > 1 else "--mu"
            raise UsageError(f"{where}: {exc}")

    alphas, phis = opts.get("alpha"), opts.get("phi")
    if alphas is None and phis is None:
        alpha_set = RunConfig.alpha_set
        if single and command != "coherent":
            alpha_set = (DEFAULT_TRAJECTORY_ALPHA,)
        trajectory = DEFAULT_TRAJECTORY_ALPHA
    else:
        alphas = alphas if alphas is not None else [DEFAULT_TRAJECTORY_ALPHA.magnitude]
        phis = phis if phis is not None else [0.0]
        if any(a < 0 or a > 4 for a in alphas):
            raise UsageError("--alpha values must lie in [0, 4]")
        alpha_set = tuple(CoherentParams(a, f) for a, f in product(alphas, phis))
        trajectory = CoherentParams(alphas[0], phis[0])

    cfg = RunConfig(
        mass=mass,
        omega=omega,
        hbar=hbar,
        mus=tuple(mus),
        n_max=opts.get("n-max", 10),
        n=opts.get("n", 0),
        fock_dim=opts.get("fock-dim", 64),
        grid_points=opts.get("grid-n", grid.DEFAULT_POINTS),
        grid_span=opts.get("grid-span"),
        alpha_set=alpha_set,
        trajectory_alpha=trajectory,
        horizon=opts.get("horizon"),
        dt=opts.get("dt"),
        seed=opts.get("seed", 42),
        samples=opts.get("samples", 200),
        output_format=opts.get("format", "json" if command == "verify" else "csv"),
        output_path=opts.get("out"),
    )
    _check_ranges(cfg)
    return cfg


def _check_ranges(cfg: RunConfig):
    if not 0 <= cfg.n_max <= 12:
        raise UsageError(f"--n-max must be in [0, 12], got {cfg.n_max}")
    if cfg.n < 0 or cfg.n > 1000:
        raise UsageError(f"--n must be in [0, 1000], got {cfg.n}")
    if cfg.fock_dim < fock.MIN_DIM or cfg.fock_dim > 512:
        raise UsageError(f"--fock-dim must be in [{fock.MIN_DIM}, 512], got {cfg.fock_dim}")
    if cfg.fock_dim < cfg.n_max + 3:
        raise UsageError(f"--fock-dim {cfg.fock_dim} too small for --n-max {cfg.n_max}")
    if cfg.grid_points < 64:
        raise UsageError(f"--grid-n must be >= 64, got {cfg.grid_points}")
    if cfg.grid_span is not None and not cfg.grid_span > 0:
        raise UsageError(f"--grid-span must be > 0, got {cfg.grid_span}")
    for a in cfg.alpha_set + (cfg.trajectory_alpha,):
        need = fock.required_dim(a)
        if cfg.fock_dim < need:
            raise UsageError(
                f"--fock-dim {cfg.fock_dim} too small for |alpha|={a.magnitude:g} (need {need})"
            )
    if cfg.samples < 2:
        raise UsageError(f"--samples must be >= 2, got {cfg.samples}")
    if cfg.dt is not None and not cfg.dt > 0:
        raise UsageError(f"--dt must be > 0, got {cfg.dt}")
    if cfg.horizon is not None:
        for p in cfg.param_sets:
            limit = 8 * math.pi / derive(p).big_omega
            if not 0 < cfg.horizon <= limit:
                raise UsageError(
                    f"--horizon must be in (0, 8 pi/Omega = {limit:.6g}] for mu={p.mu!r}"
                )


# --- subcommand tables ---------------------------------------------------

def _grid_for(cfg: RunConfig, p: OscillatorParams, n_max: int):
    if cfg.grid_span is None:
        return grid.auto_grid(p, n_max, cfg.grid_points)
    return grid.GridSpec.symmetric(cfg.grid_span, cfg.grid_points)


def _times(cfg: RunConfig, d):
    horizon = cfg.horizon if cfg.horizon is not None else 4 * math.pi / d.big_omega
    return np.linspace(0.0, horizon, cfg.samples)


def table_spectrum(cfg: RunConfig):
    p = cfg.param_sets[0]
    d = derive(p)
    g = _grid_for(cfg, p, cfg.n_max)
    res = grid.solve_lowest(grid.build_hamiltonian(p, g), g, cfg.n_max + 1)
    fs = fock.build_fock_set(p, cfg.fock_dim)
    rows = []
    for n in range(cfg.n_max + 1):
        e = analytic.energy(d, n)
        rows.append({"n": n, "E_analytic": e, "E_grid": float(res.energies[n]),
                     "E_fock": float(fs.h[n, n].real),
                     "relErr": abs(float(res.energies[n]) - e) / e})
    return rows


def table_eigenstate(cfg: RunConfig):
    p = cfg.param_sets[0]
    d = derive(p)
    g = _grid_for(cfg, p, max(cfg.n, 1))
    x = g.points
    psi = analytic.wave_function(d, cfg.n, x)
    return [{"x": float(xi), "re_psi": float(v.real), "im_psi": float(v.imag),
             "abs_psi_sq": float(abs(v) ** 2)} for xi, v in zip(x, psi)]


def table_uncertainty(cfg: RunConfig):
    d = derive(cfg.param_sets[0])
    bound = analytic.minimum_bound(d)
    rows = []
    for n in range(cfg.n_max + 1):
        m = analytic.eigen_moments(d, n)
        rows.append({"n": n, "delta_x": math.sqrt(m.var_x), "delta_p": math.sqrt(m.var_p),
                     "product": analytic.uncertainty_product(d, n), "bound": bound})
    return rows


def table_coherent(cfg: RunConfig):
    d = derive(cfg.param_sets[0])
    rows = []
    for a in cfg.alpha_set:
        m = analytic.coherent_moments(d, a)
        rows.append({"alpha": a.magnitude, "phi": a.phase, "mean_x": m.mean_x, "mean_p": m.mean_p,
                     "var_x": m.var_x, "var_p": m.var_p, "product": m.product})
    return rows


def table_evolve(cfg: RunConfig):
    p = cfg.param_sets[0]
    d = derive(p)
    a = cfg.trajectory_alpha
    ts = _times(cfg, d)
    exact = analytic.coherent_trajectory(d, a, ts)
    fs = fock.build_fock_set(p, cfg.fock_dim)
    v0 = fock.coherent_vector(a, cfg.fock_dim)
    dt = cfg.dt if cfg.dt is not None else 1e-3 / d.big_omega
    cx, cp = harness.crank_nicolson_trajectory(p, a, ts, dt)
    printed = analytic.simplified_position_with_extra_term(d, a, ts)
    rows = []
    for i, t in enumerate(ts):
        v = fock.evolve(v0, d, t)
        rows.append({"t": float(t), "x_analytic": float(exact.x[i]), "p_analytic": float(exact.p[i]),
                     "x_fock": fock.expectation(v, fs.x).real, "p_fock": fock.expectation(v, fs.p).real,
                     "x_cn": float(cx[i]), "p_cn": float(cp[i]), "x_eq41": float(printed[i])})
    return rows


def table_classical(cfg: RunConfig):
    p = cfg.param_sets[0]
    d = derive(p)
    ts = _times(cfg, d)
    m0 = analytic.coherent_moments(d, cfg.trajectory_alpha)
    dt = cfg.dt if cfg.dt is not None else 1e-3 / d.big_omega
    rx, rp = analytic.rk4_trajectory(p, m0.mean_x, m0.mean_p, ts, max_step=dt)
    ex = analytic.classical_trajectory(p, m0.mean_x, m0.mean_p, ts)
    return [{"t": float(t), "x_rk4": float(rx[i]), "p_rk4": float(rp[i]),
             "x_exact": float(ex.x[i]), "p_exact": float(ex.p[i])} for i, t in enumerate(ts)]


TABLES = {
    "spectrum": table_spectrum,
    "eigenstate": table_eigenstate,
    "uncertainty": table_uncertainty,
    "coherent": table_coherent,
    "evolve": table_evolve,
    "classical": table_classical,
}


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        command, cfg = parse(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    try:
        if command == "verify":
            report = harness.run_all(cfg)
            text = report.to_json() if cfg.output_format == "json" else report.to_csv()
            _emit(text, cfg.output_path)
            s = report.summary
            print(f"verify: {s['passed']}/{s['total']} checks passed", file=sys.stderr)
            for c in report.checks:
                if not c.passed:
                    print(f"FAIL {c.name}: expected {c.expected!r}, observed {c.observed!r}, "
                          f"tol {c.tolerance!r}", file=sys.stderr)
            return 0 if report.all_passed else 1
        rows = TABLES[command](cfg)
        text = json.dumps(rows, indent=2) + "\n" if cfg.output_format == "json" else rows_to_csv(rows)
        _emit(text, cfg.output_path)
        return 0
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error
        sys.stdout = None
        return 0
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (OscillatorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
