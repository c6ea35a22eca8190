"""Hermite polynomials and functions, Gauss-Hermite quadrature, log-factorials."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import ConvergenceFailure

_LOG_PI_QUARTER = 0.25 * math.log(math.pi)
# rescale threshold for the scaled recurrence; far from overflow but large
# enough that rescaling is rare
_BIG = 1e150
_LOG_BIG = math.log(_BIG)


def hermite_poly(n: int, xi):
    """Physicists' Hermite polynomial H_n(xi) by the three-term recurrence.

    Raw H_n overflows double precision around n ~ 160 for moderate xi; use
    :func:`hermite_function` for anything normalized.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    xi = np.asarray(xi, dtype=float)
    h_prev = np.ones_like(xi)
    if n == 0:
        return h_prev[()]
    h = 2.0 * xi
    for k in range(1, n):
        h_prev, h = h, 2.0 * xi * h - 2.0 * k * h_prev
    return h[()]


def hermite_functions(n_max: int, xi) -> np.ndarray:
    """All normalized Hermite functions h_0..h_{n_max} at ``xi``.

    h_n(xi) = H_n(xi) exp(-xi^2/2) / (pi^{1/4} sqrt(2^n n!)). Computed with the
    normalized recurrence

        h_{k+1} = sqrt(2/(k+1)) xi h_k - sqrt(k/(k+1)) h_{k-1}

    carried in scaled form (mantissa times a per-point log scale) so that
    neither the Gaussian factor underflows nor the polynomial part overflows,
    e.g. for n up to 1000 and |xi| up to 40.

    Returns an array of shape ``(n_max + 1,) + xi.shape``.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max + 1,) + xi.shape)
    log_scale = -0.5 * xi**2 - _LOG_PI_QUARTER
    f_prev = np.zeros_like(xi)
    f = np.ones_like(xi)
    out[0] = _unscale(f, log_scale)
    for k in range(n_max):
        f_next = math.sqrt(2.0 / (k + 1)) * xi * f - math.sqrt(k / (k + 1)) * f_prev
        big = np.abs(f_next) > _BIG
        if np.any(big):
            f_next = np.where(big, f_next / _BIG, f_next)
            f = np.where(big, f / _BIG, f)
            log_scale = np.where(big, log_scale + _LOG_BIG, log_scale)
        f_prev, f = f, f_next
        out[k + 1] = _unscale(f, log_scale)
    return out


def _unscale(f, log_scale):
    with np.errstate(divide="ignore"):
        return np.sign(f) * np.exp(np.log(np.abs(f)) + log_scale)


def hermite_function(n: int, xi):
    """Normalized Hermite function h_n(xi); see :func:`hermite_functions`."""
    return hermite_functions(n, xi)[n][()]


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight exp(-xi^2) on the real line."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        """Approximate the integral of f(xi) exp(-xi^2) over the real line."""
        return float(np.sum(self.weights * f(self.nodes)))

    def integrate_plain(self, g) -> float:
        """Approximate the integral of g(xi) (weight absorbed into g)."""
        return float(np.sum(self.weights * np.exp(self.nodes**2) * g(self.nodes)))


@lru_cache(maxsize=64)
def gauss_hermite(k: int, tol: float = 1e-14, max_iter: int = 50) -> QuadratureRule:
    """k-point Gauss-Hermite rule, exact for polynomials of degree <= 2k - 1.

    Initial node guesses are the eigenvalues of the Jacobi matrix of the
    Hermite recurrence; each is then Newton-polished on the orthonormal
    recurrence and the rule is mirrored to be exactly symmetric. Weights of
    the outermost nodes underflow to 0 for k beyond ~150.
    """
    if not 1 <= k <= 512:
        raise ValueError(f"k must be in [1, 512], got {k}")
    half = (k + 1) // 2
    if k == 1:
        guesses = np.zeros(1)
    else:
        guesses = eigvalsh_tridiagonal(np.zeros(k), np.sqrt(np.arange(1, k) / 2.0))
    # non-negative half, largest first
    guesses = guesses[::-1][:half]
    roots = np.empty(half)
    weights = np.empty(half)
    pi_quarter = math.pi**-0.25
    for i, z in enumerate(guesses):
        z = float(z)
        for _ in range(max_iter):
            p1, p2 = pi_quarter, 0.0
            for j in range(1, k + 1):
                p1, p2 = z * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1) / j) * p2, p1
            # p1 = p~_k(z), p2 = p~_{k-1}(z); p~_k' = sqrt(2k) p~_{k-1}
            pp = math.sqrt(2.0 * k) * p2
            dz = p1 / pp
            z -= dz
            if abs(dz) <= tol * max(1.0, abs(z)):
                break
        else:
            raise ConvergenceFailure(
                f"Gauss-Hermite node {i} of k={k} did not converge to {tol:g}"
            )
        roots[i] = z
        weights[i] = 2.0 / pp / pp
    if k % 2 == 1:
        roots[-1] = 0.0
    if np.any(np.diff(roots) >= 0):
        raise ConvergenceFailure(f"Gauss-Hermite nodes for k={k} are not distinct")
    nodes = np.concatenate([-roots, roots[::-1][k % 2:]]) + 0.0  # no -0.0
    w = np.concatenate([weights, weights[::-1][k % 2:]])
    nodes.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(nodes, w)


def _log_factorial_table(n_max: int) -> np.ndarray:
    # Neumaier-compensated running sum of log k
    table = np.zeros(n_max + 1)
    s, c = 0.0, 0.0
    for k in range(2, n_max + 1):
        term = math.log(k)
        t = s + term
        if abs(s) >= abs(term):
            c += (s - t) + term
        else:
            c += (term - t) + s
        s = t
        table[k] = s + c
    return table


_LOG_FACTORIAL = _log_factorial_table(1024)


def log_factorial(n: int) -> float:
    """ln(n!) without overflow."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n < len(_LOG_FACTORIAL):
        return float(_LOG_FACTORIAL[n])
    return math.lgamma(n + 1.0)
