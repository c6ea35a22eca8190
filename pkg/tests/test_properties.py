"""Randomized invariants (hypothesis)."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from coupled_oscillator import analytic, fock
from coupled_oscillator.analytic import CoherentParams
from coupled_oscillator.params import OscillatorParams, derive
from coupled_oscillator.special import hermite_functions

positive = st.floats(0.2, 5.0)
coupling_fraction = st.floats(-0.98, 0.98)


@st.composite
def params(draw):
    omega = draw(positive)
    return OscillatorParams(draw(positive), omega, draw(coupling_fraction) * omega, draw(positive))


@settings(max_examples=60, deadline=None)
@given(params())
def test_commutator_identity(p):
    d = derive(p)
    assert abs(2 * p.hbar * (d.theta * d.gamma.conjugate()).imag - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(params(), st.integers(0, 12))
def test_fock_product_matches_closed_form(p, n):
    d = derive(p)
    fs = fock.build_fock_set(p, 24)
    got = fock.product_of_uncertainties(fock.basis_state(n, 24), fs)
    assert math.isclose(got, analytic.uncertainty_product(d, n), rel_tol=1e-10)
    assert got >= analytic.minimum_bound(d) * (1 - 1e-12)
    assert analytic.minimum_bound(d) >= p.hbar / 2 * (1 - 1e-15)


@settings(max_examples=40, deadline=None)
@given(params(), st.floats(0, 3), st.floats(-10, 10), st.floats(0, 20))
def test_coherent_evolution_matches_trajectory(p, r, phi, t):
    d = derive(p)
    a = CoherentParams(r, phi)
    fs = fock.build_fock_set(p, 64)
    v = fock.evolve(fock.coherent_vector(a, 64), d, t)
    ref = analytic.coherent_trajectory(d, a, t)
    scale = 1 + abs(ref.x) + abs(ref.p)
    assert abs(fock.expectation(v, fs.x).real - ref.x) < 1e-9 * scale
    assert abs(fock.expectation(v, fs.p).real - ref.p) < 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8).filter(lambda c: np.linalg.norm(c) > 1e-3),
       params())
def test_heisenberg_floor(coeffs, p):
    v = np.zeros(20, dtype=complex)
    v[:8] = coeffs
    v /= np.linalg.norm(v)
    fs = fock.build_fock_set(p, 20)
    assert fock.product_of_uncertainties(v, fs) >= p.hbar / 2 * (1 - 1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.integers(0, 60))
def test_hermite_function_parity(xi, n):
    h = hermite_functions(n, np.array([xi, -xi]))
    assert h[n, 1] == (-1) ** n * h[n, 0] or math.isclose(h[n, 1], (-1) ** n * h[n, 0],
                                                          rel_tol=1e-13, abs_tol=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 4), st.floats(-100, 100))
def test_phase_canonical(r, phi):
    a = CoherentParams(r, phi)
    assert 0 <= a.phase < 2 * math.pi
    assert abs(a.alpha - r * complex(math.cos(phi), math.sin(phi))) < 1e-9 * (1 + r)
