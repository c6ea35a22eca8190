import json
import math

import numpy as np
import pytest

from coupled_oscillator import harness
from coupled_oscillator.analytic import CoherentParams
from coupled_oscillator.cli import RunConfig
from coupled_oscillator.errors import CouplingTooStrong
from coupled_oscillator.params import OscillatorParams


def test_pass_rule_is_relative_above_one():
    assert harness.passes(1000.0, 1000.9, 1e-3)
    assert not harness.passes(1000.0, 1001.1, 1e-3)
    assert harness.passes(0.0, 1e-4, 1e-4)
    assert not harness.passes(0.0, 2e-4, 1e-4)


def test_check_result_audit_and_routes():
    c = harness.CheckResult.make("x", "grid", 1.0, 1.0005, 1e-3)
    assert c.passed and c.audit()
    forged = harness.CheckResult("x", "grid", 1.0, 2.0, 1e-3, True)
    assert not forged.audit()
    with pytest.raises(ValueError):
        harness.CheckResult.make("x", "lattice", 0, 0, 0)


def test_report_serialization():
    r = harness.Report(params={"mu": [0.6]})
    r.checks.append(harness.CheckResult.make("a", "fock", 0.1, 0.1, 1e-10))
    r.checks.append(harness.CheckResult.make("b", "grid", 1.0, 3.0, 1e-3))
    assert r.summary == {"total": 2, "passed": 1, "failed": 1}
    assert not r.all_passed
    data = json.loads(r.to_json())
    assert data["checks"][1]["passed"] is False
    lines = r.to_csv().splitlines()
    assert lines[0] == "name,route,expected,observed,tolerance,passed"
    assert lines[1] == "a,fock,0.1,0.1,1e-10,true"


def test_random_superpositions_normalized_and_seeded():
    s1 = harness.random_superpositions(np.random.default_rng(42), 50, 8, 20)
    s2 = harness.random_superpositions(np.random.default_rng(42), 50, 8, 20)
    assert np.array_equal(s1, s2)
    assert np.allclose(np.linalg.norm(s1, axis=1), 1, atol=1e-15)
    assert np.all(s1[:, 8:] == 0)


@pytest.mark.parametrize("mu", [0.0, 0.6])
def test_verify_spectrum_and_uncertainty_pass(mu):
    p = OscillatorParams(mu=mu)
    checks = harness.verify_spectrum(p)
    checks2, exploration = harness.verify_uncertainty(p, alpha_set=(CoherentParams(2.0),))
    assert all(c.passed for c in checks + checks2)
    assert exploration["samples"] == 1000 and exploration["levels"] == 8
    assert exploration["minProduct"] >= 0.5


def test_family_minimum_is_bound():
    p = OscillatorParams(mu=0.6)
    checks, _ = harness.verify_uncertainty(p, n_max=8)
    fam = [c for c in checks if c.name.endswith("family_minimum")][0]
    assert fam.expected == pytest.approx(0.625, abs=1e-15)
    assert fam.passed


def test_uncertainty_rejects_large_n_max():
    with pytest.raises(ValueError):
        harness.verify_uncertainty(OscillatorParams(), n_max=13)


def test_phase_factor_values():
    checks = harness.verify_phase_factor(OscillatorParams(mu=0.6), levels=(0,))
    by = {c.name.rsplit("/", 1)[1]: c for c in checks}
    assert by["var_p_chirped"].expected == pytest.approx(0.625)
    assert by["var_p_stripped"].expected == pytest.approx(0.4)
    assert all(c.passed for c in checks)


def test_dynamics_erratum_and_pass():
    p = OscillatorParams(mu=0.6)
    checks, err = harness.verify_dynamics(p, CoherentParams(2.0, 0.0), samples=50)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]
    assert err["maxDeviation"] == pytest.approx(2.372, rel=1e-3)
    assert err["spuriousAmplitude"] == pytest.approx(3 * math.sqrt(0.625), rel=1e-12)
    assert err["t0Mismatch"] == pytest.approx(0.0, abs=1e-15)  # phi = 0
    assert len(err["t"]) == len(err["deviation"]) == 50


def test_erratum_t0_mismatch_with_phase():
    p = OscillatorParams(mu=0.6)
    _, err = harness.verify_dynamics(p, CoherentParams(2.0, math.pi / 2), samples=10)
    # printed form disagrees with the static mean at t = 0 when mu sin(phi) != 0
    assert abs(err["t0Mismatch"]) == pytest.approx(err["spuriousAmplitude"], rel=1e-12)


def test_dynamics_horizon_bound():
    with pytest.raises(ValueError):
        harness.verify_dynamics(OscillatorParams(), CoherentParams(1.0), horizon=100.0)


def test_convergence_ratios_near_four():
    r = harness.convergence_ratios(OscillatorParams(mu=0.3), n_levels=3)
    assert np.all(np.abs(r - 4) < 0.5)


def test_properties_pass():
    assert all(c.passed for c in harness.verify_properties(OscillatorParams(mu=0.9)))


def test_hermite_orthonormality_check():
    (c,) = harness.verify_hermite_orthonormality()
    assert c.passed and c.observed < 1e-12


def test_run_all_small_config_deterministic():
    cfg = RunConfig(mus=(0.0, 0.6), n_max=4, samples=20)
    a = harness.run_all(cfg)
    b = harness.run_all(cfg)
    assert a.all_passed
    assert a.to_json() == b.to_json()
    assert all(c.audit() for c in a.checks)
    assert [e["mu"] for e in a.erratum] == [0.0, 0.6]
    assert a.erratum[0]["maxDeviation"] == 0.0 or a.erratum[0]["maxDeviation"] < 1e-12


def test_run_all_labels_bad_mu_entry():
    with pytest.raises(CouplingTooStrong, match="mu entry #1"):
        harness.run_all(RunConfig(mus=(0.2, 1.2)))
