import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauli_rmt.analytics import (
    empirical_failure_prob,
    leading_vbar,
    markov_shots,
    predict,
    predict_gue,
    rephys_excess,
    rephysicalize,
    water_fill,
)
from pauli_rmt.pauli import HermiticityError
from pauli_rmt.states import StateModel

from oracles import random_density, simplex_projection


def _with_spectrum(evals, seed=0):
    d = len(evals)
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((d, d)) + 0j)
    return (q * np.asarray(evals, dtype=float)) @ q.conj().T


def test_predict_naive_headline():
    s = 10_000
    p = predict("naive", None, 10, s, mode="leading")
    assert p.radius == pytest.approx(2 / np.sqrt(s))
    assert p.mean_trace_norm / 2**10 == pytest.approx(8 / (3 * math.pi * 100), rel=1e-12)
    assert p.mean_trace_norm / 2**10 == pytest.approx(8.4883e-3, rel=1e-4)
    assert p.var_trace_norm == pytest.approx(4.0528e-5, rel=1e-4)


def test_predict_qwc_headline():
    p = predict("qwc", None, 10, 10_000, mode="leading")
    assert p.mean_trace_norm == pytest.approx(8 / (3 * math.pi * 100) * (10 / 3) ** 5, rel=1e-12)
    assert p.mean_trace_norm == pytest.approx(3.494, rel=1e-3)


def test_predict_exact_close_to_leading():
    for proto in ("naive", "qwc"):
        ex = predict(proto, StateModel.identity(8), 8, 1000)
        lead = predict(proto, None, 8, 1000, mode="leading")
        assert ex.radius == pytest.approx(lead.radius, rel=0.05)


@pytest.mark.parametrize("proto", ["naive", "qwc"])
@pytest.mark.parametrize("mode", ["exact", "leading"])
def test_prediction_moment_identity(proto, mode):
    n = 5
    p = predict(proto, StateModel.ghz(n), n, 500, mode=mode)
    d = 2**n
    assert p.var_trace_norm * 16 * d * d / (9 * p.mean_trace_norm**2) == pytest.approx(1.0, rel=1e-14)


def test_predict_errors():
    with pytest.raises(ValueError):
        predict("naive", None, 3, 10)
    with pytest.raises(ValueError):
        predict("naive", StateModel.identity(2), 3, 10)
    with pytest.raises(ValueError):
        leading_vbar("other", 2, 10)


def test_predict_gue_radius():
    p = predict_gue(64, 1 / 64)
    assert p.radius == pytest.approx(2.0)
    assert p.mean_trace_norm == pytest.approx(4 * 64 * 2 / (3 * math.pi))


def test_markov_shots():
    est = markov_shots(0.1, 0.5, 2)
    expected = (8 / (3 * math.pi * 0.05)) ** 2 * (10 / 3) ** 2
    assert est.shots_per_setting == pytest.approx(expected, rel=1e-14)
    assert est.shots_per_setting == pytest.approx(3202.25, abs=0.01)
    assert est.total_copies == pytest.approx(9 * est.shots_per_setting)
    assert markov_shots(0.2, 0.5, 2).shots_per_setting == pytest.approx(expected / 4)
    assert markov_shots(0.1, 0.5, 3).total_copies / est.total_copies == pytest.approx(10)
    with pytest.raises(ValueError):
        markov_shots(0, 0.5, 2)
    with pytest.raises(ValueError):
        markov_shots(0.1, 1.0, 2)


def test_failure_prob_extremes():
    norms = np.random.default_rng(0).uniform(1, 2, 100)
    assert empirical_failure_prob(norms, 0.0).probability == 1
    assert empirical_failure_prob(norms, 2 * norms.max()).probability == 0
    with pytest.raises(ValueError):
        empirical_failure_prob(norms[:10], 1.0)


def test_failure_prob_bounds_bracket():
    norms = np.random.default_rng(1).gamma(20, 0.05, 500)
    e = norms.mean()
    f = empirical_failure_prob(norms, e / 2)
    assert f.pz_floor <= f.probability <= f.markov_bound
    assert f.ci_low <= f.probability <= f.ci_high
    f2 = empirical_failure_prob(norms, 2 * e)
    assert f2.pz_floor == 0 and f2.markov_bound == pytest.approx(0.5)


@pytest.mark.parametrize(
    "spec, fixed",
    [((0.6, 0.5, -0.1), (0.55, 0.45, 0.0)), ((1.2, -0.1, -0.1), (1.0, 0.0, 0.0))],
)
def test_water_fill_hand_oracles(spec, fixed):
    np.testing.assert_allclose(water_fill(spec), fixed, atol=1e-15)
    h = _with_spectrum(spec)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rephysicalize(h))), np.sort(fixed), atol=1e-12)


def test_rephys_excess_hand_oracle():
    assert rephys_excess(_with_spectrum((0.6, 0.5, -0.1))) == pytest.approx(0.2, abs=1e-12)


def test_psd_input_is_fixed_point():
    rho = random_density(np.random.default_rng(2), 6)
    np.testing.assert_allclose(rephysicalize(rho), rho, atol=1e-12)
    assert rephys_excess(rho) == 0


def test_rephys_requires_unit_trace():
    with pytest.raises(HermiticityError):
        rephysicalize(np.eye(2))


@given(st.lists(st.floats(-0.5, 1.0), min_size=2, max_size=12))
def test_water_fill_is_simplex_projection(raw):
    mu = np.array(raw)
    mu += (1 - mu.sum()) / mu.size
    out = water_fill(mu)
    np.testing.assert_allclose(out, simplex_projection(mu), atol=1e-12)
    assert np.all(out >= 0) and out.sum() == pytest.approx(1, abs=1e-12)


def _noisy_state(rng, d, scale):
    rho = random_density(rng, d, rank=2)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    noise = scale * 0.5 * (g + g.conj().T)
    noise -= np.trace(noise) / d * np.eye(d)
    return rho + noise


@pytest.mark.parametrize("seed", range(10))
def test_rephys_invariants(seed):
    rng = np.random.default_rng(seed)
    h = _noisy_state(rng, 8, 0.05)
    out = rephysicalize(h)
    assert abs(np.trace(out).real - 1) <= 1e-10
    assert np.linalg.eigvalsh(out)[0] >= -1e-12
    comm = out @ h - h @ out
    assert np.linalg.norm(comm) <= 1e-8 * np.linalg.norm(h)
    # excess equals twice the negative mass shifted away
    neg = -np.sum(np.clip(np.linalg.eigvalsh(h), None, 0))
    assert rephys_excess(h) >= 2 * neg - 1e-12


def test_projection_is_frobenius_closest():
    rng = np.random.default_rng(5)
    d = 6
    for _ in range(5):
        h = _noisy_state(rng, d, 0.08)
        best = np.linalg.norm(rephysicalize(h) - h)
        for _ in range(100):
            sigma = random_density(rng, d, rank=int(rng.integers(1, d + 1)))
            assert best <= np.linalg.norm(sigma - h) + 1e-12
