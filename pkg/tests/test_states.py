import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pauli_rmt import matrixio
from pauli_rmt.pauli import PauliString, synthesize
from pauli_rmt.states import (
    StateError,
    StateModel,
    build_state,
    density_matrix,
    pauli_coeffs,
    purity,
    setting_distribution,
)

from oracles import dense_coefficients, ghz_density, index_of, outcome_probs, random_density


def test_build_identity():
    s = build_state("identity", 3)
    assert s.variant == "identity" and s.dim == 8


def test_build_ghz_is_bell_pair():
    rho = density_matrix(build_state("ghz", 2))
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(rho, np.outer(psi, psi), atol=1e-15)


def test_build_random_pure_is_seeded():
    a = density_matrix(build_state("random-pure(5)", 3))
    b = density_matrix(build_state("random-pure(5)", 3))
    np.testing.assert_array_equal(a, b)
    assert abs(np.trace(a).real - 1) < 1e-12


def test_build_dense_rejects_non_psd(tmp_path):
    bad = np.diag([1.2, -0.2]).astype(complex)
    path = tmp_path / "bad.txt"
    matrixio.write_matrix(path, bad, 1)
    with pytest.raises(StateError):
        build_state(f"dense({path})", 1)


def test_build_dense_round_trip(tmp_path):
    rho = random_density(np.random.default_rng(0), 4)
    path = tmp_path / "rho.txt"
    matrixio.write_matrix(path, rho, 2)
    s = build_state(f"dense({path})", 2)
    np.testing.assert_array_equal(density_matrix(s), rho)
    with pytest.raises(StateError):
        build_state(f"dense({path})", 3)


def test_dense_clips_tiny_negative_eigenvalue():
    s = StateModel.dense(np.diag([1 + 5e-9, -5e-9]).astype(complex))
    assert np.min(np.linalg.eigvalsh(density_matrix(s))) >= 0


@pytest.mark.parametrize("spec", ["nope", "random-pure(x)", "dense()"])
def test_build_unknown(spec):
    with pytest.raises(ValueError):
        build_state(spec, 2)


def test_identity_coefficients():
    c = pauli_coeffs(StateModel.identity(3))
    assert c[0] == 1 and not np.any(c[1:])


def test_ghz2_coefficients():
    c = pauli_coeffs(StateModel.ghz(2))
    expect = {"II": 1, "XX": 1, "YY": -1, "ZZ": 1}
    for j in range(16):
        lab = PauliString.from_index(j, 2).label
        assert c[j] == expect.get(lab, 0), lab


@pytest.mark.parametrize("n", range(1, 7))
def test_ghz_fast_path_matches_dense(n):
    np.testing.assert_allclose(pauli_coeffs(StateModel.ghz(n)), dense_coefficients(ghz_density(n), n), atol=1e-12)


def test_random_pure_parseval():
    c = pauli_coeffs(build_state("random-pure(1)", 3))
    assert abs(np.sum(c**2) - 8) < 1e-10


@pytest.mark.parametrize("state, p", [(StateModel.identity(4), 1 / 16), (StateModel.ghz(5), 1.0)])
def test_purity(state, p):
    assert purity(state) == pytest.approx(p, abs=1e-15)


def test_purity_mixed():
    assert purity(StateModel.dense(np.diag([0.75, 0.25]).astype(complex))) == pytest.approx(5 / 8)


def test_coefficients_reconstruct_density():
    rho = random_density(np.random.default_rng(3), 8)
    s = StateModel.dense(rho)
    np.testing.assert_allclose(synthesize(s.coefficients) / 8, rho, atol=1e-10)


def test_setting_distribution_examples():
    p = setting_distribution(StateModel.identity(3), "XYZ").probabilities
    np.testing.assert_allclose(p, np.full(8, 1 / 8))
    p = setting_distribution(StateModel.ghz(3), "ZZZ").probabilities
    np.testing.assert_allclose(p, [0.5, 0, 0, 0, 0, 0, 0, 0.5], atol=1e-15)
    zero = StateModel.pure(np.array([1, 0], dtype=complex))
    np.testing.assert_allclose(setting_distribution(zero, "X").probabilities, [0.5, 0.5])


def test_setting_must_be_full_weight():
    with pytest.raises(StateError):
        setting_distribution(StateModel.identity(2), "XI")


def _states(n):
    rng = np.random.default_rng(n)
    psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    yield StateModel.ghz(n)
    yield StateModel.pure(psi / np.linalg.norm(psi))
    yield StateModel.dense(random_density(rng, 2**n, rank=2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_setting_distribution_matches_projectors(n):
    for state in _states(n):
        rho = density_matrix(state)
        for setting in itertools.product("XYZ", repeat=n):
            lab = "".join(setting)
            p = setting_distribution(state, lab).probabilities
            assert abs(p.sum() - 1) <= 1e-10
            np.testing.assert_allclose(p, outcome_probs(rho, lab), atol=1e-12)


@given(st.integers(1, 4), st.data())
@settings(max_examples=40, deadline=None)
def test_marginal_consistency(n, data):
    """The parity of outcomes on supp(P) averages to c_P in any setting that measures P."""
    setting = data.draw(st.text("XYZ", min_size=n, max_size=n))
    mask = data.draw(st.integers(0, 2**n - 1))
    label = "".join(ch if (mask >> (n - 1 - i)) & 1 else "I" for i, ch in enumerate(setting))
    state = list(_states(n))[data.draw(st.integers(0, 2))]
    p = setting_distribution(state, setting).probabilities
    parity = np.array([(-1) ** bin(b & mask).count("1") for b in range(2**n)])
    c = dense_coefficients(density_matrix(state), n)[index_of(label)]
    assert abs(p @ parity - c) <= 1e-10
