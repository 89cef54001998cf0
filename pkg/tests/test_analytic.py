import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from kpospec.analytic import (
    TRANSITIONS,
    analytic_transition_frequencies,
    dressed_model,
    four_level_hamiltonian,
    four_level_oracle,
    mixing_delta,
    oracle_transition_frequencies,
)
from kpospec.eigensystem import labeled_at
from kpospec.operators import KpoParams, mhz

CHI = mhz(17.0)


def test_zero_drive_frequencies():
    f = analytic_transition_frequencies(mhz(8.2), CHI, 0.0)
    assert f == {"10": mhz(8.2), "01": -mhz(8.2), "12": mhz(8.2), "21": -mhz(8.2)}


def test_four_level_hamiltonian_is_truncated_full_hamiltonian():
    from kpospec.operators import hamiltonian_rwa

    p = KpoParams(delta=mhz(3.0), chi=CHI, kappa_e=0.0, kappa_i=0.0, dim=6)
    full = hamiltonian_rwa(p, mhz(2.0))[:4, :4].real
    assert_allclose(four_level_hamiltonian(mhz(3.0), CHI, mhz(2.0)), full, atol=1e-12)


def test_mixing_delta_matches_naive_form():
    beta = mhz(3.0)
    naive = (CHI - np.sqrt(CHI**2 + 6 * beta**2)) / (np.sqrt(6) * beta)
    assert mixing_delta(beta, CHI) == pytest.approx(naive, rel=1e-12)
    assert mixing_delta(0.0, CHI) == 0.0
    assert mixing_delta(1e-9, CHI) < 0


def test_dressed_states_diagonalize_stark_block():
    model = dressed_model(mhz(2.5), CHI)
    h = model.stark_hamiltonian()
    s1, s3 = model.dressed_states()
    assert_allclose(h @ s1, model.stark_exact_1 * s1, atol=1e-9)
    assert_allclose(h @ s3, model.stark_exact_3 * s3, atol=1e-9)


def test_dressed_model_validation():
    with pytest.raises(ValueError):
        dressed_model(1.0, 0.0)
    with pytest.raises(ValueError):
        dressed_model(-1.0, CHI)


@settings(max_examples=50, deadline=None)
@given(beta_mhz=st.floats(0, 17.0 / 4))
def test_stark_approximation_error_bound(beta_mhz):
    beta = mhz(beta_mhz)
    m = dressed_model(beta, CHI)
    bound = 4.5 * beta**4 / CHI**3 * 1.1 + 1e-12
    assert abs(m.stark_approx_1 - m.stark_exact_1) <= bound
    assert abs(m.stark_approx_3 - m.stark_exact_3) <= bound


@settings(max_examples=30, deadline=None)
@given(beta_mhz=st.floats(0.01, 3.0))
def test_resonant_analytic_agrees_with_oracle(beta_mhz):
    beta = mhz(beta_mhz)
    ana = analytic_transition_frequencies(0.5 * CHI, CHI, beta)
    ora = oracle_transition_frequencies(0.5 * CHI, CHI, beta)
    for t in TRANSITIONS:
        assert abs(ana[t] - ora[t]) <= 4.5 * beta**4 / CHI**3 * 1.1 + 1e-9


def test_oracle_close_to_full_model_at_small_drive():
    # |2> also couples to |4>, which the four-level model drops: keep beta small
    delta, beta = mhz(8.2), mhz(0.2)
    ora = oracle_transition_frequencies(delta, CHI, beta)
    sys = labeled_at(KpoParams(delta=delta, chi=CHI, kappa_e=0.0, kappa_i=0.0), beta)
    e = sys.energies
    assert ora["10"] == pytest.approx(e[1] - e[0], abs=mhz(0.01))
    assert ora["21"] == pytest.approx(e[2] - e[1], abs=mhz(0.01))


def test_oracle_eigenvalues_sorted():
    w, v = four_level_oracle(mhz(1.0), CHI, mhz(1.0))
    assert np.all(np.diff(w) >= 0)
    assert_allclose(v.T @ v, np.eye(4), atol=1e-12)


def test_frozen_values_at_one_mhz():
    # unit-agnostic formulas evaluated directly in MHz
    m = dressed_model(1.0, 17.0)
    assert m.stark_exact_1 == pytest.approx(-8.5 + 17 * np.sqrt(1 + 6 / 289), abs=1e-12)
    assert m.stark_exact_1 == pytest.approx(8.6756, abs=5e-5)
    assert m.stark_approx_1 == pytest.approx(8.5 + 3 / 17, abs=1e-12)
    assert m.mixing_delta == pytest.approx((17 - np.sqrt(295)) / np.sqrt(6), rel=1e-12)
    assert m.mixing_delta == pytest.approx(-0.0717, abs=5e-5)
    f = analytic_transition_frequencies(8.2, 17.0, 1.0)
    assert f["10"] == pytest.approx(6.962, abs=5e-4)


def test_zero_drive_limits():
    m = dressed_model(0.0, 17.0)
    assert (m.rabi_split, m.mixing_delta, m.stark_exact_1) == (0.0, 0.0, 8.5)
    w, _ = four_level_oracle(8.2, 17.0, 0.0)
    assert_allclose(w, np.sort([0.0, 8.2, 2 * 8.2 - 17, 3 * 8.2 - 51]), atol=1e-12)


def test_dressed_states_orthonormal():
    s1, s3 = dressed_model(4.0, 17.0).dressed_states()
    assert abs(s1 @ s1 - 1) < 1e-12 and abs(s3 @ s3 - 1) < 1e-12 and abs(s1 @ s3) < 1e-12
