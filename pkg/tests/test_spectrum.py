import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import device
from kpospec.eigensystem import TransitionTable, labeled_at, transition_table
from kpospec.errors import ConsistencyError, SingularTermError
from kpospec.fitting import predict_nominal_losses
from kpospec.operators import mhz
from kpospec.spectrum import (
    XiTerm,
    driven_point,
    nominal_external,
    reflection_driven,
    reflection_from_table,
    reflection_undriven,
    simulate,
    spectrum_from_points,
    visible_transitions,
    xi_term,
)
from kpospec.steadystate import solve_steady_state

PROBE = mhz(np.linspace(-30, 30, 241))


@pytest.fixture(scope="module")
def plus_point():
    p = device(8.2)
    return p, driven_point(p, labeled_at(p, mhz(7.4)))


def test_undriven_on_resonance_value():
    p = device(8.2)
    # 1 - ke / (kappa/2) = 1 - 0.27/0.36
    assert reflection_undriven(p.delta, p.delta, p) == pytest.approx(0.25)
    far = reflection_undriven(mhz(1e6), p.delta, p)
    assert abs(far - 1) < 1e-6


def test_xi_term_by_hand(plus_point):
    p, pt = plus_point
    t = pt.table
    m, n = 1, 0
    w = mhz(3.0)
    expected = (
        p.kappa_e * abs(t.x[m, n]) ** 2 * (t.populations[m] - t.populations[n])
        / (1j * (w - t.omega[m, n]) + 0.5 * p.kappa_total * (t.y[m] + t.y[n]))
    )
    assert xi_term(t, m, n, w, p).value == pytest.approx(expected, rel=1e-13)


def test_reflection_is_one_plus_sum_of_terms(plus_point):
    p, pt = plus_point
    t = pt.table
    total = 1.0 + sum(xi_term(t, m, n, PROBE, p).value for m, n in t.pairs())
    assert_allclose(reflection_from_table(PROBE, t, p), total, atol=1e-13)


def test_reflection_driven_matches_table(plus_point):
    p, pt = plus_point
    g = reflection_driven(PROBE, pt.system, pt.steady, p)
    assert_allclose(g, reflection_from_table(PROBE, pt.table, p), atol=0)


def test_term_antisymmetry(plus_point):
    p, pt = plus_point
    t = pt.table
    for m, n in t.pairs():
        a, b = xi_term(t, m, n, 0.0, p), xi_term(t, n, m, 0.0, p)
        assert a.resonance == -b.resonance
        assert a.linewidth == b.linewidth
        dpop = t.populations[m] - t.populations[n]
        assert a.weight == pytest.approx(p.kappa_e * abs(t.x[m, n]) ** 2 * dpop, abs=1e-15)


def test_needs_populations():
    sys = labeled_at(device(8.2), 0.0)
    with pytest.raises(ConsistencyError):
        reflection_from_table(0.0, transition_table(sys), device(8.2))


def test_singular_term():
    term = XiTerm(1, 0, weight=1.0, resonance=0.0, linewidth=0.0, value=0j)
    with pytest.raises(SingularTermError):
        term.evaluate(0.0)
    table = TransitionTable(
        beta=0.0,
        omega=np.array([[0.0, -1.0], [1.0, 0.0]]),
        x=np.array([[0.0, 0.0], [1.0, 0.0]]),
        y=np.zeros(2),
        populations=np.array([1.0, 0.0]),
    )
    with pytest.raises(SingularTermError):
        reflection_from_table(1.0, table, device(0.0))


def test_amplification_near_dressed_transition(plus_point):
    p, pt = plus_point
    w10 = pt.table.omega[1, 0]
    probe = np.linspace(w10 - mhz(2), w10 + mhz(2), 801)
    assert np.abs(reflection_from_table(probe, pt.table, p)).max() > 1.0


def test_spectrum_grid_shape_and_order():
    p = device(-8.1)
    points = simulate(p, mhz(np.array([0.0, 0.5, 1.0])))
    grid = spectrum_from_points(points, PROBE, p)
    assert grid.gamma.shape == (3, len(PROBE))
    with pytest.raises(ValueError):
        spectrum_from_points(points, PROBE[::-1], p)


def test_visibility_at_zero_drive_only_fundamental():
    p = device(8.2)
    report = visible_transitions(simulate(p, [0.0]), p)
    assert report.pairs == {(1, 0)}
    assert report.transitions[0].kinds == {"dip"}


def test_sign_rule_matches_classification():
    p = device(8.2)
    points = simulate(p, mhz(np.array([0.0, 4.0, 7.4])))
    report = visible_transitions(points, p)
    for rec in report.transitions:
        for beta in rec.betas:
            pt = next(x for x in points if x.beta == beta)
            pred = predict_nominal_losses(pt.table, p, [rec.pair])[0]
            kind = "peak" if pred.kappa_e_pred < 0 else "dip"
            assert kind in rec.kinds


@settings(max_examples=15, deadline=None)
@given(delta=st.floats(-10, 10), beta=st.floats(0, 10))
def test_loss_only_spectrum_is_passive_without_inversion(delta, beta):
    # Gamma can only exceed 1 if some higher label holds more population than a lower partner.
    p = device(delta, dim=20)
    pt = driven_point(p, labeled_at(p, mhz(beta), step=mhz(0.1)))
    k = nominal_external(pt.table, p)
    g = np.abs(reflection_from_table(PROBE, pt.table, p))
    if np.all(k >= 0):
        assert g.max() <= 1.0 + 1e-9


@pytest.mark.parametrize("delta", [8.2, 0.05, -8.1])
def test_zero_drive_reduction_wide_window(delta):
    p = device(delta)
    probe = mhz(np.linspace(-20, 20, 2001))
    g = reflection_driven(probe, labeled_at(p, 0.0), solve_steady_state(p, 0.0), p)
    assert np.max(np.abs(g - reflection_undriven(probe, p.delta, p))) < 1e-9
