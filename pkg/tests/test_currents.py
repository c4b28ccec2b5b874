import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from srcurrent.analytic import classify_phase, critical_delta, normal_solution, steady_state, steady_symmetric
from srcurrent.currents import (
    bond_current,
    bond_currents,
    dissipation_current,
    kirchhoff_audit,
    spin_cavity_currents,
    total_current,
)
from srcurrent.meanfield import integrate, make_rhs
from srcurrent.model import SystemParams, ladder_params, with_delta
from srcurrent.states import MeanFieldState, Phase


def state_strategy(n=3):
    c = st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False)
    return st.builds(
        lambda a, th, ph: MeanFieldState(a, 0.5 * math.sin(th) * math.cos(ph),
                                         0.5 * math.sin(th) * math.sin(ph), 0.5 * math.cos(th)),
        st.lists(c, min_size=n, max_size=n), st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def test_bond_current_definition(ladder):
    # <i J (a_n^* a_{n+1} - a_n a_{n+1}^*)>, computed literally
    a = steady_state(ladder).state.alphas
    j = ladder.hopping
    literal = [(1j * j * (np.conj(a[n]) * a[(n + 1) % 3] - a[n] * np.conj(a[(n + 1) % 3]))).real
               for n in range(3)]
    assert np.allclose(bond_currents(steady_state(ladder), ladder), literal, atol=1e-16)
    assert bond_current(steady_state(ladder), ladder, 1) == pytest.approx(literal[1], abs=1e-16)


def test_equal_amplitudes_carry_no_current(symmetric_ring):
    assert np.all(bond_currents(steady_symmetric(symmetric_ring), symmetric_ring) == 0)


def test_real_amplitudes_carry_no_current(ladder):
    s = MeanFieldState([0.1, -0.3, 0.2], 0.1, 0.0, -0.3)
    assert np.all(bond_currents(s, ladder) == 0)


def test_sign_pattern(ladder):
    b = bond_currents(steady_state(ladder), ladder)
    assert b[0] > 0 and b[1] > 0 and b[2] < 0
    assert np.allclose(b, [0.03353788, 0.00372643, -0.01863216], atol=1e-8)


def test_total_current_profile_in_delta(ladder):
    dc = critical_delta(ladder)
    deltas = np.linspace(0, 1.0, 101)
    tot = np.array([total_current(steady_state(with_delta(ladder, d)), ladder) for d in deltas])
    assert tot[0] == 0
    assert np.all(tot[deltas > dc] == 0)
    inside = tot[(deltas > 0) & (deltas < dc)]
    assert np.all(inside > 0)
    peak = np.argmax(inside)
    assert 0 < peak < inside.size - 1


def test_spin_currents_equal_at_steady_state(ladder):
    rw, crw = zip(*[spin_cavity_currents(steady_state(ladder), ladder, n) for n in range(3)])
    assert np.allclose(rw, crw, atol=1e-16)
    s = steady_state(ladder).state
    assert np.allclose(rw, -2 * ladder.coupling * s.x * s.alphas.imag, atol=1e-16)


def test_symmetric_spin_currents_equal_and_nonzero(symmetric_ring):
    rw = [spin_cavity_currents(steady_symmetric(symmetric_ring), symmetric_ring, n)[0] for n in range(3)]
    assert rw[0] != 0 and np.ptp(rw) == 0


def test_normal_phase_all_zero(ladder):
    rep = kirchhoff_audit(normal_solution(ladder), ladder)
    for field in ("bond", "spin_rw", "spin_crw", "dissipation", "kirchhoff_residuals",
                  "spin_node_residuals"):
        assert all(v == 0 for v in getattr(rep, field))
    assert rep.passed


def test_dissipation_example(symmetric_ring):
    sol = steady_symmetric(symmetric_ring, branch=-1)
    assert dissipation_current(sol, symmetric_ring, 0) == pytest.approx(0.086463, abs=2e-6)
    assert dissipation_current(sol, symmetric_ring.replace(cavity_loss=0.0), 0) == 0


@pytest.mark.parametrize("delta, g", [(0.0, 0.35), (0.2, 0.35), (0.5, 0.35), (0.3, 0.6)])
def test_kirchhoff_at_steady_states(ladder, delta, g):
    p = with_delta(ladder, delta).replace(coupling=g)
    rep = kirchhoff_audit(steady_state(p), p)
    assert rep.steady and rep.passed
    assert max(map(abs, rep.kirchhoff_residuals)) < 1e-10
    assert max(map(abs, rep.spin_node_residuals)) < 1e-10
    # summing the node laws cancels the bonds
    assert sum(rep.spin_rw) + sum(rep.spin_crw) == pytest.approx(sum(rep.dissipation), abs=1e-12)
    assert rep.total == pytest.approx(sum(rep.bond), abs=0)


@given(state_strategy())
def test_node_residual_is_photon_rate(s):
    p = ladder_params(0.1, 0.5, 0.2, 0.35, 0.3)
    rep = kirchhoff_audit(s, p)
    d = make_rhs(p)(0.0, s.to_vector())
    rate = 2 * (s.alphas.real * d[:3] + s.alphas.imag * d[3:6])
    assert np.allclose(rep.kirchhoff_residuals, rate, rtol=0, atol=1e-10)
    assert not rep.violations


def test_node_residual_along_trajectory(ladder):
    # finite differences of |alpha_n|^2 in time
    t = np.arange(1, 40, 0.5)
    h = 1e-4
    times = np.sort(np.r_[t - h, t, t + h])
    tr = integrate(MeanFieldState.seed(3), ladder, 40.0, tol=1e-12, atol=1e-15, t_eval=times)
    n2 = np.abs(tr.alphas[1:]) ** 2
    for k in range(t.size):
        rate = (n2[3 * k + 2] - n2[3 * k]) / (2 * h)
        rep = kirchhoff_audit(tr.state(3 * k + 2), ladder)
        assert not rep.steady
        assert np.allclose(rep.kirchhoff_residuals, rate, atol=1e-7)


def test_flow_runs_from_low_to_high_frequency(rng):
    base = ladder_params(0.1, 0.0, 0.2, 0.35, 0.3)
    n_ok = 0
    while n_ok < 10:
        d, g = rng.uniform(0.02, 1.0), rng.uniform(0.3, 0.7)
        p = with_delta(base, d).replace(coupling=g)
        if classify_phase(p) != Phase.SUPERRADIANT:
            continue
        b = bond_currents(steady_state(p), p)
        # net outflow from cavity 1 (lowest) and net inflow into cavity 3 (highest)
        assert b[0] - b[2] > 0
        assert b[1] - b[2] > 0
        n_ok += 1


def test_not_chiral(ladder):
    dc = critical_delta(ladder)
    for d in np.linspace(0.05, dc - 0.01, 12):
        b = bond_currents(steady_state(with_delta(ladder, d)), ladder)
        assert np.sign(b[0]) == np.sign(b[1]) == -np.sign(b[2])


@given(state_strategy())
def test_parity_leaves_currents_alone(s):
    p = ladder_params(0.1, 0.5, 0.2, 0.35, 0.3)
    a, b = kirchhoff_audit(s, p), kirchhoff_audit(s.negated(), p)
    for field in ("bond", "spin_rw", "spin_crw", "dissipation"):
        assert np.allclose(getattr(a, field), getattr(b, field), rtol=0, atol=1e-15)


def test_report_serialization(ladder):
    rep = kirchhoff_audit(steady_state(ladder), ladder)
    d = json.loads(rep.to_json())
    assert d["bond"] == rep.bond and d["params"]["hopping"] == 0.2
    rows = rep.to_csv().splitlines()
    assert rows[0].startswith("# params:")
    assert len(rows) == 2 + 3 + 1 and rows[-1].startswith("total,")
