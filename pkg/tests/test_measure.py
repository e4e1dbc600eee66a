import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingboundary import lattice as lat
from isingboundary.measure import (BORN, Direction, MeasurementLayout, W_INF, Weight,
                                   direction_weight, hadamard_weight, local_state,
                                   outcome_weight, sample_layout)

angles = st.tuples(st.floats(0.05, math.pi - 0.05), st.floats(0.0, 2 * math.pi - 1e-9))


def test_direction_weight_axis_points():
    assert direction_weight(Direction(0.0, 0.0)).value == 0
    w = direction_weight(Direction(math.pi / 2, 0.0))
    assert abs(w.value - 1.0) < 1e-12
    wy = direction_weight(Direction(math.pi / 2, math.pi / 2))
    assert abs(wy.value - 1j) < 1e-12
    assert direction_weight(Direction(math.pi, 0.3)).is_inf


def test_outcome_weight_limits():
    w1 = Weight.of(1.0)
    assert abs(outcome_weight(w1, -1).value + 1.0) < 1e-12
    assert outcome_weight(Weight.of(0), -1).is_inf
    assert abs(outcome_weight(Weight.of(1j), -1).value + 1j) < 1e-12
    assert outcome_weight(W_INF, -1).value == 0


def test_local_state_values():
    assert np.allclose(local_state(Weight.of(0)), [1, 0])
    assert np.allclose(local_state(Weight.of(1)), np.array([1, 1]) / math.sqrt(2))
    assert np.allclose(local_state(W_INF), [0, 1])


def test_hadamard_weight_special_points():
    assert abs(hadamard_weight(Weight.of(1)).value) < 1e-15
    assert abs(hadamard_weight(Weight.of(0)).value - 1) < 1e-15
    assert hadamard_weight(Weight.of(-1)).is_inf
    assert abs(hadamard_weight(W_INF).value + 1) < 1e-15
    assert abs(hadamard_weight(Weight.of(3)).value + 0.5) < 1e-15


@settings(max_examples=100, deadline=None)
@given(re=st.floats(-5, 5), im=st.floats(-5, 5))
def test_hadamard_involution(re, im):
    W = Weight.of(complex(re, im))
    back = hadamard_weight(hadamard_weight(W))
    if back.is_inf:
        assert abs(complex(re, im) + 1) < 1e-9
    else:
        assert abs(back.value - W.value) < 1e-9 * max(1.0, abs(W.value))


@settings(max_examples=100, deadline=None)
@given(a=angles)
def test_outcome_states_orthonormal_and_complete(a):
    th, ph = a
    w = direction_weight(Direction(th, ph))
    plus = local_state(outcome_weight(w, +1))
    minus = local_state(outcome_weight(w, -1))
    assert abs(np.vdot(plus, minus)) < 1e-12
    proj = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    assert np.abs(proj - np.eye(2)).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(re=st.floats(-4, 4), im=st.floats(-4, 4))
def test_minus_outcome_involution(re, im):
    if abs(complex(re, im)) < 1e-6:
        return
    w = Weight.of(complex(re, im))
    again = outcome_weight(outcome_weight(w, -1), -1)
    assert abs(again.value - w.value) < 1e-9 * max(1.0, abs(w.value))


def test_measurement_state_matches_spherical_form():
    th, ph = 0.9, 2.3
    w = direction_weight(Direction(th, ph))
    plus = local_state(outcome_weight(w, +1))
    want = np.array([math.cos(th / 2), cmath.exp(1j * ph) * math.sin(th / 2)])
    assert np.allclose(plus, want)
    minus = local_state(outcome_weight(w, -1))
    want_m = np.array([math.sin(th / 2), -cmath.exp(1j * ph) * math.cos(th / 2)])
    # equal up to a global phase
    phase = np.vdot(want_m, minus)
    assert abs(abs(phase) - 1) < 1e-12
    assert np.allclose(minus, phase * want_m)


def test_forced_layout_and_determinism():
    spec = lat.LatticeSpec("square", 3, 3)
    layout = MeasurementLayout(theta_o=0.6, policy="forced+", seed=9)
    cl = sample_layout(layout, spec)
    assert all(cl.mu[s.index] == 1 for s in lat.bulk_sites(spec))
    layout = MeasurementLayout(theta_o=0.6, policy="random", seed=9)
    a = sample_layout(layout, spec, traj=3)
    b = sample_layout(layout, spec, traj=3)
    assert np.array_equal(a.mu, b.mu)
    c = sample_layout(layout, spec, traj=4)
    assert not np.array_equal(a.mu, c.mu)


def test_random_outcomes_balanced():
    spec = lat.LatticeSpec("square", 100, 101)
    layout = MeasurementLayout(theta_o=0.6, policy="random", seed=1)
    cl = sample_layout(layout, spec)
    mus = [cl.mu[s.index] for s in lat.bulk_sites(spec)]
    frac = sum(1 for m in mus if m == 1) / len(mus)
    assert abs(frac - 0.5) < 0.02


def test_born_rejected_outside_stabilizer():
    spec = lat.LatticeSpec("square", 3, 3)
    layout = MeasurementLayout(theta_o=0.6, policy=BORN, seed=1)
    with pytest.raises(ValueError):
        sample_layout(layout, spec)


def test_sign_randomization_flips_phi_only_on_coupling_sites():
    spec = lat.LatticeSpec("lieb", 4, 4)
    layout = MeasurementLayout(theta_o=0.5, phi_o=0.0, theta_b=0.8, phi_b=0.0,
                               policy="forced+", seed=3, sign_randomize_b=True)
    cl = sample_layout(layout, spec)
    phis = set()
    for s in lat.bulk_sites(spec):
        if lat.sublattice(spec, s) == lat.BULLET:
            phis.add(round(cl.phi[s.index], 6))
        else:
            assert cl.phi[s.index] == 0.0
    assert phis == {0.0, round(math.pi, 6)}


def test_weight_infinity_guards():
    assert W_INF.conj().is_inf
    assert math.isinf(W_INF.abs2())
    with pytest.raises(ValueError):
        W_INF.value
