import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravclock.classical import (
    EVERYWHERE_STATIONARY,
    ClassicalState,
    clock_rate,
    energy,
    force,
    hamilton_step,
    integrate,
    stationary_point,
)
from gravclock.errors import InvalidInput, NonFinite, NoStationaryPoint
from gravclock.model import CancellingLinear, Constants, HardFloor, Harmonic, Zero

C = Constants.dimensionless()


def test_clock_rate_terms():
    assert clock_rate(0.0, 0.0, C) == 1.0
    assert clock_rate(5.0, 0.0, C) == pytest.approx(1.05)
    assert clock_rate(0.0, 1.0, C) == pytest.approx(1 - 1 / 200)


def test_stationary_points():
    assert stationary_point(Harmonic(3.0, 2.0), 0.0, C) == pytest.approx(3.0 - 0.25)
    assert stationary_point(CancellingLinear(), 0.1, C) is EVERYWHERE_STATIONARY
    with pytest.raises(NoStationaryPoint):
        stationary_point(Zero(), 0.0, C)
    with pytest.raises(NoStationaryPoint):
        stationary_point(HardFloor(), 0.0, C)


def test_cancelling_force_vanishes_everywhere():
    assert all(force(CancellingLinear(), 0.3, C, x) == 0.0 for x in (-1e3, 0.0, 7.0))


def test_free_fall_matches_closed_form():
    # leapfrog is exact for constant force
    traj = integrate(ClassicalState(0.0, 1.0), 0.0, Zero(), C, 1e-2, 300, 300)
    t = 3.0
    assert traj.final.x == pytest.approx(t - 0.5 * t * t, abs=1e-12)
    assert traj.final.p == pytest.approx(1.0 - t, abs=1e-12)
    assert traj.final.t == 3.0


def test_bounce_period():
    # drop from h = 1, g = 1: period 2 sqrt(2 h / g)
    traj = integrate(ClassicalState(1.0, 0.0), 0.0, HardFloor(0.0), C, 1e-4, 60_000, 1)
    p = traj.p
    ups = np.flatnonzero((p[:-1] < 0) & (p[1:] > 0))
    bounces = traj.t[ups]
    assert len(bounces) >= 2
    assert np.diff(bounces)[0] == pytest.approx(2 * math.sqrt(2), abs=1e-4)
    assert np.all(traj.x >= 0.0)


def test_energy_conservation_harmonic():
    spec = Harmonic(0.0, 1.0)
    traj = integrate(ClassicalState(2.0, 0.5), 0.1, spec, C, 1e-3, 50_000, 500)
    e = np.array([energy(s, 0.1, spec, C) for s in traj.states])
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-6


def test_second_order_convergence():
    spec = Harmonic(0.0, 1.0)
    exact = integrate(ClassicalState(1.0, 0.0), 0.0, spec, C, 1e-5, 200_000, 200_000).final
    errs = []
    for dt in (2e-2, 1e-2):
        n = int(round(2.0 / dt))
        f = integrate(ClassicalState(1.0, 0.0), 0.0, spec, C, dt, n, n).final
        errs.append(abs(f.x - exact.x))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_phase_additivity():
    spec = Harmonic(1.0, 1.3)
    start = ClassicalState(0.4, 0.2)
    whole = integrate(start, 0.2, spec, C, 1e-3, 4000, 4000).final
    half = integrate(start, 0.2, spec, C, 1e-3, 2000, 2000).final
    rest = integrate(half, 0.2, spec, C, 1e-3, 2000, 2000).final
    assert rest.phi == pytest.approx(whole.phi, rel=1e-12)
    assert rest.x == whole.x and rest.t == whole.t


@settings(max_examples=20, deadline=None)
@given(x=st.floats(-3, 3), p=st.floats(-2, 2), omega=st.floats(0.3, 3))
def test_time_reversibility(x, p, omega):
    spec = Harmonic(0.0, omega)
    f = integrate(ClassicalState(x, p), 0.1, spec, C, 1e-3, 2000, 2000).final
    b = integrate(ClassicalState(f.x, -f.p), 0.1, spec, C, 1e-3, 2000, 2000).final
    assert abs(b.x - x) < 1e-9 and abs(b.p + p) < 1e-9


def test_step_matches_integrate():
    spec = Harmonic(0.0, 1.0)
    s = ClassicalState(0.3, -0.1)
    one = hamilton_step(s, 0.1, spec, C, 1e-2)
    via = integrate(s, 0.1, spec, C, 1e-2, 1).final
    assert (one.x, one.p, one.t) == (via.x, via.p, via.t)
    assert one.phi == pytest.approx(via.phi, rel=1e-15)


def test_invalid_inputs():
    with pytest.raises(NonFinite):
        ClassicalState(math.nan, 0.0)
    with pytest.raises(InvalidInput):
        integrate(ClassicalState(0, 0), 0.0, Zero(), C, 0.0, 10)
    with pytest.raises(InvalidInput):
        integrate(ClassicalState(0, 0), 0.0, Zero(), C, 1e-3, 0)
