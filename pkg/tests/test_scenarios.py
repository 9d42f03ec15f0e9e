from dataclasses import replace

import numpy as np
import pytest

from gravclock.errors import ConfigInvalid, NotFree
from gravclock.model import (
    CancellingLinear,
    Constants,
    Grid1D,
    HardFloor,
    Harmonic,
    InternalClockSpec,
    Zero,
    build_blocks,
)
from gravclock.quantum import JointState, gaussian_packet
from gravclock.scenarios import (
    ScenarioConfig,
    ScenarioParams,
    cancellation_counterpart,
    config_differences,
    evolve,
    free_reference_evolution,
    run_scenario,
    validate_config,
)

C = Constants.dimensionless()
CLOCK = InternalClockSpec((0.0, 0.1))


def pair_config(**kw):
    base = dict(kind="fixed_height_clocks", constants=C, clock=CLOCK,
                potential=Harmonic(0.0, 1.0), grid=Grid1D(-16, 24, 256),
                dt=1e-2, steps=2000, record_every=10,
                params=ScenarioParams(separation=5.0))
    base.update(kw)
    return ScenarioConfig(**base)


def test_short_fixed_height_run():
    res = run_scenario(pair_config())
    assert res.summary["measured_shift"] == pytest.approx(0.05, abs=1e-4)
    assert res.passed
    s = res.series["low"]
    assert [name for name, _ in s.columns()] == [
        "t", "norm", "mean_x", "mean_p", "purity", "visibility", "phase_1",
        "level_pop_0", "level_pop_1"]
    assert len(s) == 201
    assert s.t[-1] == 20.0


def test_eigen_initial_state_is_also_redshifted():
    res = run_scenario(pair_config(params=ScenarioParams(separation=5.0, initial="eigen")))
    assert res.summary["measured_shift"] == pytest.approx(0.05, abs=1e-4)
    assert res.summary["low_mean_x_drift"] < 1e-9


def test_short_cancellation_run():
    cfg = cancellation_counterpart(pair_config())
    assert config_differences(cfg, pair_config()) == {"kind", "potential"}
    res = run_scenario(cfg)
    assert abs(res.summary["measured_shift"]) < 1e-10
    assert res.summary["fidelity"] > 1 - 1e-10
    assert res.passed


def test_bouncer_first_order_prediction():
    cfg = ScenarioConfig("bouncer_clock", Constants.dimensionless(c=20), CLOCK,
                         HardFloor(0.0), Grid1D(0, 16, 1024), 2e-3, 4000, 10,
                         ScenarioParams(initial="eigen"))
    res = run_scenario(cfg)
    # eigenstates: <T> = E/3, <V> = 2E/3 so the kinetic term removes half of g<x>/c^2
    s = res.summary
    for n in (1, 2):
        assert s[f"n{n}_shift_kinetic"] == pytest.approx(-0.5 * s[f"n{n}_shift_gravitational"], rel=1e-3)
        assert s[f"n{n}_mean_x_drift"] < 1e-8
    assert res.check("interlevel_vs_first_order").passed
    assert not res.check("interlevel_vs_gravitational").passed


def test_short_moving_clock():
    cfg = ScenarioConfig("moving_clock", Constants.dimensionless(g=0.0), CLOCK, Zero(),
                         Grid1D(-128, 128, 512), 2e-2, 2000, 10,
                         ScenarioParams(momenta=(0.5, 1.0, 2.0)))
    res = run_scenario(cfg)
    assert res.summary["loglog_slope"] == pytest.approx(2.0, abs=1e-3)
    assert res.summary["deficit_p1"] == pytest.approx(0.005, abs=1e-6)


def test_moving_clock_under_cancelling_gravity():
    cfg = ScenarioConfig("moving_clock", C, CLOCK, CancellingLinear(),
                         Grid1D(-128, 128, 512), 2e-2, 2000, 10,
                         ScenarioParams(momenta=(1.0, 2.0)))
    assert run_scenario(cfg).passed


def test_short_superposition():
    cfg = ScenarioConfig("superposition_interference", Constants.dimensionless(g=0.1),
                         InternalClockSpec((0.0, 2.0)), Harmonic(0.0, 1.0),
                         Grid1D(-10, 30, 512), 2e-2, 9000, 10,
                         ScenarioParams(separation=10.0))
    res = run_scenario(cfg)
    assert res.summary["max_visibility_error"] < 1e-4
    assert res.check("first_zero").error < 1e-3
    # purity follows visibility for an equal-weight superposition
    s = res.series["joint"]
    assert np.allclose(s.purity, 0.5 * (1 + s.visibility ** 2), atol=1e-10)


def test_evolve_records_exact_times():
    grid = Grid1D(-10, 10, 64)
    blocks = build_blocks(CLOCK, Harmonic(), C, grid)
    s = JointState.product(grid, gaussian_packet(grid, 0, 1), CLOCK.amplitudes)
    final, series = evolve(s, blocks, 0.1, 25, 10)
    assert list(series.t) == [0.0, 1.0, 2.0]
    assert final.t == 2.5


def test_free_reference_requires_free_blocks():
    grid = Grid1D(-10, 10, 64)
    s = JointState.product(grid, gaussian_packet(grid, 0, 1), CLOCK.amplitudes)
    with pytest.raises(NotFree):
        free_reference_evolution(s, build_blocks(CLOCK, Harmonic(), C, grid), 0.1, 1)
    blocks = build_blocks(CLOCK, CancellingLinear(), C, grid)
    same = free_reference_evolution(s, blocks, 0.1, 0)
    assert np.array_equal(same.psi, s.psi)


@pytest.mark.parametrize("change, field", [
    (dict(potential=Zero()), "potential.kind"),
    (dict(clock=InternalClockSpec((0.0,))), "clock.levels"),
    (dict(clock=InternalClockSpec((0.0, 20.0))), "clock.levels"),
    (dict(dt=0.0), "evolution.dt"),
    (dict(steps=0), "evolution.steps"),
    (dict(params=ScenarioParams()), "scenario.separation"),
    (dict(params=ScenarioParams(separation=5.0, initial="thermal")), "scenario.initial"),
    (dict(grid=Grid1D(-4, 24, 256)), "grid"),
    (dict(record_every=2000), "evolution.record_every"),
    (dict(tolerances=(("bogus", 1.0),)), "scenario"),
    (dict(kind="teleport"), "scenario.kind"),
])
def test_validation_names_field(change, field):
    with pytest.raises(ConfigInvalid) as err:
        validate_config(pair_config(**change))
    assert err.value.field == field


def test_validation_per_kind():
    bouncer = ScenarioConfig("bouncer_clock", Constants.dimensionless(g=0.0), CLOCK,
                             HardFloor(0.0), Grid1D(0, 16, 256), 1e-3, 10)
    with pytest.raises(ConfigInvalid):
        validate_config(bouncer)
    moving = ScenarioConfig("moving_clock", C, CLOCK, Zero(), Grid1D(-10, 10, 64), 1e-3, 10,
                            params=ScenarioParams(momenta=(1.0,)))
    with pytest.raises(ConfigInvalid):
        validate_config(moving)  # gravity not cancelled
    fast = replace(moving, constants=Constants.dimensionless(g=0.0),
                   params=ScenarioParams(momenta=(100.0,)))
    with pytest.raises(ConfigInvalid):
        validate_config(fast)  # momentum beyond the grid's band
