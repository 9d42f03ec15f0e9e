"""Configured experiments on trapped, free and bouncing clocks.

Each scenario builds block Hamiltonians for a clock, prepares a joint
state, propagates it while recording observables, and compares the
measured clock phases with closed-form predictions.

fixed_height_clocks
    Two clocks resting in harmonic traps at heights h and h + dx.
cancellation_control
    The same geometry with the cancelling potential in place of the traps.
bouncer_clock
    A clock sitting in a bound state above a hard floor.
moving_clock
    Free clocks with mean momentum p0 compared against one at rest.
superposition_interference
    One clock delocalized over two trap sites at different heights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigInvalid, InvalidInput, NotFree
from .model import (
    CancellingLinear,
    Constants,
    Grid1D,
    HardFloor,
    Harmonic,
    InternalClockSpec,
    TwoSiteHarmonic,
    Zero,
    build_blocks,
    gravitational_slope,
)
from .observables import (
    analytic_redshift,
    analytic_visibility,
    fidelity,
    first_visibility_zero,
    redshift_from_phases,
    reduced_internal,
    visibility,
)
from .quantum import (
    JointState,
    Propagator,
    eigensolve_fd,
    expectations,
    fd_expectations,
    gaussian_packet,
    normalize,
    trap_ground_state,
)

KINDS = (
    "fixed_height_clocks",
    "cancellation_control",
    "bouncer_clock",
    "moving_clock",
    "superposition_interference",
)

DEFAULT_TOLERANCES = {
    "fixed_height_clocks": {"shift": 1e-4},
    "cancellation_control": {"shift": 1e-10, "fidelity": 1e-10},
    "bouncer_clock": {"drift": 1e-8, "shift_rel": 1e-3},
    "moving_clock": {"slope": 0.01, "amplitude": 1e-6},
    "superposition_interference": {"visibility": 1e-4, "zero_rel": 1e-3},
}


@dataclass(frozen=True)
class ScenarioParams:
    height: float = 0.0
    separation: float | None = None
    momenta: tuple | None = None
    sigma: float | None = None
    states: tuple = (1, 2)
    initial: str = "product"


@dataclass(frozen=True, eq=True)
class ScenarioConfig:
    kind: str
    constants: Constants
    clock: InternalClockSpec
    potential: object
    grid: Grid1D
    dt: float
    steps: int
    record_every: int = 10
    params: ScenarioParams = ScenarioParams()
    tolerances: tuple = ()

    def tolerance(self, name: str) -> float:
        return dict(self.tolerances).get(name, DEFAULT_TOLERANCES[self.kind][name])


@dataclass
class Series:
    """Observables sampled every ``record_every`` steps.

    ``phases[j]`` is the unwrapped phase of level j+1 relative to level 0.
    """

    t: np.ndarray
    norm: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    purity: np.ndarray
    visibility: np.ndarray
    phases: np.ndarray
    populations: np.ndarray
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def columns(self):
        cols = [("t", self.t), ("norm", self.norm), ("mean_x", self.mean_x),
                ("mean_p", self.mean_p), ("purity", self.purity),
                ("visibility", self.visibility)]
        cols += [(f"phase_{j + 1}", ph) for j, ph in enumerate(self.phases)]
        cols += [(f"level_pop_{k}", pop) for k, pop in enumerate(self.populations)]
        return cols


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float
    relative: bool = False

    @property
    def error(self) -> float:
        err = abs(self.value - self.expected)
        if self.relative:
            err /= abs(self.expected)
        return err

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


@dataclass
class ScenarioResult:
    kind: str
    series: dict
    summary: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


# --- validation -------------------------------------------------------------

def validate_config(cfg: ScenarioConfig) -> None:
    """Raise ConfigInvalid naming the offending field."""
    if cfg.kind not in KINDS:
        raise ConfigInvalid(f"unknown scenario kind {cfg.kind!r}", "scenario.kind")
    try:
        cfg.clock.check_low_energy(cfg.constants)
    except InvalidInput as exc:
        raise ConfigInvalid(f"ApproximationBreach: {exc}", "clock.levels") from exc
    if not cfg.dt > 0:
        raise ConfigInvalid("must be > 0", "evolution.dt")
    if cfg.steps < 1:
        raise ConfigInvalid("must be >= 1", "evolution.steps")
    if cfg.record_every < 1:
        raise ConfigInvalid("must be >= 1", "evolution.record_every")
    unknown = set(dict(cfg.tolerances)) - set(DEFAULT_TOLERANCES[cfg.kind])
    if unknown:
        raise ConfigInvalid(f"unknown tolerances {sorted(unknown)}", "scenario")
    p = cfg.params
    if p.initial not in ("product", "eigen"):
        raise ConfigInvalid("must be 'product' or 'eigen'", "scenario.initial")
    if p.sigma is not None and not p.sigma > 0:
        raise ConfigInvalid("must be > 0", "scenario.sigma")
    levels = cfg.clock.levels
    gap_rate = (levels[-1] - levels[0]) / cfg.constants.hbar
    if gap_rate * cfg.dt * cfg.record_every > 0.5 * math.pi:
        raise ConfigInvalid("clock phase advances too far between samples to unwrap",
                            "evolution.record_every")

    if len(levels) < 2:
        raise ConfigInvalid("needs a clock with at least two levels", "clock.levels")
    pot = cfg.potential
    if cfg.kind == "fixed_height_clocks" and not isinstance(pot, Harmonic):
        raise ConfigInvalid("fixed_height_clocks needs a harmonic potential", "potential.kind")
    if cfg.kind == "cancellation_control" and not isinstance(pot, CancellingLinear):
        raise ConfigInvalid("cancellation_control needs cancelling_linear", "potential.kind")
    if cfg.kind == "superposition_interference" and not isinstance(pot, Harmonic):
        raise ConfigInvalid("superposition_interference needs a harmonic potential",
                            "potential.kind")
    if cfg.kind == "bouncer_clock":
        if not isinstance(pot, HardFloor):
            raise ConfigInvalid("bouncer_clock needs hard_floor", "potential.kind")
        if not cfg.constants.g > 0:
            raise ConfigInvalid("bouncer_clock needs g > 0", "units.g")
        if not p.states or min(p.states) < 1:
            raise ConfigInvalid("bouncer states are numbered from 1", "scenario.states")
    if cfg.kind == "moving_clock":
        free = isinstance(pot, CancellingLinear) or (
            isinstance(pot, Zero) and cfg.constants.g == 0)
        if not free:
            raise ConfigInvalid("moving_clock needs a free particle: cancelling_linear, "
                                "or zero with g = 0", "potential.kind")
        if not p.momenta:
            raise ConfigInvalid("required for moving_clock", "scenario.momenta")
        kmax = math.pi / cfg.grid.dx
        if max(abs(q) for q in p.momenta) / cfg.constants.hbar > 0.5 * kmax:
            raise ConfigInvalid("momentum not resolved by the grid", "scenario.momenta")
    if cfg.kind in ("fixed_height_clocks", "cancellation_control",
                    "superposition_interference"):
        if p.separation is None:
            raise ConfigInvalid(f"required for {cfg.kind}", "scenario.separation")
        if not p.separation > 0:
            raise ConfigInvalid("must be > 0", "scenario.separation")
        sigma = _sigma(cfg)
        lo, hi = p.height, p.height + p.separation
        if lo - 8 * sigma < cfg.grid.x_min or hi + 8 * sigma > cfg.grid.x_max:
            raise ConfigInvalid("packets must start at least 8 sigma inside the grid",
                                "grid")
    if p.initial == "eigen" and isinstance(pot, (CancellingLinear, Zero)):
        raise ConfigInvalid("'eigen' initial states need a trapping potential",
                            "scenario.initial")


def _sigma(cfg: ScenarioConfig) -> float:
    if cfg.params.sigma is not None:
        return cfg.params.sigma
    c = cfg.constants
    if cfg.kind == "moving_clock":
        return cfg.grid.length / 16.0
    omega = cfg.potential.omega if isinstance(cfg.potential, Harmonic) else 1.0
    return math.sqrt(c.hbar / (2.0 * c.m * omega))


def cancellation_counterpart(cfg: ScenarioConfig) -> ScenarioConfig:
    """The cancellation control for a fixed_height_clocks configuration."""
    return replace(cfg, kind="cancellation_control", potential=CancellingLinear(),
                   tolerances=())


def config_differences(a: ScenarioConfig, b: ScenarioConfig) -> set:
    return {f.name for f in fields(ScenarioConfig)
            if getattr(a, f.name) != getattr(b, f.name)}


# --- evolution with recording ----------------------------------------------

class _Recorder:
    def __init__(self, levels, regions=None):
        self.rows = {k: [] for k in ("t", "norm", "mean_x", "mean_p", "purity",
                                     "visibility")}
        self.raw_phase = [[] for _ in range(levels - 1)]
        self.pops = [[] for _ in range(levels)]
        self.coherence = []
        self.regions = regions or {}
        self.region_phase = {name: [] for name in self.regions}

    def __call__(self, state: JointState):
        e = expectations(state)
        rho = reduced_internal(state)
        r = self.rows
        r["t"].append(state.t)
        r["norm"].append(e.norm)
        r["mean_x"].append(e.mean_x)
        r["mean_p"].append(e.mean_p)
        r["purity"].append(rho.purity)
        r["visibility"].append(visibility(rho, 0, 1) if rho.dim > 1 else math.nan)
        for j in range(rho.dim - 1):
            self.raw_phase[j].append(rho.coherence_phase(j + 1))
        for k in range(rho.dim):
            self.pops[k].append(e.level_populations[k])
        if rho.dim > 1:
            self.coherence.append(rho.rho[0, 1])
        for name, mask in self.regions.items():
            self.region_phase[name].append(reduced_internal(state, mask).coherence_phase(1))

    def series(self) -> Series:
        r = {k: np.array(v) for k, v in self.rows.items()}
        phases = np.array([np.unwrap(p) for p in self.raw_phase]).reshape(
            len(self.raw_phase), len(r["t"]))
        extra = {}
        if self.coherence:
            extra["coherence"] = np.array(self.coherence)
        for name, ph in self.region_phase.items():
            extra[f"phase_{name}"] = np.unwrap(np.array(ph))
        return Series(phases=phases, populations=np.array(self.pops),
                      extra=extra, **r)


def evolve(state: JointState, blocks, dt: float, steps: int, record_every: int,
           regions=None):
    """Propagate and record; returns (final state, Series).

    Samples are taken at t0 and after every ``record_every`` steps; any
    remainder steps run after the last sample.
    """
    prop = Propagator(blocks, dt)
    rec = _Recorder(state.levels, regions)
    rec(state)
    t0 = state.t
    for i in range(1, steps // record_every + 1):
        state = prop(state, record_every)
        state = state.replace(state.psi, t0 + i * record_every * dt)
        rec(state)
    if steps % record_every:
        state = prop(state, steps % record_every)
        state = state.replace(state.psi, t0 + steps * dt)
    return state, rec.series()


def free_reference_evolution(state: JointState, blocks, dt: float,
                             steps: int) -> JointState:
    """Exact free evolution exp(-i (a_k hbar^2 kappa^2 + V_k) t / hbar) in one shot."""
    for b in blocks:
        if b.dirichlet or not b.is_constant(1e-14):
            raise NotFree(f"block {b.level} potential varies over the grid")
    if len(blocks) != state.levels:
        raise InvalidInput("block count differs from level count")
    t = dt * steps
    if t == 0:
        return state.replace(state.psi.copy(), state.t)
    kappa2 = state.grid.wavenumbers ** 2
    psi = np.empty_like(state.psi)
    for k, b in enumerate(blocks):
        omega = (b.kinetic * b.hbar ** 2 * kappa2 + b.potential[0]) / b.hbar
        psi[k] = np.fft.ifft(np.exp(-1j * omega * t) * np.fft.fft(state.psi[k]))
    return state.replace(psi, state.t + t)


# --- scenarios ------------------------------------------------------------

def _gap(cfg):
    return cfg.clock.levels[1] - cfg.clock.levels[0]


def _phase_slope(t, phase):
    return float(np.polyfit(t, phase, 1)[0])


def _trap_for(cfg, height):
    """Harmonic trap whose level-0 rest point sits at ``height``."""
    c = cfg.constants
    pot = cfg.potential
    if isinstance(pot, Harmonic):
        shift = gravitational_slope(c, cfg.clock.levels[0]) / (c.m * pot.omega ** 2)
        return Harmonic(center=height + shift, omega=pot.omega)
    return pot


def _clock_at(cfg, height):
    pot = _trap_for(cfg, height)
    blocks = build_blocks(cfg.clock, pot, cfg.constants, cfg.grid)
    hbar = cfg.constants.hbar
    if cfg.params.initial == "eigen":
        packets = [trap_ground_state(b, pot.center, pot.omega, cfg.constants.m)
                   for b in blocks]
        state = JointState.correlated(cfg.grid, packets, cfg.clock.amplitudes, hbar)
    else:
        packet = gaussian_packet(cfg.grid, height, _sigma(cfg), hbar=hbar)
        state = JointState.product(cfg.grid, packet, cfg.clock.amplitudes, hbar)
    return blocks, state


def _clock_pair(cfg: ScenarioConfig) -> ScenarioResult:
    """Shared by fixed_height_clocks and cancellation_control."""
    p = cfg.params
    gap = _gap(cfg)
    series, summary, finals = {}, {}, {}
    for label, h in (("low", p.height), ("high", p.height + p.separation)):
        blocks, state = _clock_at(cfg, h)
        final, s = evolve(state, blocks, cfg.dt, cfg.steps, cfg.record_every)
        series[label] = s
        finals[label] = (state, final, blocks)
        summary[f"{label}_height"] = h
        summary[f"{label}_phase"] = float(s.phases[0, -1] - s.phases[0, 0])
        summary[f"{label}_rate"] = _phase_slope(s.t, s.phases[0]) * cfg.constants.hbar / gap
        summary[f"{label}_mean_x_drift"] = float(np.max(np.abs(s.mean_x - s.mean_x[0])))
    t = series["low"].t[-1] - series["low"].t[0]
    shift = redshift_from_phases(summary["low_phase"], summary["high_phase"], gap, t,
                                 cfg.constants)
    summary["elapsed"] = t
    summary["measured_shift"] = shift
    summary["epsilon"] = analytic_redshift(p.separation, cfg.constants)
    checks = []
    if cfg.kind == "fixed_height_clocks":
        expected = analytic_redshift(p.separation, cfg.constants)
        summary["expected_shift"] = expected
        checks.append(Check("shift", shift, expected, cfg.tolerance("shift")))
    else:
        summary["expected_shift"] = 0.0
        checks.append(Check("shift", shift, 0.0, cfg.tolerance("shift")))
        worst = math.inf
        for label, (initial, final, blocks) in finals.items():
            ref = free_reference_evolution(initial, blocks, cfg.dt, cfg.steps)
            f = fidelity(ref, final)
            summary[f"{label}_fidelity"] = f
            worst = min(worst, f)
        summary["fidelity"] = worst
        checks.append(Check("fidelity", worst, 1.0, cfg.tolerance("fidelity")))
    return ScenarioResult(cfg.kind, series, summary, checks)


def _bouncer(cfg: ScenarioConfig) -> ScenarioResult:
    c = cfg.constants
    gap = _gap(cfg)
    blocks = build_blocks(cfg.clock, cfg.potential, c, cfg.grid)
    states = tuple(cfg.params.states)
    spectra = [eigensolve_fd(b, max(states)) for b in blocks]
    series, summary, checks = {}, {}, []
    pt, grav, measured = {}, {}, {}
    for n in states:
        if cfg.params.initial == "eigen":
            packets = [sp.wavefunctions[n - 1] for sp in spectra]
            state = JointState.correlated(cfg.grid, packets, cfg.clock.amplitudes, c.hbar)
        else:
            state = JointState.product(cfg.grid, spectra[0].wavefunctions[n - 1],
                                       cfg.clock.amplitudes, c.hbar)
        _, s = evolve(state, blocks, cfg.dt, cfg.steps, cfg.record_every)
        label = f"n{n}"
        series[label] = s
        drift = float(np.max(np.abs(s.mean_x - s.mean_x[0])))
        mean_x, p2 = fd_expectations(spectra[0].wavefunctions[n - 1], blocks[0])
        measured[n] = _phase_slope(s.t, s.phases[0]) * c.hbar / gap - 1.0
        grav[n] = c.g * mean_x / c.c ** 2
        kin = p2 / (2.0 * c.m ** 2 * c.c ** 2)
        pt[n] = grav[n] - kin
        summary.update({
            f"{label}_energy": float(spectra[0].energies[n - 1]),
            f"{label}_mean_x": mean_x,
            f"{label}_mean_p2": p2,
            f"{label}_mean_x_drift": drift,
            f"{label}_shift_measured": measured[n],
            f"{label}_shift_gravitational": grav[n],
            f"{label}_shift_kinetic": -kin,
            f"{label}_shift_first_order": pt[n],
        })
        checks.append(Check(f"{label}_drift", drift, 0.0, cfg.tolerance("drift")))
    if len(states) >= 2:
        a, b = states[0], states[1]
        inter = measured[b] - measured[a]
        summary["interlevel_shift_measured"] = inter
        summary["interlevel_shift_gravitational"] = grav[b] - grav[a]
        summary["interlevel_shift_first_order"] = pt[b] - pt[a]
        tol = cfg.tolerance("shift_rel")
        checks.append(Check("interlevel_vs_gravitational", inter, grav[b] - grav[a],
                            tol, relative=True))
        checks.append(Check("interlevel_vs_first_order", inter, pt[b] - pt[a],
                            tol, relative=True))
    summary["epsilon"] = c.g * max(summary[f"n{n}_mean_x"] for n in states) / c.c ** 2
    return ScenarioResult(cfg.kind, series, summary, checks)


def _moving(cfg: ScenarioConfig) -> ScenarioResult:
    c = cfg.constants
    gap = _gap(cfg)
    blocks = build_blocks(cfg.clock, cfg.potential, c, cfg.grid)
    sigma = _sigma(cfg)
    runs = {}
    for p0 in (0.0,) + tuple(cfg.params.momenta):
        packet = gaussian_packet(cfg.grid, cfg.params.height, sigma, p0, c.hbar)
        state = JointState.product(cfg.grid, packet, cfg.clock.amplitudes, c.hbar)
        _, runs[p0] = evolve(state, blocks, cfg.dt, cfg.steps, cfg.record_every)
    rest = runs[0.0]
    series = {"rest": rest}
    summary, checks = {"sigma": sigma}, []
    deficits = {}
    for p0 in cfg.params.momenta:
        s = runs[p0]
        series[f"p{p0:g}"] = s
        lag = rest.phases[0] - s.phases[0]
        deficits[p0] = _phase_slope(s.t, lag) * c.hbar / gap
        expected = p0 ** 2 / (2.0 * c.m ** 2 * c.c ** 2)
        summary[f"deficit_p{p0:g}"] = deficits[p0]
        summary[f"expected_deficit_p{p0:g}"] = expected
        checks.append(Check(f"amplitude_p{p0:g}", deficits[p0], expected,
                            cfg.tolerance("amplitude")))
    moving = sorted({abs(p) for p in cfg.params.momenta if p != 0})
    if len(moving) >= 2:
        logs = [math.log(abs(deficits[p] if p in deficits else deficits[-p]))
                for p in moving]
        slope = float(np.polyfit(np.log(moving), logs, 1)[0])
        summary["loglog_slope"] = slope
        checks.append(Check("loglog_slope", slope, 2.0, cfg.tolerance("slope")))
    return ScenarioResult(cfg.kind, series, summary, checks)


def _first_sign_change(t, y):
    idx = np.flatnonzero(np.signbit(y[1:]) != np.signbit(y[:-1]))
    if idx.size == 0:
        return math.nan
    i = idx[0]
    return float(t[i] - y[i] * (t[i + 1] - t[i]) / (y[i + 1] - y[i]))


def _revival(t, vis, t_zero):
    """Time of the first visibility maximum after ``t_zero``.

    A least-squares parabola over a window of +-t_zero/20 around the largest
    sample averages out the small breathing of the trapped packets.
    """
    if not math.isfinite(t_zero):
        return math.nan
    idx = np.flatnonzero(t > t_zero)
    if idx.size < 3:
        return math.nan
    i = idx[0] + int(np.argmax(vis[idx]))
    win = np.flatnonzero(np.abs(t - t[i]) <= t_zero / 20.0)
    if win.size < 3 or not win[0] < i < win[-1]:
        return float(t[i])
    a, b, _ = np.polyfit(t[win] - t[i], vis[win], 2)
    if a >= 0:
        return float(t[i])
    return float(t[i] - b / (2.0 * a))


def _superposition(cfg: ScenarioConfig) -> ScenarioResult:
    c = cfg.constants
    p = cfg.params
    gap = _gap(cfg)
    lo, hi = p.height, p.height + p.separation
    shift = gravitational_slope(c, cfg.clock.levels[0]) / (c.m * cfg.potential.omega ** 2)
    pot = TwoSiteHarmonic(centers=(lo + shift, hi + shift), omega=cfg.potential.omega)
    blocks = build_blocks(cfg.clock, pot, c, cfg.grid)
    if p.initial == "eigen":
        packets = [normalize(sum(trap_ground_state(b, x_c, pot.omega, c.m)
                                 for x_c in pot.centers), cfg.grid) for b in blocks]
        state = JointState.correlated(cfg.grid, packets, cfg.clock.amplitudes, c.hbar)
    else:
        sigma = _sigma(cfg)
        packet = normalize(gaussian_packet(cfg.grid, lo, sigma, hbar=c.hbar)
                           + gaussian_packet(cfg.grid, hi, sigma, hbar=c.hbar), cfg.grid)
        state = JointState.product(cfg.grid, packet, cfg.clock.amplitudes, c.hbar)
    below = cfg.grid.x < 0.5 * (lo + hi)
    _, s = evolve(state, blocks, cfg.dt, cfg.steps, cfg.record_every,
                  regions={"low": below, "high": ~below})
    mean_branch = 0.5 * (s.extra["phase_low"] + s.extra["phase_high"])
    signed = 2.0 * np.real(s.extra["coherence"] * np.exp(-1j * mean_branch))
    s.extra["signed_visibility"] = signed
    analytic = np.array([analytic_visibility(gap, p.separation, t, c) for t in s.t])
    s.extra["analytic_visibility"] = analytic
    err = float(np.max(np.abs(s.visibility - analytic)))
    t_zero = _first_sign_change(s.t - s.t[0], signed)
    t_expected = first_visibility_zero(gap, p.separation, c)
    revival = _revival(s.t - s.t[0], s.visibility, t_zero)
    summary = {
        "epsilon": analytic_redshift(p.separation, c),
        "max_visibility_error": err,
        "first_zero_measured": t_zero,
        "first_zero_expected": t_expected,
        "revival_measured": revival,
        "revival_expected": 2.0 * t_expected,
        "min_purity": float(np.min(s.purity)),
    }
    checks = [
        Check("visibility", err, 0.0, cfg.tolerance("visibility")),
        Check("first_zero", t_zero, t_expected, cfg.tolerance("zero_rel"), relative=True),
    ]
    return ScenarioResult(cfg.kind, {"joint": s}, summary, checks)


_RUNNERS = {
    "fixed_height_clocks": _clock_pair,
    "cancellation_control": _clock_pair,
    "bouncer_clock": _bouncer,
    "moving_clock": _moving,
    "superposition_interference": _superposition,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    validate_config(cfg)
    return _RUNNERS[cfg.kind](cfg)
