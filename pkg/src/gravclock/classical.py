"""Classical limit: leapfrog trajectories with clock-phase accumulation.

For the block of internal energy E0 Hamilton's equations read

    dx/dt = 2 a0 p,    dp/dt = -V0'(x),

and the internal clock advances at the rate (E0/hbar) r(x, p) with
r = 1 - p^2/(2 m^2 c^2) + g x / c^2.  A particle trapped at rest has
dp/dt = 0 on that one solution; this does not require V0' to vanish
everywhere, and r keeps its height dependence.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NonFinite, NoStationaryPoint
from .model import (
    CancellingLinear,
    Constants,
    HardFloor,
    Harmonic,
    MassOnlyLinear,
    TwoSiteHarmonic,
    Zero,
    gravitational_slope,
    kinetic_coefficient,
    potential_profile,
)


class Stationarity(enum.Enum):
    EVERYWHERE = "everywhere"


#: Returned by :func:`stationary_point` when the force vanishes identically.
EVERYWHERE_STATIONARY = Stationarity.EVERYWHERE


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float
    phi: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.p, self.phi, self.t)):
            raise NonFinite(f"non-finite classical state {self!r}")


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    dt: float
    record_every: int
    e0: float
    potential_kind: str
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    def _column(self, name):
        return np.array([getattr(s, name) for s in self.states])

    @property
    def x(self):
        return self._column("x")

    @property
    def p(self):
        return self._column("p")

    @property
    def phi(self):
        return self._column("phi")

    @property
    def t(self):
        return self._column("t")

    @property
    def final(self) -> ClassicalState:
        return self.states[-1]


def clock_rate(x: float, p: float, constants: Constants) -> float:
    """Ticking rate of the internal clock relative to one at rest at x = 0."""
    m, c = constants.m, constants.c
    return 1.0 - p * p / (2.0 * m * m * c * c) + constants.g * x / (c * c)


def force(spec, e0: float, constants: Constants, x: float) -> float:
    """-dV0/dx for the block of internal energy e0."""
    if isinstance(spec, CancellingLinear):
        return 0.0
    slope = gravitational_slope(constants, e0)
    if isinstance(spec, (Zero, HardFloor)):
        return -slope
    if isinstance(spec, MassOnlyLinear):
        return -(slope - constants.m * constants.g)
    if isinstance(spec, Harmonic):
        return -(slope + constants.m * spec.omega ** 2 * (x - spec.center))
    if isinstance(spec, TwoSiteHarmonic):
        a, b = spec.centers
        center = a if abs(x - a) <= abs(x - b) else b
        return -(slope + constants.m * spec.omega ** 2 * (x - center))
    raise InvalidInput(f"unknown potential spec {spec!r}")


def energy(state: ClassicalState, e0: float, spec, constants: Constants) -> float:
    a0 = kinetic_coefficient(constants.m, e0, constants.c)
    return a0 * state.p ** 2 + potential_profile(spec, constants, e0, state.x)


def _kdk(x, p, a0, dt, spec, e0, constants, floor):
    """One kick-drift-kick step; returns (x, p, rate at the midpoint)."""
    p_half = p + 0.5 * dt * force(spec, e0, constants, x)
    x_new = x + 2.0 * a0 * p_half * dt
    if floor is not None and x_new < floor:
        x_new = 2.0 * floor - x_new
        p_half = -p_half
    rate = clock_rate(0.5 * (x + x_new), p_half, constants)
    p_new = p_half + 0.5 * dt * force(spec, e0, constants, x_new)
    if not (math.isfinite(x_new) and math.isfinite(p_new)):
        raise NonFinite("trajectory left the representable range")
    return x_new, p_new, rate


def _floor_of(spec):
    return spec.floor if isinstance(spec, HardFloor) else None


def hamilton_step(state: ClassicalState, e0: float, spec, constants: Constants,
                  dt: float) -> ClassicalState:
    """Advance one leapfrog step; the clock phase uses the midpoint rate."""
    if not dt > 0:
        raise InvalidInput("dt must be > 0")
    a0 = kinetic_coefficient(constants.m, e0, constants.c)
    x, p, rate = _kdk(state.x, state.p, a0, dt, spec, e0, constants, _floor_of(spec))
    phi = state.phi + (e0 / constants.hbar) * rate * dt
    return ClassicalState(x=x, p=p, phi=phi, t=state.t + dt)


def stationary_point(spec, e0: float, constants: Constants):
    """Height x* where the force on the E0 block vanishes.

    Returns :data:`EVERYWHERE_STATIONARY` for CancellingLinear.
    """
    if isinstance(spec, CancellingLinear):
        return EVERYWHERE_STATIONARY
    if isinstance(spec, Harmonic):
        slope = gravitational_slope(constants, e0)
        return spec.center - slope / (constants.m * spec.omega ** 2)
    raise NoStationaryPoint(f"{spec.kind} has no isolated stationary point")


def integrate(start: ClassicalState, e0: float, spec, constants: Constants,
              dt: float, steps: int, record_every: int = 1) -> Trajectory:
    """Run ``steps`` leapfrog steps, recording every ``record_every`` steps.

    Times are t0 + i dt exactly and the phase sum is compensated, so a run
    split into two halves agrees with a single run to rounding.
    """
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    if record_every < 1:
        raise InvalidInput("record_every must be >= 1")
    if not dt > 0:
        raise InvalidInput("dt must be > 0")
    a0 = kinetic_coefficient(constants.m, e0, constants.c)
    floor = _floor_of(spec)
    scale = e0 / constants.hbar
    x, p, t0 = start.x, start.p, start.t
    phi, carry = start.phi, 0.0
    states = [start]
    for i in range(1, steps + 1):
        x, p, rate = _kdk(x, p, a0, dt, spec, e0, constants, floor)
        # Kahan summation of the phase increments
        y = scale * rate * dt - carry
        s = phi + y
        carry = (s - phi) - y
        phi = s
        if i % record_every == 0:
            states.append(ClassicalState(x=x, p=p, phi=phi, t=t0 + i * dt))
    return Trajectory(states=tuple(states), dt=dt, record_every=record_every,
                      e0=e0, potential_kind=spec.kind)
