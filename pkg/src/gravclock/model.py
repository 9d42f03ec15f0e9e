"""Constants, clock and potential specifications, and block Hamiltonians.

The Hamiltonian of a composite particle in uniform gravity,

    H = p^2/2m + m g x + (1 - p^2/(2 m^2 c^2) + g x / c^2) H0 + U_ext(x),

commutes with every projector onto an eigenspace of the internal
Hamiltonian H0.  Restricted to the eigenvalue E_k it becomes an ordinary
one-dimensional Hamiltonian

    H_k = a_k p^2 + V_k(x),
    a_k = 1/(2m) - E_k/(2 m^2 c^2),
    V_k(x) = (m + E_k/c^2) g x + E_k + U_ext(x; E_k),

so a clock is fully described by one block per internal level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Union

import numpy as np

from .errors import (
    ApproximationBreach,
    GridInvalid,
    InvalidInput,
    OutOfDomain,
)

#: Low-energy guard: internal energies must satisfy |E_k| < LOW_ENERGY_GUARD * m c^2.
LOW_ENERGY_GUARD = 0.1

SPEED_OF_LIGHT = 299792458.0
STANDARD_GRAVITY = 9.81
HBAR_SI = 1.054571817e-34
NEUTRON_MASS = 1.67492749804e-27


@dataclass(frozen=True)
class Constants:
    c: float
    g: float
    hbar: float
    m: float

    def __post_init__(self):
        for name in ("c", "g", "hbar", "m"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInput(f"{name} must be finite")
        if self.c <= 0:
            raise InvalidInput("c must be > 0")
        if self.hbar <= 0:
            raise InvalidInput("hbar must be > 0")
        if self.m <= 0:
            raise InvalidInput("m must be > 0")
        if self.g < 0:
            raise InvalidInput("g must be >= 0")

    @classmethod
    def dimensionless(cls, c=10.0, g=1.0, hbar=1.0, m=1.0) -> Constants:
        return cls(c=c, g=g, hbar=hbar, m=m)

    @classmethod
    def si(cls, m=NEUTRON_MASS, g=STANDARD_GRAVITY) -> Constants:
        return cls(c=SPEED_OF_LIGHT, g=g, hbar=HBAR_SI, m=m)


@dataclass(frozen=True)
class InternalClockSpec:
    """Internal Hamiltonian in its eigenbasis plus the initial internal amplitudes."""

    levels: tuple
    amplitudes: tuple = None

    def __post_init__(self):
        levels = tuple(float(e) for e in self.levels)
        if not levels:
            raise InvalidInput("clock needs at least one level")
        if any(not math.isfinite(e) for e in levels):
            raise InvalidInput("levels must be finite")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise InvalidInput("levels must be strictly increasing")
        if self.amplitudes is None:
            amps = (complex(1 / math.sqrt(len(levels))),) * len(levels)
        else:
            amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != len(levels):
            raise InvalidInput(
                f"{len(amps)} amplitudes given for {len(levels)} levels")
        norm = math.fsum(abs(a) ** 2 for a in amps)
        if abs(norm - 1.0) > 1e-12:
            raise InvalidInput(f"amplitudes not normalized: sum |c_k|^2 = {norm!r}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self):
        return len(self.levels)

    def check_low_energy(self, constants: Constants) -> None:
        for e in self.levels:
            _guard(constants.m, e, constants.c)


# --- external potentials ----------------------------------------------------

@dataclass(frozen=True)
class Zero:
    kind: ClassVar[str] = "zero"


@dataclass(frozen=True)
class MassOnlyLinear:
    """U = -m g x: cancels gravity on the rest mass only."""

    kind: ClassVar[str] = "mass_only_linear"


@dataclass(frozen=True)
class CancellingLinear:
    """U = -(m + E_k/c^2) g x: removes every position dependence of H_k."""

    kind: ClassVar[str] = "cancelling_linear"


@dataclass(frozen=True)
class Harmonic:
    center: float = 0.0
    omega: float = 1.0
    kind: ClassVar[str] = "harmonic"

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise InvalidInput("Harmonic.omega must be > 0")
        if not math.isfinite(self.center):
            raise InvalidInput("Harmonic.center must be finite")


@dataclass(frozen=True)
class HardFloor:
    """Impenetrable floor at x = floor, realized as a Dirichlet wall."""

    floor: float = 0.0
    kind: ClassVar[str] = "hard_floor"


@dataclass(frozen=True)
class TwoSiteHarmonic:
    """Two identical harmonic wells, U = m w^2 min((x-a)^2, (x-b)^2) / 2."""

    centers: tuple = (0.0, 1.0)
    omega: float = 1.0
    kind: ClassVar[str] = "two_site_harmonic"

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise InvalidInput("TwoSiteHarmonic.omega must be > 0")
        centers = tuple(float(c) for c in self.centers)
        if len(centers) != 2 or centers[0] >= centers[1]:
            raise InvalidInput("TwoSiteHarmonic needs two increasing centers")
        object.__setattr__(self, "centers", centers)


PotentialSpec = Union[Zero, MassOnlyLinear, CancellingLinear, Harmonic,
                      HardFloor, TwoSiteHarmonic]

POTENTIAL_KINDS = {cls.kind: cls for cls in
                   (Zero, MassOnlyLinear, CancellingLinear, Harmonic,
                    HardFloor, TwoSiteHarmonic)}


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic-layout grid x_i = x_min + i dx, i = 0..n-1, dx = (x_max - x_min)/n."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridInvalid("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise GridInvalid("x_max must exceed x_min")
        n = self.n
        if int(n) != n or n < 8 or (int(n) & (int(n) - 1)):
            raise GridInvalid(f"n must be a power of two >= 8, got {n}")
        object.__setattr__(self, "n", int(n))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + np.arange(self.n) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Discrete wavenumbers in the standard FFT layout (0, +, ..., -)."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    def index_of(self, x: float) -> int:
        """Index of the last node at or below x (nodes within 1e-9 dx count as equal)."""
        return int(math.floor((x - self.x_min) / self.dx + 1e-9))


@dataclass(frozen=True, eq=False)
class BlockHamiltonian:
    """H_k = a_k p^2 + V_k(x) on a grid.

    ``wall`` is the node index carrying a Dirichlet wall (HardFloor); nodes
    at and below it are excluded and hold ``inf`` in ``potential``.
    """

    level: int
    energy: float
    kinetic: float
    potential: np.ndarray
    grid: Grid1D
    wall: int | None = None
    slope: float = 0.0
    hbar: float = 1.0

    @property
    def dirichlet(self) -> bool:
        return self.wall is not None

    @property
    def interior(self) -> slice:
        return slice(0 if self.wall is None else self.wall + 1, self.grid.n)

    def is_constant(self, tol=1e-14) -> bool:
        v = self.potential
        if not np.all(np.isfinite(v)):
            return False
        return float(np.max(np.abs(v - v[0]))) <= tol * max(1.0, abs(float(v[0])))


# --- operations -----------------------------------------------------------

def _guard(m, e_k, c):
    if not abs(e_k) < LOW_ENERGY_GUARD * m * c * c:
        raise ApproximationBreach(
            f"|E_k| = {abs(e_k)!r} violates the low-energy guard "
            f"{LOW_ENERGY_GUARD} m c^2 = {LOW_ENERGY_GUARD * m * c * c!r}")


def kinetic_coefficient(m: float, e_k: float, c: float) -> float:
    """Coefficient of p^2 in the block of internal energy ``e_k``."""
    _guard(m, e_k, c)
    return 1.0 / (2.0 * m) - e_k / (2.0 * m * m * c * c)


def gravitational_slope(constants: Constants, e_k: float) -> float:
    """(m + E_k/c^2) g: gravitational force on the total mass-energy."""
    return (constants.m + e_k / constants.c ** 2) * constants.g


def external_potential(spec, constants: Constants, e_k: float, x):
    """U_ext(x; E_k), vectorized over x.  HardFloor returns inf below the wall."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Zero):
        return np.zeros_like(x)
    if isinstance(spec, MassOnlyLinear):
        return -(constants.m * constants.g) * x
    if isinstance(spec, CancellingLinear):
        return -(gravitational_slope(constants, e_k) * x)
    if isinstance(spec, Harmonic):
        return 0.5 * constants.m * spec.omega ** 2 * (x - spec.center) ** 2
    if isinstance(spec, TwoSiteHarmonic):
        a, b = spec.centers
        return 0.5 * constants.m * spec.omega ** 2 * np.minimum((x - a) ** 2, (x - b) ** 2)
    if isinstance(spec, HardFloor):
        return np.where(x < spec.floor, np.inf, 0.0)
    raise InvalidInput(f"unknown potential spec {spec!r}")


def potential_profile(spec, constants: Constants, e_k: float, x: float) -> float:
    """V_k(x) = (m + E_k/c^2) g x + E_k + U_ext(x; E_k) at a single point.

    Compensated summation makes the CancellingLinear result exactly E_k.
    """
    if not math.isfinite(x):
        raise InvalidInput("x must be finite")
    if isinstance(spec, HardFloor) and x < spec.floor:
        raise OutOfDomain(f"x = {x!r} lies below the floor at {spec.floor!r}")
    grav = gravitational_slope(constants, e_k) * x
    u = float(external_potential(spec, constants, e_k, x))
    return math.fsum((grav, e_k, u))


def build_blocks(clock: InternalClockSpec, spec, constants: Constants,
                 grid: Grid1D) -> list[BlockHamiltonian]:
    """One independent block Hamiltonian per internal level."""
    if not isinstance(grid, Grid1D):
        raise GridInvalid("grid must be a Grid1D")
    wall = None
    if isinstance(spec, HardFloor):
        if not grid.x_min <= spec.floor < grid.x_max:
            raise OutOfDomain(f"floor {spec.floor!r} outside grid domain")
        wall = grid.index_of(spec.floor)
        if wall >= grid.n - 2:
            raise OutOfDomain("floor leaves fewer than two interior nodes")
    x = grid.x
    blocks = []
    for k, e_k in enumerate(clock.levels):
        a_k = kinetic_coefficient(constants.m, e_k, constants.c)
        slope = gravitational_slope(constants, e_k)
        u = external_potential(spec, constants, e_k, x)
        with np.errstate(invalid="ignore"):
            # gravity and U_ext grouped first: exact cancellation for CancellingLinear
            v = (slope * x + u) + e_k
        if wall is not None:
            v[: wall + 1] = np.inf
        v.flags.writeable = False
        blocks.append(BlockHamiltonian(level=k, energy=e_k, kinetic=a_k,
                                       potential=v, grid=grid, wall=wall,
                                       slope=slope, hbar=constants.hbar))
    return blocks
