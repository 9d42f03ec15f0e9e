"""Reduced internal state, visibility, clock phases and redshift.

Tracing the joint state over position leaves the internal density matrix
rho_kl = integral psi_k(x) psi_l(x)^* dx.  Any mixedness of rho certifies
entanglement between the clock and its position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, InvalidInput
from .model import Constants
from .quantum import JointState


@dataclass(frozen=True, eq=False)
class InternalDensity:
    rho: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def purity(self) -> float:
        return float(np.real(np.sum(self.rho * self.rho.T)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def coherence_phase(self, k: int, l: int = 0) -> float:
        """arg rho_lk: phase of level k relative to level l, in (-pi, pi]."""
        return float(np.angle(self.rho[l, k]))


def reduced_internal(state: JointState, region=None) -> InternalDensity:
    """Partial trace over position, optionally restricted to a boolean ``region`` mask."""
    psi = state.psi if region is None else state.psi[:, region]
    dim = psi.shape[0]
    rho = np.empty((dim, dim), dtype=complex)
    # explicit pairwise sums keep the reduction order fixed
    for k in range(dim):
        for l in range(k, dim):
            v = np.sum(psi[k] * psi[l].conj()) * state.grid.dx
            rho[k, l] = v
            rho[l, k] = np.conj(v)
    return InternalDensity(rho)


def visibility(rho: InternalDensity, k: int = 0, l: int = 1) -> float:
    """Interference contrast 2|rho_kl|.

    Clamped to [0, 1] when the two populations are equal (an equal-amplitude
    preparation), raw otherwise.
    """
    d = rho.dim
    if not (0 <= k < d and 0 <= l < d):
        raise IndexOutOfRange(f"levels ({k}, {l}) outside 0..{d - 1}")
    if k == l:
        raise InvalidInput("visibility needs two distinct levels")
    v = 2.0 * abs(rho.rho[k, l])
    if abs(rho.rho[k, k].real - rho.rho[l, l].real) < 1e-9:
        v = min(max(v, 0.0), 1.0)
    return float(v)


def analytic_visibility(de: float, dx: float, t: float, constants: Constants) -> float:
    """|cos(g dx dE t / (2 hbar c^2))| for a two-level clock split across two heights."""
    c2 = constants.c ** 2
    return abs(math.cos(constants.g * dx * de * t / (2.0 * constants.hbar * c2)))


def first_visibility_zero(de: float, dx: float, constants: Constants) -> float:
    """t = pi hbar c^2 / (g dx dE)."""
    if de == 0 or dx == 0 or constants.g == 0:
        return math.inf
    return math.pi * constants.hbar * constants.c ** 2 / abs(constants.g * dx * de)


def redshift_from_phases(phi_low: float, phi_high: float, e0: float, t: float,
                         constants: Constants) -> float:
    """Fractional frequency difference of two clocks with gap ``e0`` after time ``t``."""
    if not t > 0:
        raise InvalidInput("t must be > 0")
    if e0 == 0:
        raise InvalidInput("E0 must be nonzero")
    return (phi_high - phi_low) * constants.hbar / (e0 * t)


def analytic_redshift(h: float, constants: Constants) -> float:
    """g h / c^2."""
    return constants.g * h / constants.c ** 2


def fidelity(a: JointState, b: JointState) -> float:
    """|<a|b>| summed over internal levels."""
    if a.grid != b.grid or a.levels != b.levels:
        raise InvalidInput("states live on different spaces")
    return float(abs(np.sum(a.psi.conj() * b.psi) * a.grid.dx))
