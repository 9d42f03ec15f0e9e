"""Fast invariant checks behind ``gravclock selftest`` (a few seconds)."""
from __future__ import annotations

import io

import numpy as np

from .classical import ClassicalState, energy, integrate
from .model import (
    CancellingLinear,
    Constants,
    Grid1D,
    HardFloor,
    Harmonic,
    InternalClockSpec,
    build_blocks,
    potential_profile,
)
from .observables import analytic_redshift, reduced_internal
from .output import write_series_csv
from .quantum import (
    JointState,
    Propagator,
    bouncer_levels_airy,
    eigensolve_fd,
    gaussian_packet,
)
from .scenarios import evolve


def _cancellation():
    c = Constants.dimensionless()
    worst = max(abs(potential_profile(CancellingLinear(), c, e, x) - e)
                for e in (0.0, 0.1, 0.3) for x in np.linspace(-50, 50, 101))
    return worst == 0.0, f"max |V_k - E_k| = {worst:.3g}"


def _unitarity_and_reversal():
    c = Constants.dimensionless()
    grid = Grid1D(-16, 16, 256)
    clock = InternalClockSpec((0.0, 0.1))
    blocks = build_blocks(clock, Harmonic(0.0, 1.0), c, grid)
    state = JointState.product(grid, gaussian_packet(grid, 1.0, 0.8, 0.5), clock.amplitudes)
    fwd = Propagator(blocks, 1e-3).advance(state.psi, 2000)
    back = Propagator(blocks, 1e-3)
    # reversal: conjugate, evolve forward, conjugate back
    rev = np.conj(back.advance(np.conj(fwd), 2000))
    drift = abs(np.sum(np.abs(fwd) ** 2) * grid.dx - 1.0)
    err = float(np.max(np.abs(rev - state.psi)))
    return drift < 1e-10 and err < 1e-9, f"norm drift {drift:.2e}, reversal error {err:.2e}"


def _bouncer_spectrum():
    c = Constants.dimensionless()
    grid = Grid1D(0.0, 12.0, 1024)
    block = build_blocks(InternalClockSpec((0.0, 0.1)), HardFloor(0.0), c, grid)[0]
    fd = eigensolve_fd(block, 3).energies
    airy = np.array(bouncer_levels_airy(c, 3))
    rel = float(np.max(np.abs(fd - airy) / airy))
    return rel < 1e-4, f"max relative deviation from Airy levels {rel:.2e}"


def _redshift_oracle():
    z = analytic_redshift(1.0, Constants.si())
    text = f"{z:.5g}"
    return text == "1.0915e-16", f"g h / c^2 at 1 m = {text}"


def _purity():
    # equal weights: tr rho^2 = (1 + |<psi_0|psi_1>|^2) / 2 for per-level unit packets
    c = Constants.dimensionless()
    grid = Grid1D(-20, 20, 256)
    clock = InternalClockSpec((0.0, 0.5))
    blocks = build_blocks(clock, Harmonic(0.0, 1.0), c, grid)
    state = JointState.product(grid, gaussian_packet(grid, 2.0, 0.5), clock.amplitudes)
    state, _ = evolve(state, blocks, 1e-2, 500, 50)
    u = state.psi / np.sqrt(state.populations())[:, None]
    overlap = abs(np.sum(u[0].conj() * u[1]) * grid.dx)
    expected = 0.5 * (1.0 + overlap ** 2)
    err = abs(reduced_internal(state).purity - expected)
    return err < 1e-12, f"purity {expected:.12f}, identity error {err:.2e}"


def _leapfrog_energy():
    c = Constants.dimensionless()
    spec = Harmonic(0.0, 1.0)
    start = ClassicalState(x=1.0, p=0.0)
    traj = integrate(start, 0.0, spec, c, 1e-3, 20000, 100)
    e = [energy(s, 0.0, spec, c) for s in traj.states]
    drift = max(abs(v - e[0]) for v in e) / abs(e[0])
    return drift < 1e-6, f"relative energy drift {drift:.2e}"


def _csv_roundtrip():
    c = Constants.dimensionless()
    grid = Grid1D(-16, 16, 128)
    clock = InternalClockSpec((0.0, 0.1))
    blocks = build_blocks(clock, Harmonic(0.0, 1.0), c, grid)
    state = JointState.product(grid, gaussian_packet(grid, 0.3, 1.0, 0.2), clock.amplitudes)
    _, series = evolve(state, blocks, 1e-2, 30, 10)
    buf = io.StringIO()
    write_series_csv(series, buf)
    lines = buf.getvalue().splitlines()
    values = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    original = np.column_stack([col for _, col in series.columns()])
    same = values.shape == original.shape and np.array_equal(values, original)
    return same and len(lines) == 5, f"{len(lines)} lines, bit-identical={same}"


CHECKS = [
    ("cancellation_exact", _cancellation),
    ("unitarity_reversibility", _unitarity_and_reversal),
    ("bouncer_spectrum", _bouncer_spectrum),
    ("redshift_oracle", _redshift_oracle),
    ("purity_overlap_identity", _purity),
    ("leapfrog_energy", _leapfrog_energy),
    ("csv_roundtrip", _csv_roundtrip),
]


def run_selftest():
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't crash the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out


__all__ = ["run_selftest", "CHECKS"]
