"""gravclock command line.

    gravclock simulate run.cfg --out results/
    gravclock eigen run.cfg --n 5 --out spectra/
    gravclock analytic redshift --height 1 --si
    gravclock analytic visibility --de 0.1 --dx 5 --t 10 20 30
    gravclock selftest

Exit status is 0 on success, 1 for bad input (usage, parse, validation,
missing config) and 2 when output cannot be written.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time

from . import __version__
from .config import build_constants, build_system, config_hash, parse_config, parse_sections
from .errors import ConfigInvalid, GravClockError, InvalidInput, IoError, NotConfining
from .model import Constants, HardFloor, build_blocks
from .observables import analytic_redshift, analytic_visibility
from .output import RunManifest, _open, emit_csv, ensure_dir, fmt
from .quantum import bouncer_levels_airy, eigensolve_fd
from .scenarios import run_scenario


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path) -> str:
    if not os.path.exists(path):
        raise InvalidInput(f"config file not found: {path}")
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read config {path}: {exc.strerror or exc}") from exc


def cmd_simulate(args) -> int:
    start = time.perf_counter()
    cfg = parse_config(_read(args.config))
    result = run_scenario(cfg)
    manifest = RunManifest(config_path=args.config, output_dir=args.out,
                           version=__version__, config_hash=config_hash(cfg))
    emit_csv(result, args.out, manifest)
    manifest.duration = time.perf_counter() - start
    manifest.write()
    manifest.files.append("manifest.txt")
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: value={c.value:.10g} expected={c.expected:.10g} "
              f"error={c.error:.3g} tol={c.tolerance:.3g}")
    print(f"wrote {len(manifest.files)} files to {args.out}")
    return 0


def cmd_eigen(args) -> int:
    start = time.perf_counter()
    text = _read(args.config)
    sections = parse_sections(text)
    constants, clock, potential, grid = build_system(sections)
    if args.n < 1:
        raise InvalidInput("--n must be >= 1")
    blocks = build_blocks(clock, potential, constants, grid)
    bouncing = isinstance(potential, HardFloor) and constants.g > 0
    ensure_dir(args.out)
    files = []
    for block in blocks:
        try:
            spec = eigensolve_fd(block, args.n)
        except NotConfining as exc:
            raise InvalidInput(f"level {block.level}: {exc}") from exc
        airy = _airy_reference(block, potential.floor, args.n) if bouncing else None
        name = f"energies_level{block.level}.csv"
        with _open(os.path.join(args.out, name)) as fh:
            fh.write("n,energy" + (",airy_reference" if airy else "") + "\n")
            for j, e in enumerate(spec.energies):
                row = [str(j + 1), fmt(e)]
                if airy:
                    row.append(fmt(airy[j]))
                fh.write(",".join(row) + "\n")
        files.append(name)
        name = f"wavefunctions_level{block.level}.csv"
        with _open(os.path.join(args.out, name)) as fh:
            fh.write("x," + ",".join(f"psi_{j + 1}" for j in range(args.n)) + "\n")
            for i, x in enumerate(grid.x):
                fh.write(fmt(x) + "," + ",".join(fmt(v) for v in spec.wavefunctions[:, i]) + "\n")
        files.append(name)
    manifest = RunManifest(config_path=args.config, output_dir=args.out, files=files,
                           duration=time.perf_counter() - start, version=__version__,
                           config_hash=_sections_hash(sections))
    manifest.write()
    print(f"wrote {len(files) + 1} files to {args.out}")
    return 0


def _airy_reference(block, floor, n):
    """Continuum bouncer levels of one block: effective mass 1/(2 a_k), force = slope."""
    mass = 1.0 / (2.0 * block.kinetic)
    eff = Constants(c=1.0, g=block.slope / mass, hbar=block.hbar, m=mass)
    return [e + block.energy + block.slope * floor for e in bouncer_levels_airy(eff, n)]


def _sections_hash(sections) -> str:
    constants, clock, potential, grid = build_system(sections)
    return hashlib.sha256(repr((constants, clock, potential, grid)).encode()).hexdigest()


def _constants(args) -> Constants:
    if args.si:
        return Constants.si()
    if args.constants:
        return build_constants(parse_sections(_read(args.constants)))
    return Constants.dimensionless()


def cmd_redshift(args) -> int:
    z = analytic_redshift(args.height, _constants(args))
    print(f"{z:.{args.digits}g}")
    return 0


def cmd_visibility(args) -> int:
    constants = _constants(args)
    for t in args.t:
        v = analytic_visibility(args.de, args.dx, t, constants)
        print(f"{t:.{args.digits}g} {v:.{args.digits}g}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gravclock", description="Clocks in gravity: simulations and oracles.")
    p.add_argument("--version", action="version", version=f"gravclock {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a scenario from a config file")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eigen", help="finite-difference spectra of each block")
    e.add_argument("config")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eigen)

    a = sub.add_parser("analytic", help="closed-form oracles")
    asub = a.add_subparsers(dest="which", required=True, parser_class=_Parser)

    def units(q):
        g = q.add_mutually_exclusive_group()
        g.add_argument("--si", action="store_true", help="SI units, neutron mass")
        g.add_argument("--constants", metavar="FILE", help="config file with a [units] section")
        q.add_argument("--digits", type=int, default=5)

    r = asub.add_parser("redshift", help="g h / c^2")
    r.add_argument("--height", type=float, required=True)
    units(r)
    r.set_defaults(func=cmd_redshift)

    v = asub.add_parser("visibility", help="|cos(g dx dE t / 2 hbar c^2)|")
    v.add_argument("--de", type=float, required=True)
    v.add_argument("--dx", type=float, required=True)
    v.add_argument("--t", type=float, nargs="+", required=True)
    units(v)
    v.set_defaults(func=cmd_visibility)

    st = sub.add_parser("selftest", help="quick invariant checks")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except IoError as exc:
        print(f"gravclock: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ConfigInvalid, InvalidInput) as exc:
        print(f"gravclock: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except GravClockError as exc:
        print(f"gravclock: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


__all__ = ["main", "build_parser"]
