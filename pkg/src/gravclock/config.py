"""Section-based key/value configuration files.

Example::

    # two trapped clocks five units apart
    [units]
    c = 10
    g = 1

    [clock]
    levels = [0, 0.1]
    amplitudes = [0.7071067811865476, 0, 0.7071067811865476, 0]

    [potential]
    kind = harmonic
    omega = 1

    [grid]
    x_min = -16
    x_max = 24
    n = 1024

    [evolution]
    dt = 1e-3
    steps = 100000

    [scenario]
    kind = fixed_height_clocks
    separation = 5

Lists are bracketed and comma separated.  Complex amplitudes are written as
consecutive ``re, im`` pairs.  ``#`` and ``;`` start comments.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

from .errors import ConfigInvalid, InvalidInput, ParseError, ValidationError
from .model import (
    POTENTIAL_KINDS,
    Constants,
    Grid1D,
    HardFloor,
    Harmonic,
    InternalClockSpec,
)
from .scenarios import (
    DEFAULT_TOLERANCES,
    KINDS,
    ScenarioConfig,
    ScenarioParams,
    _sigma,
    validate_config,
)

SECTIONS = {
    "units": {"c", "g", "hbar", "m"},
    "clock": {"levels", "amplitudes"},
    "potential": {"kind", "center", "omega", "floor"},
    "grid": {"x_min", "x_max", "n"},
    "evolution": {"dt", "steps", "record_every"},
    "scenario": {"kind", "height", "separation", "momenta", "sigma", "states",
                 "initial"} | {f"tol_{name}" for tols in DEFAULT_TOLERANCES.values()
                               for name in tols},
}

POTENTIAL_KEYS = {
    "zero": set(),
    "mass_only_linear": set(),
    "cancelling_linear": set(),
    "harmonic": {"center", "omega"},
    "hard_floor": {"floor"},
}

SCENARIO_KEYS = {
    "fixed_height_clocks": {"height", "separation", "sigma", "initial"},
    "cancellation_control": {"height", "separation", "sigma", "initial"},
    "superposition_interference": {"height", "separation", "sigma", "initial"},
    "bouncer_clock": {"states", "initial"},
    "moving_clock": {"height", "momenta", "sigma"},
}

DEFAULT_UNITS = {"c": 10.0, "g": 1.0, "hbar": 1.0, "m": 1.0}

_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Value:
    raw: str
    line: int
    column: int

    def error(self, message):
        return ParseError(message, self.line, self.column)

    def real(self) -> float:
        try:
            v = float(self.raw)
        except ValueError:
            raise self.error(f"expected a number, got {self.raw!r}") from None
        if not math.isfinite(v):
            raise self.error(f"non-finite number {self.raw!r}")
        return v

    def integer(self) -> int:
        try:
            return int(self.raw)
        except ValueError:
            v = self.real()
            if v != int(v):
                raise self.error(f"expected an integer, got {self.raw!r}") from None
            return int(v)

    def word(self) -> str:
        if not _KEY.match(self.raw):
            raise self.error(f"expected a bare word, got {self.raw!r}")
        return self.raw

    def items(self) -> list[Value]:
        text = self.raw
        if not (text.startswith("[") and text.endswith("]")):
            raise self.error("expected a bracketed list like [a, b]")
        body = text[1:-1]
        if not body.strip():
            return []
        out, offset = [], 1
        for part in body.split(","):
            stripped = part.strip()
            if not stripped:
                raise ParseError("empty list element", self.line,
                                 self.column + offset)
            lead = len(part) - len(part.lstrip())
            out.append(Value(stripped, self.line, self.column + offset + lead))
            offset += len(part) + 1
        return out

    def reals(self) -> list[float]:
        return [v.real() for v in self.items()]


def parse_sections(text: str) -> dict[str, dict[str, Value]]:
    """Split config text into sections of raw values; syntax errors only."""
    sections: dict[str, dict[str, Value]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = re.split(r"[#;]", line, maxsplit=1)[0].rstrip()
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        stripped = body.strip()
        m = _SECTION.match(stripped)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise ParseError(f"unknown section [{name}]", lineno, indent + 1)
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", lineno, indent + 1)
            sections[name] = {}
            current = name
            continue
        if "=" not in stripped:
            raise ParseError("expected 'key = value' or '[section]'", lineno, indent + 1)
        if current is None:
            raise ParseError("key outside of any section", lineno, indent + 1)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not _KEY.match(key):
            raise ParseError(f"malformed key {key!r}", lineno, indent + 1)
        if key not in SECTIONS[current]:
            raise ParseError(f"unknown key {key!r} in [{current}]", lineno, indent + 1)
        if key in sections[current]:
            raise ParseError(f"duplicate key {key!r}", lineno, indent + 1)
        raw = value.strip()
        if not raw:
            raise ParseError(f"missing value for {key!r}", lineno, len(body) + 1)
        col = indent + stripped.index("=") + 2 + (len(value) - len(value.lstrip()))
        sections[current][key] = Value(raw, lineno, col)
    return sections


def _require(sections, section, key):
    try:
        return sections[section][key]
    except KeyError:
        raise ValidationError(f"missing required key {key!r}", f"{section}.{key}") from None


def _check_allowed(sec: dict, allowed: set, section: str, kind: str):
    for key, val in sec.items():
        if key != "kind" and key not in allowed:
            raise ValidationError(f"key {key!r} does not apply to {kind} "
                                  f"(line {val.line})", f"{section}.{key}")


def _validated(field, build):
    try:
        return build()
    except InvalidInput as exc:
        raise ValidationError(f"{type(exc).__name__}: {exc}", field) from exc


def build_constants(sections) -> Constants:
    units = sections.get("units", {})
    vals = {k: units[k].real() if k in units else v for k, v in DEFAULT_UNITS.items()}
    return _validated("units", lambda: Constants(**vals))


def build_system(sections):
    """(constants, clock, potential, grid) from parsed sections."""
    constants = build_constants(sections)

    clock_sec = sections.get("clock", {})
    levels = _require(sections, "clock", "levels").reals()
    amplitudes = None
    if "amplitudes" in clock_sec:
        val = clock_sec["amplitudes"]
        parts = val.reals()
        if len(parts) % 2:
            raise val.error("amplitudes must be re,im pairs")
        amplitudes = [complex(parts[i], parts[i + 1]) for i in range(0, len(parts), 2)]
        if len(amplitudes) != len(levels):
            raise val.error(f"arity mismatch: {len(amplitudes)} amplitude(s) "
                            f"for {len(levels)} levels")
    clock = _validated("clock", lambda: InternalClockSpec(tuple(levels), amplitudes))
    _validated("clock.levels", lambda: clock.check_low_energy(constants))

    kind_val = _require(sections, "potential", "kind")
    kind = kind_val.word()
    if kind not in POTENTIAL_KEYS:
        raise kind_val.error(f"unknown potential kind {kind!r}")
    pot_sec = sections["potential"]
    _check_allowed(pot_sec, POTENTIAL_KEYS[kind], "potential", kind)
    opts = {k: v.real() for k, v in pot_sec.items() if k != "kind"}
    potential = _validated("potential", lambda: POTENTIAL_KINDS[kind](**opts))

    grid_vals = (_require(sections, "grid", "x_min").real(),
                 _require(sections, "grid", "x_max").real(),
                 _require(sections, "grid", "n").integer())
    grid = _validated("grid", lambda: Grid1D(*grid_vals))
    if isinstance(potential, HardFloor) and not grid.x_min <= potential.floor < grid.x_max:
        raise ValidationError("HardFloor.floor must lie inside the grid domain",
                              "potential.floor")
    return constants, clock, potential, grid


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario configuration."""
    sections = parse_sections(text)
    constants, clock, potential, grid = build_system(sections)

    evo = sections.get("evolution", {})
    dt = _require(sections, "evolution", "dt").real()
    steps = _require(sections, "evolution", "steps").integer()
    record_every = evo["record_every"].integer() if "record_every" in evo else 10

    kind_val = _require(sections, "scenario", "kind")
    kind = kind_val.word()
    if kind not in KINDS:
        raise kind_val.error(f"unknown scenario kind {kind!r}")
    sc = sections["scenario"]
    tol_keys = {f"tol_{name}" for name in DEFAULT_TOLERANCES[kind]}
    _check_allowed(sc, SCENARIO_KEYS[kind] | tol_keys, "scenario", kind)

    params = {}
    for key in ("height", "separation", "sigma"):
        if key in sc:
            params[key] = sc[key].real()
    if "momenta" in sc:
        params["momenta"] = tuple(sc["momenta"].reals())
    if "states" in sc:
        params["states"] = tuple(v.integer() for v in sc["states"].items())
    if "initial" in sc:
        params["initial"] = sc["initial"].word()
    tolerances = dict(DEFAULT_TOLERANCES[kind])
    for key in tol_keys & set(sc):
        tolerances[key[4:]] = sc[key].real()

    cfg = ScenarioConfig(kind=kind, constants=constants, clock=clock,
                         potential=potential, grid=grid, dt=dt, steps=steps,
                         record_every=record_every,
                         params=ScenarioParams(**params),
                         tolerances=tuple(sorted(tolerances.items())))
    try:
        validate_config(cfg)
    except ConfigInvalid as exc:
        raise ValidationError(str(exc)) from exc
    if cfg.params.sigma is None and kind != "bouncer_clock":
        # make the implied default explicit so equal semantics hash equally
        cfg = _with_sigma(cfg, _sigma(cfg))
    return cfg


def _with_sigma(cfg, sigma):
    from dataclasses import replace
    return replace(cfg, params=replace(cfg.params, sigma=sigma))


def canonical_text(cfg: ScenarioConfig) -> str:
    return repr(cfg)


def config_hash(cfg: ScenarioConfig) -> str:
    """SHA-256 over the validated configuration; blind to layout and comments."""
    return hashlib.sha256(canonical_text(cfg).encode()).hexdigest()


__all__ = ["parse_config", "parse_sections", "build_system", "build_constants",
           "config_hash", "canonical_text", "Harmonic"]
