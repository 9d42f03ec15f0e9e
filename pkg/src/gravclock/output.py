"""CSV and key=value serialization of scenario results."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import IoError
from .scenarios import ScenarioResult, Series


def fmt(v) -> str:
    """Round-trippable decimal text for a double (17 significant digits)."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def write_series_csv(series: Series, fh) -> None:
    cols = series.columns()
    fh.write(",".join(name for name, _ in cols) + "\n")
    data = [np.asarray(v, dtype=float) for _, v in cols]
    for i in range(len(series)):
        fh.write(",".join(fmt(col[i]) for col in data) + "\n")


def write_extra_csv(extra: dict, t: np.ndarray, fh) -> None:
    """Auxiliary per-sample arrays; complex columns split into _re and _im."""
    names, cols = ["t"], [np.asarray(t, dtype=float)]
    for key in sorted(extra):
        arr = np.asarray(extra[key])
        if arr.ndim != 1 or arr.shape[0] != len(t):
            continue
        if np.iscomplexobj(arr):
            names += [f"{key}_re", f"{key}_im"]
            cols += [arr.real, arr.imag]
        else:
            names.append(key)
            cols.append(arr.astype(float))
    fh.write(",".join(names) + "\n")
    for i in range(len(t)):
        fh.write(",".join(fmt(c[i]) for c in cols) + "\n")


def write_summary(result: ScenarioResult, fh) -> None:
    fh.write(f"kind={result.kind}\n")
    for key, v in result.summary.items():
        fh.write(f"{key}={fmt(v) if isinstance(v, (float, int, np.floating)) else v}\n")
    for c in result.checks:
        fh.write(f"check.{c.name}.value={fmt(c.value)}\n")
        fh.write(f"check.{c.name}.expected={fmt(c.expected)}\n")
        fh.write(f"check.{c.name}.error={fmt(c.error)}\n")
        fh.write(f"check.{c.name}.tolerance={fmt(c.tolerance)}\n")
        fh.write(f"check.{c.name}.passed={'true' if c.passed else 'false'}\n")
    fh.write(f"passed={'true' if result.passed else 'false'}\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(v) for v in line.rstrip("\n").split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


@dataclass
class RunManifest:
    config_path: str
    output_dir: str
    files: list = field(default_factory=list)
    duration: float = 0.0
    version: str = ""
    config_hash: str = ""

    def missing(self) -> list:
        return [f for f in self.files if not os.path.exists(os.path.join(self.output_dir, f))]

    def write(self, name="manifest.txt") -> str:
        path = os.path.join(self.output_dir, name)
        lines = [f"config={self.config_path}", f"output_dir={self.output_dir}",
                 f"version={self.version}", f"config_hash={self.config_hash}",
                 f"duration_s={self.duration:.3f}"]
        lines += [f"file={f}" for f in self.files]
        with _open(path) as fh:
            fh.write("\n".join(lines) + "\n")
        return path


def _open(path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def ensure_dir(path) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc


def emit_csv(result: ScenarioResult, out_dir, manifest: RunManifest | None = None) -> list:
    """Write one CSV per series plus summary.txt; returns the file names written."""
    ensure_dir(out_dir)
    files = []
    for label in sorted(result.series):
        series = result.series[label]
        name = f"{label}.csv"
        with _open(os.path.join(out_dir, name)) as fh:
            write_series_csv(series, fh)
        files.append(name)
        if series.extra:
            name = f"{label}_extra.csv"
            with _open(os.path.join(out_dir, name)) as fh:
                write_extra_csv(series.extra, series.t, fh)
            files.append(name)
    with _open(os.path.join(out_dir, "summary.txt")) as fh:
        write_summary(result, fh)
    files.append("summary.txt")
    if manifest is not None:
        manifest.files.extend(files)
    return files
