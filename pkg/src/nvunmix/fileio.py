"""Readers and writers for the spec-csv v1 and plmap v1 formats, plus run reports.

Floats are written with ``repr`` so save/load round trips are bit-exact.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ClampedNegativeWarning, ParseError
from .maps import PLMap
from .spectrum import Spectrum

__all__ = [
    "SPEC_CSV_HEADER",
    "save_spectrum",
    "load_spectrum",
    "save_map",
    "load_map",
    "map_paths",
    "RunReport",
]

SPEC_CSV_HEADER = "# spec-csv v1"

_NEGATIVE_MODES = ("error", "clamp", "allow")


def _check_negative_mode(mode: str) -> None:
    if mode not in _NEGATIVE_MODES:
        raise ValueError(f"negative mode must be one of {_NEGATIVE_MODES}, got {mode!r}")


def save_spectrum(s: Spectrum, path: str | os.PathLike) -> None:
    """Write a spectrum as spec-csv v1 (wavelength_nm,intensity rows)."""
    lines = [SPEC_CSV_HEADER]
    lines.extend(
        f"{w!r},{y!r}" for w, y in zip(s.wavelengths.tolist(), s.intensities.tolist())
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_spectrum(path: str | os.PathLike, *, negative: str = "error") -> Spectrum:
    """Read a spec-csv v1 file.

    ``negative`` controls how negative intensities are treated: ``"error"``
    rejects the file (raw measurements must be nonnegative), ``"clamp"`` sets
    them to zero with a warning, ``"allow"`` keeps them (use for computed
    difference spectra).
    """
    _check_negative_mode(negative)
    wavelengths: list[float] = []
    intensities: list[float] = []
    line_nos: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {n}: expected 2 fields, got {len(parts)}")
            try:
                w, y = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ParseError(f"{path}: line {n}: {exc}") from exc
            if not (math.isfinite(w) and math.isfinite(y)):
                raise ParseError(f"{path}: line {n}: non-finite value")
            if wavelengths and w <= wavelengths[-1]:
                raise ParseError(
                    f"{path}: line {n}: wavelength {w!r} does not increase past {wavelengths[-1]!r}"
                )
            wavelengths.append(w)
            intensities.append(y)
            line_nos.append(n)
    if not wavelengths:
        raise ParseError(f"{path}: no data rows")
    values = np.array(intensities)
    if np.any(values < 0.0):
        first = int(np.argmax(values < 0.0))
        if negative == "error":
            raise ParseError(
                f"{path}: line {line_nos[first]}: negative intensity {values[first]!r} "
                "(pass negative='clamp' or 'allow' for computed spectra)"
            )
        if negative == "clamp":
            warnings.warn(
                f"{path}: clamped {int(np.count_nonzero(values < 0.0))} negative intensities to 0",
                ClampedNegativeWarning,
                stacklevel=2,
            )
            values = np.maximum(values, 0.0)
    return Spectrum(np.array(wavelengths), values)


def map_paths(path: str | os.PathLike) -> tuple[str, str]:
    """Resolve a plmap stem, .json, or .csv path to its (json, csv) pair."""
    p = str(path)
    for ext in (".json", ".csv"):
        if p.endswith(ext):
            p = p[: -len(ext)]
            break
    return p + ".json", p + ".csv"


def save_map(m: PLMap, path: str | os.PathLike) -> tuple[str, str]:
    """Write a map as plmap v1: a JSON sidecar plus a CSV grid of floats."""
    json_path, csv_path = map_paths(path)
    sidecar = {
        "format": "plmap",
        "version": 1,
        "width": m.width,
        "height": m.height,
        "pixel_pitch_um": m.pixel_pitch_um,
    }
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        for row in m.values:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")
    return json_path, csv_path


def load_map(path: str | os.PathLike, *, negative: str = "allow") -> PLMap:
    """Read a plmap v1 map addressed by stem, sidecar, or CSV path.

    Negative pixels are allowed by default because unmixed maps carry
    diagnostic negatives; pass ``negative="error"`` for raw acquisitions.
    """
    _check_negative_mode(negative)
    json_path, csv_path = map_paths(path)
    try:
        with open(json_path, "r", encoding="utf-8") as fh:
            sidecar = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{json_path}: invalid JSON sidecar: {exc}") from exc
    if sidecar.get("format") != "plmap" or sidecar.get("version") != 1:
        raise ParseError(f"{json_path}: not a plmap v1 sidecar")
    try:
        width = int(sidecar["width"])
        height = int(sidecar["height"])
        pitch = float(sidecar["pixel_pitch_um"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{json_path}: bad sidecar fields: {exc}") from exc

    rows: list[list[float]] = []
    with open(csv_path, "r", encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != width:
                raise ParseError(
                    f"{csv_path}: line {n}: expected {width} cells, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(f"{csv_path}: line {n}: {exc}") from exc
    if len(rows) != height:
        raise ParseError(
            f"{csv_path}: expected {height} rows for a {width}x{height} map, got {len(rows)}"
        )
    values = np.array(rows)
    if not np.all(np.isfinite(values)):
        raise ParseError(f"{csv_path}: non-finite cell value")
    if np.any(values < 0.0):
        if negative == "error":
            raise ParseError(f"{csv_path}: negative pixel values present")
        if negative == "clamp":
            warnings.warn(
                f"{csv_path}: clamped {int(np.count_nonzero(values < 0.0))} negative pixels to 0",
                ClampedNegativeWarning,
                stacklevel=2,
            )
            values = np.maximum(values, 0.0)
    return PLMap(values, pitch)


def _sha256(path: str | os.PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunReport:
    """Record of one CLI run: inputs (with hashes), effective parameters,
    produced outputs, and diagnostics."""

    command: str
    inputs: list[tuple[str, str]] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    timestamp: str = ""

    @classmethod
    def create(
        cls,
        command: str,
        input_paths: list[str],
        parameters: dict,
        outputs: list[str],
        diagnostics: dict,
    ) -> "RunReport":
        return cls(
            command=command,
            inputs=[(p, _sha256(p)) for p in input_paths],
            parameters=dict(parameters),
            outputs=list(outputs),
            diagnostics=dict(diagnostics),
            timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        )

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": [list(pair) for pair in self.inputs],
            "parameters": self.parameters,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            command=str(d.get("command", "")),
            inputs=[tuple(pair) for pair in d.get("inputs", [])],
            parameters=dict(d.get("parameters", {})),
            outputs=list(d.get("outputs", [])),
            diagnostics=dict(d.get("diagnostics", {})),
            timestamp=str(d.get("timestamp", "")),
        )

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunReport":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid report JSON: {exc}") from exc
