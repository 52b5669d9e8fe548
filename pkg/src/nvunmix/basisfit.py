"""Nonnegative two-component fits and field-sweep scale-factor analysis.

A measured spectrum is modeled as a nonnegative linear combination of the two
unit-area basis spectra. With only two variables, the nonnegative least
squares problem is solved exactly: take the unconstrained 2x2 normal-equation
solution, and if a coefficient goes negative, re-solve on each boundary and
keep the feasible solution with the smaller residual.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import (
    FlatWarning,
    GridMismatchError,
    IdentifiabilityError,
    NoMinimumError,
    NonPhysicalWarning,
    SingularityError,
    ValidationError,
)
from .spectrum import BasisPair, Spectrum, resample

__all__ = [
    "FieldSeries",
    "CoefficientTable",
    "ScaleFactorSurface",
    "fit_coefficients",
    "fit_series",
    "scale_factor_from_coefficients",
    "scale_factor_from_nvminus",
    "scale_factor_surface",
    "find_full_mixing_field",
]


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """(field in gauss, spectrum) pairs sorted by ascending field.

    Fields must be distinct and positive and all spectra must share one grid;
    use :meth:`ingest` to resample heterogeneous inputs onto a common grid.
    """

    entries: tuple[tuple[float, Spectrum], ...]

    def __post_init__(self) -> None:
        entries = tuple(sorted(((float(b), s) for b, s in self.entries), key=lambda e: e[0]))
        object.__setattr__(self, "entries", entries)
        bs = [b for b, _ in entries]
        if any(not np.isfinite(b) or b <= 0.0 for b in bs):
            raise ValidationError("field values must be positive and finite")
        if len(set(bs)) != len(bs):
            raise ValidationError("field values must be distinct")
        for _, s in entries[1:]:
            if not np.array_equal(s.wavelengths, entries[0][1].wavelengths):
                raise GridMismatchError("series spectra are on different grids; use ingest()")

    @classmethod
    def ingest(cls, entries: Sequence[tuple[float, Spectrum]]) -> "FieldSeries":
        """Build a series, resampling every spectrum onto a shared grid.

        The target is the first spectrum's grid restricted to the wavelength
        range common to all entries.
        """
        if len(entries) == 0:
            return cls(())
        lo = max(s.span[0] for _, s in entries)
        hi = min(s.span[1] for _, s in entries)
        base = entries[0][1].wavelengths
        grid = base[(base >= lo) & (base <= hi)]
        if grid.size < 2:
            raise ValidationError("series spectra share no usable wavelength range")
        return cls(tuple((b, resample(s, grid)) for b, s in entries))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def fields(self) -> tuple[float, ...]:
        return tuple(b for b, _ in self.entries)


class CoefficientRow(NamedTuple):
    b_field: float
    c0: float
    cminus: float
    residual: float


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Per-field fitted contributions of each charge state."""

    b_fields: NDArray[np.float64]
    c0: NDArray[np.float64]
    cminus: NDArray[np.float64]
    residuals: NDArray[np.float64]

    def __post_init__(self) -> None:
        cols = {}
        for name in ("b_fields", "c0", "cminus", "residuals"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be 1-D")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} must be finite")
            arr.flags.writeable = False
            cols[name] = arr
        n = cols["b_fields"].size
        if any(c.size != n for c in cols.values()):
            raise ValidationError("table columns must have equal length")
        if n > 1 and not np.all(np.diff(cols["b_fields"]) > 0.0):
            raise ValidationError("b_fields must be strictly increasing")
        for name, arr in cols.items():
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.b_fields.size)

    def rows(self) -> Iterator[CoefficientRow]:
        for i in range(len(self)):
            yield CoefficientRow(
                float(self.b_fields[i]),
                float(self.c0[i]),
                float(self.cminus[i]),
                float(self.residuals[i]),
            )


class ScaleFactorSurface(NamedTuple):
    """All-pairs scale factors plus the (b1, b2) pairs skipped as singular."""

    rows: tuple[tuple[float, float, float], ...]
    skipped: tuple[tuple[float, float], ...]


def fit_coefficients(
    s: Spectrum, basis: BasisPair, *, nonneg: bool = True
) -> tuple[float, float, float]:
    """Least-squares coefficients of ``s`` in the basis, and the RMS misfit.

    With ``nonneg`` (the default) coefficients are constrained to be
    nonnegative; pass ``nonneg=False`` for the plain unconstrained fit.
    """
    if not np.array_equal(s.wavelengths, basis.grid):
        raise GridMismatchError("spectrum and basis are on different grids")
    a0 = basis.s0.intensities
    a1 = basis.sminus.intensities
    y = s.intensities
    g00 = float(a0 @ a0)
    g11 = float(a1 @ a1)
    g01 = float(a0 @ a1)
    if g00 <= 0.0 or g11 <= 0.0:
        raise IdentifiabilityError("basis spectrum has zero norm")
    # sin of the angle between basis columns, computed stably.
    ortho = a1 - (g01 / g00) * a0
    sin_angle = float(np.linalg.norm(ortho)) / np.sqrt(g11)
    if sin_angle <= 1e-6:
        raise IdentifiabilityError(
            f"basis spectra are collinear (angle ~{sin_angle:.2e} rad)"
        )
    h0 = float(a0 @ y)
    h1 = float(a1 @ y)
    det = g00 * g11 - g01 * g01
    c0 = (g11 * h0 - g01 * h1) / det
    c1 = (g00 * h1 - g01 * h0) / det

    def rms(u0: float, u1: float) -> float:
        r = y - u0 * a0 - u1 * a1
        return float(np.linalg.norm(r)) / np.sqrt(y.size)

    if not nonneg or (c0 >= 0.0 and c1 >= 0.0):
        return c0, c1, rms(c0, c1)
    candidates = [(max(h0 / g00, 0.0), 0.0), (0.0, max(h1 / g11, 0.0))]
    u0, u1 = min(candidates, key=lambda c: rms(*c))
    return u0, u1, rms(u0, u1)


def fit_series(
    series: FieldSeries,
    basis: BasisPair,
    *,
    nonneg: bool = True,
    max_workers: int | None = None,
) -> CoefficientTable:
    """Fit every series entry; row order follows the (ascending-field) series.

    Entries are independent, so ``max_workers > 1`` fans the fits out across a
    thread pool with identical results. Defaults to the NVUNMIX_THREADS
    environment variable, else serial.
    """
    if len(series) == 0:
        raise ValidationError("cannot fit an empty series")
    if max_workers is None:
        max_workers = int(os.environ.get("NVUNMIX_THREADS", "1"))
    spectra = [s for _, s in series.entries]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            fits = list(pool.map(lambda s: fit_coefficients(s, basis, nonneg=nonneg), spectra))
    else:
        fits = [fit_coefficients(s, basis, nonneg=nonneg) for s in spectra]
    return CoefficientTable(
        np.array(series.fields),
        np.array([f[0] for f in fits]),
        np.array([f[1] for f in fits]),
        np.array([f[2] for f in fits]),
    )


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not np.isfinite(v):
            raise ValidationError(f"{name} must be finite")


def scale_factor_from_coefficients(
    c0_1: float, cm_1: float, c0_2: float, cm_2: float
) -> float:
    """Scale factor for a field change, from both coefficients at both fields.

    The denominator is grouped as (c0_1 - c0_2) + (cm_1 - cm_2) so that a
    field-independent neutral-state amplitude cancels exactly and the result
    reduces bitwise to :func:`scale_factor_from_nvminus`.
    """
    _check_finite(c0_1=c0_1, cm_1=cm_1, c0_2=c0_2, cm_2=cm_2)
    den = (c0_1 - c0_2) + (cm_1 - cm_2)
    if den == 0.0:
        raise SingularityError(
            "total PL is identical at both fields; the scale factor is undefined"
        )
    f = cm_1 / den
    if f <= 0.0:
        warnings.warn(
            f"scale factor {f:.4g} is not positive; the NV- PL increased with field",
            NonPhysicalWarning,
            stacklevel=2,
        )
    return f


def scale_factor_from_nvminus(cm_1: float, cm_2: float) -> float:
    """Scale factor when the neutral-state amplitude is field-independent."""
    _check_finite(cm_1=cm_1, cm_2=cm_2)
    den = cm_1 - cm_2
    if den == 0.0:
        raise SingularityError("equal NV- amplitudes; the scale factor is undefined")
    f = cm_1 / den
    if f <= 0.0:
        warnings.warn(
            f"scale factor {f:.4g} is not positive; the NV- PL increased with field",
            NonPhysicalWarning,
            stacklevel=2,
        )
    return f


def scale_factor_surface(table: CoefficientTable) -> ScaleFactorSurface:
    """Scale factor for every field pair (b1, b2) with b2 > b1.

    Pairs with equal NV- amplitudes are singular; they are omitted from the
    rows and reported in ``skipped``.
    """
    if len(table) < 2:
        raise ValidationError("surface needs at least two table rows")
    rows: list[tuple[float, float, float]] = []
    skipped: list[tuple[float, float]] = []
    b = table.b_fields
    cm = table.cminus
    for i in range(len(table)):
        for j in range(i + 1, len(table)):
            den = float(cm[i]) - float(cm[j])
            if den == 0.0:
                skipped.append((float(b[i]), float(b[j])))
            else:
                rows.append((float(b[i]), float(b[j]), float(cm[i]) / den))
    return ScaleFactorSurface(tuple(rows), tuple(skipped))


def find_full_mixing_field(table: CoefficientTable, *, refine: bool = False) -> float:
    """Field of minimum NV- amplitude, i.e. the fully spin-mixed point.

    Ties break toward the lower field. A flat column returns the lowest field
    with a FlatWarning; a monotone column has no detectable minimum and
    raises. With ``refine`` a parabola through the minimum and its neighbors
    sharpens the estimate (interior minima only).
    """
    if len(table) < 3:
        raise ValidationError("minimum detection needs at least three rows")
    cm = table.cminus
    b = table.b_fields
    if float(np.ptp(cm)) == 0.0:
        warnings.warn(
            "NV- amplitude is flat across the sweep; returning the lowest field",
            FlatWarning,
            stacklevel=2,
        )
        return float(b[0])
    steps = np.diff(cm)
    if np.all(steps <= 0.0) or np.all(steps >= 0.0):
        raise NoMinimumError("NV- amplitude is monotone; no interior minimum")
    i = int(np.argmin(cm))
    if refine and 0 < i < len(table) - 1:
        x0, x1, x2 = b[i - 1], b[i], b[i + 1]
        y0, y1, y2 = cm[i - 1], cm[i], cm[i + 1]
        num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
        den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
        if den != 0.0:
            return float(x1 - 0.5 * num / den)
    return float(b[i])
