"""Spectrum values, resampling, arithmetic, and trapezoid quadrature.

Every operation here is a pure function over immutable values, so spectra can
be shared freely between threads. Wavelength grids are strictly increasing but
need not be uniform; quadrature is trapezoidal on the native grid and window
edges are handled by linear interpolation of the integrand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import GridMismatchError, RangeError, ValidationError

__all__ = [
    "Spectrum",
    "WavelengthWindow",
    "BasisPair",
    "resample",
    "subtract",
    "scale",
    "area",
    "normalize_area",
]


def _as_readonly_array(values: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    arr.flags.writeable = False
    return arr


def _trapz(y: NDArray[np.float64], x: NDArray[np.float64]) -> float:
    if x.size < 2:
        return 0.0
    return float(0.5 * np.dot(np.diff(x), y[1:] + y[:-1]))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """A wavelength grid (nm, strictly increasing) with per-bin intensities (counts/s).

    Negative intensities are tolerated because computed difference spectra dip
    below zero; raw measured data is validated as nonnegative by the file
    loaders, not here.
    """

    wavelengths: NDArray[np.float64]
    intensities: NDArray[np.float64]

    def __post_init__(self) -> None:
        w = _as_readonly_array(self.wavelengths, "wavelengths")
        y = _as_readonly_array(self.intensities, "intensities")
        if w.size != y.size:
            raise ValidationError("wavelengths and intensities must have equal length")
        if w.size < 1:
            raise ValidationError("spectrum cannot be empty")
        if not np.all(np.isfinite(w)):
            raise ValidationError("wavelengths must be finite")
        if not np.all(np.isfinite(y)):
            raise ValidationError("intensities must be finite")
        if w.size > 1 and not np.all(np.diff(w) > 0.0):
            raise ValidationError("wavelengths must be strictly increasing")
        object.__setattr__(self, "wavelengths", w)
        object.__setattr__(self, "intensities", y)

    def __len__(self) -> int:
        return int(self.wavelengths.size)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.wavelengths[0]), float(self.wavelengths[-1])


@dataclass(frozen=True)
class WavelengthWindow:
    """Half-open-free wavelength interval [lo, hi] in nm."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValidationError("window bounds must be finite")
        if not self.lo < self.hi:
            raise ValidationError(f"window requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _require_same_grid(a: Spectrum, b: Spectrum) -> None:
    if not np.array_equal(a.wavelengths, b.wavelengths):
        raise GridMismatchError("spectra are on different wavelength grids; resample first")


def resample(s: Spectrum, grid: ArrayLike) -> Spectrum:
    """Interpolate ``s`` piecewise-linearly onto ``grid``.

    The target grid must lie inside the source range; extrapolation is never
    performed. Values at grid points that coincide with source points are
    reproduced exactly.
    """
    g = np.array(grid, dtype=float, copy=True).reshape(-1)
    if g.size < 1:
        raise ValidationError("resample grid is empty")
    if not np.all(np.isfinite(g)):
        raise ValidationError("resample grid must be finite")
    if g.size > 1 and not np.all(np.diff(g) > 0.0):
        raise ValidationError("resample grid must be strictly increasing")
    lo, hi = s.span
    if g[0] < lo or g[-1] > hi:
        raise RangeError(
            f"grid [{g[0]}, {g[-1]}] exceeds source range [{lo}, {hi}]"
        )
    return Spectrum(g, np.interp(g, s.wavelengths, s.intensities))


def subtract(a: Spectrum, b: Spectrum) -> Spectrum:
    """Pointwise ``a - b`` on a shared grid; the result may be negative."""
    _require_same_grid(a, b)
    return Spectrum(a.wavelengths, a.intensities - b.intensities)


def scale(s: Spectrum, k: float) -> Spectrum:
    """Pointwise ``k * s``."""
    if not np.isfinite(k):
        raise ValidationError("scale factor must be finite")
    return Spectrum(s.wavelengths, k * s.intensities)


def _window_slice(
    s: Spectrum, lo: float, hi: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Grid points strictly inside (lo, hi) plus interpolated edge values."""
    w, y = s.wavelengths, s.intensities
    gmin, gmax = s.span
    if lo < gmin or hi > gmax:
        raise RangeError(f"window [{lo}, {hi}] outside grid range [{gmin}, {gmax}]")
    inside = (w > lo) & (w < hi)
    xs = np.concatenate(([lo], w[inside], [hi]))
    ys = np.concatenate(
        ([np.interp(lo, w, y)], y[inside], [np.interp(hi, w, y)])
    )
    return xs, ys


def area(s: Spectrum, window: WavelengthWindow | None = None) -> float:
    """Trapezoid-rule integral of ``s``, optionally restricted to ``window``."""
    if window is None:
        return _trapz(s.intensities, s.wavelengths)
    xs, ys = _window_slice(s, window.lo, window.hi)
    return _trapz(ys, xs)


def normalize_area(s: Spectrum) -> Spectrum:
    """Rescale a nonnegative spectrum so its full-grid area is 1."""
    y = s.intensities
    peak = float(np.max(np.abs(y))) if y.size else 0.0
    if y.size and float(np.min(y)) < -1e-9 * peak:
        raise ValidationError("cannot area-normalize a spectrum with negative values")
    a = area(s)
    if not a > 0.0:
        raise ValidationError(f"spectrum area must be positive, got {a}")
    return scale(s, 1.0 / a)


@dataclass(frozen=True, eq=False)
class BasisPair:
    """Unit-area, nonnegative component spectra on one shared grid.

    ``s0`` holds the neutral charge-state shape and ``sminus`` the negative
    one; both integrate to 1 so fitted coefficients carry the full count rate.
    """

    s0: Spectrum
    sminus: Spectrum

    _AREA_RTOL = 1e-9

    def __post_init__(self) -> None:
        _require_same_grid(self.s0, self.sminus)
        for name, s in (("s0", self.s0), ("sminus", self.sminus)):
            peak = float(np.max(np.abs(s.intensities)))
            if float(np.min(s.intensities)) < -1e-12 * peak:
                raise ValidationError(f"basis spectrum {name} has negative values")
            a = area(s)
            if abs(a - 1.0) > self._AREA_RTOL:
                raise ValidationError(
                    f"basis spectrum {name} must have unit area, got {a!r}"
                )

    @classmethod
    def from_spectra(cls, s0: Spectrum, sminus: Spectrum) -> "BasisPair":
        """Normalize two raw component spectra and bundle them."""
        return cls(normalize_area(s0), normalize_area(sminus))

    @property
    def grid(self) -> NDArray[np.float64]:
        return self.s0.wavelengths
