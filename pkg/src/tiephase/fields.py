"""Square sampled fields, their spectra, and circular working masks.

Everything downstream lives on an m x m grid covering a physical square of
side a nanometres, so the pixel pitch is a/m. The field centre sits at pixel
index (m//2, m//2) and spatial frequencies are kept in cycles per nanometre
in unshifted FFT order (zero frequency at index 0). Arrays are row-major
with index (row = y, col = x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _validate_grid_size(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 8 or (m & (m - 1)) != 0:
        raise ValueError(f"grid size must be a power of two of at least 8, got {m!r}")


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, order="C", copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarField:
    """Real-valued samples on a square grid.

    Parameters
    ----------
    m : int
        Samples per side, a power of two of at least 8.
    a : float
        Physical side length in nanometres.
    data : ndarray
        m x m float64 samples, row-major. The stored copy is read-only;
        operations return new fields.
    """

    m: int
    a: float
    data: np.ndarray

    def __post_init__(self):
        _validate_grid_size(self.m)
        if not self.a > 0:
            raise ValueError("field side length must be positive")
        arr = _frozen_array(self.data, np.float64)
        if arr.shape != (self.m, self.m):
            raise ValueError(f"expected data of shape {(self.m, self.m)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "data", arr)


@dataclass(frozen=True)
class ComplexField:
    """Complex-valued samples on a square grid, same layout as ScalarField."""

    m: int
    a: float
    data: np.ndarray

    def __post_init__(self):
        _validate_grid_size(self.m)
        if not self.a > 0:
            raise ValueError("field side length must be positive")
        arr = _frozen_array(self.data, np.complex128)
        if arr.shape != (self.m, self.m):
            raise ValueError(f"expected data of shape {(self.m, self.m)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "data", arr)

    def intensity(self) -> ScalarField:
        """Squared modulus of the wave as a real field."""
        return ScalarField(self.m, self.a, np.abs(self.data) ** 2)


def coordinate_grid(m: int, a: float):
    """Pixel-centre coordinates relative to the field centre.

    Returns
    -------
    x, y : ndarray
        m x m arrays in nanometres. Pixel (m//2, m//2) sits at the origin,
        so coordinates run from -a/2 up to a/2 - a/m.
    """
    _validate_grid_size(m)
    axis = (np.arange(m) - m // 2) * (a / m)
    x = np.broadcast_to(axis[np.newaxis, :], (m, m)).copy()
    y = np.broadcast_to(axis[:, np.newaxis], (m, m)).copy()
    return x, y


@dataclass(frozen=True)
class FrequencyGrid:
    """Spatial-frequency samples in cycles per nanometre, unshifted layout.

    kx varies along columns and ky along rows; ksq is kx**2 + ky**2. The
    zero frequency sits at index (0, 0) and the frequency step is 1/a.
    """

    m: int
    a: float
    kx: np.ndarray
    ky: np.ndarray
    ksq: np.ndarray


def frequency_grid(m: int, a: float) -> FrequencyGrid:
    """Frequency grid matching the FFT layout of an m x m field of side a."""
    _validate_grid_size(m)
    if not a > 0:
        raise ValueError("field side length must be positive")
    freqs = np.fft.fftfreq(m, d=a / m)
    kx = np.broadcast_to(freqs[np.newaxis, :], (m, m)).copy()
    ky = np.broadcast_to(freqs[:, np.newaxis], (m, m)).copy()
    ksq = kx * kx + ky * ky
    for arr in (kx, ky, ksq):
        arr.flags.writeable = False
    return FrequencyGrid(m=int(m), a=float(a), kx=kx, ky=ky, ksq=ksq)


def spectral_forward(field: ComplexField) -> ComplexField:
    """Unnormalised forward FFT; a constant field c maps to c*m**2 at DC."""
    return ComplexField(field.m, field.a, np.fft.fft2(field.data))


def spectral_inverse(field: ComplexField) -> ComplexField:
    """Inverse FFT carrying the 1/m**2 factor, so it undoes spectral_forward."""
    return ComplexField(field.m, field.a, np.fft.ifft2(field.data))


# A radius fraction beyond sqrt(2)/2 would reach past the grid corners.
_MAX_RADIUS_FRACTION = math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class DiskMask:
    """Boolean disk about the field centre.

    A pixel is kept when its centre lies within radius_fraction of the side
    length from the field centre, boundary included.
    """

    m: int
    radius_fraction: float
    data: np.ndarray


def disk_mask(m: int, radius_fraction: float = 0.5) -> DiskMask:
    """Hard-edged circular mask selecting the working region of a field."""
    _validate_grid_size(m)
    if not 0.0 < radius_fraction <= _MAX_RADIUS_FRACTION:
        raise ValueError(
            f"radius fraction must be in (0, {_MAX_RADIUS_FRACTION:.6f}], got {radius_fraction}"
        )
    idx = np.arange(m) - m // 2
    r2 = idx[np.newaxis, :] ** 2 + idx[:, np.newaxis] ** 2
    keep = r2 <= (radius_fraction * m) ** 2
    keep.flags.writeable = False
    return DiskMask(m=int(m), radius_fraction=float(radius_fraction), data=keep)


def disk_window(m: int, radius_fraction: float = 0.5, smooth: bool = False,
                smooth_width: float = 0.1) -> np.ndarray:
    """Windowing weights over the working disk.

    The hard window is the disk mask cast to float. With smooth=True the
    outer smooth_width fraction of the radius ramps from 1 to 0 along a
    raised cosine instead of cutting off.
    """
    if not smooth:
        return disk_mask(m, radius_fraction).data.astype(np.float64)
    if not 0.0 < smooth_width < 1.0:
        raise ValueError("smooth_width must be a fraction in (0, 1)")
    _validate_grid_size(m)
    idx = np.arange(m) - m // 2
    r = np.hypot(idx[np.newaxis, :], idx[:, np.newaxis]) / m
    inner = radius_fraction * (1.0 - smooth_width)
    ramp = (r - inner) / (radius_fraction - inner)
    window = 0.5 * (1.0 + np.cos(np.pi * np.clip(ramp, 0.0, 1.0)))
    window[r <= inner] = 1.0
    window[r > radius_fraction] = 0.0
    return window
