"""In-line phase retrieval from a through-focus intensity derivative.

The in-focus phase solves -k dI/dz = div(I0 grad phi). With frequencies in
cycles per nanometre that inversion reads

    phi = k / (4 pi^2) * IF{ k_vec / |k|^2 . F[ 1/I0 * IF( k_vec F(dI/dz) / |k|^2 ) ] }

and both divisions are softened here: each 1/|k|^2 becomes
|k|^2 / (|k|^4 + delta_tie^4), the division by I0 becomes multiplication by
I0 / (I0^2 + delta_int^2). The softened inverse Laplacian annihilates the
zero frequency, so retrieved phases have zero mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import FrequencyGrid, ScalarField, disk_window, frequency_grid
from .optics import OpticsConfig


@dataclass(frozen=True)
class TieConfig:
    """Regularisation and windowing knobs of the retrieval chain.

    delta_int softens the division by the in-focus intensity (same units as
    intensity); delta_tie softens the inverse Laplacians (cycles per
    nanometre). With apodize on, the intensity derivative is windowed to
    the working disk before solving; window_micrographs windows each
    micrograph instead, and smooth_window swaps the hard disk edge for a
    raised cosine.
    """

    delta_int: float
    delta_tie: float
    apodize: bool = True
    window_micrographs: bool = False
    smooth_window: bool = False

    def __post_init__(self):
        if not self.delta_int > 0:
            raise ValueError("delta_int must be positive")
        if not self.delta_tie > 0:
            raise ValueError("delta_tie must be positive")

    @classmethod
    def defaults(cls, incident_intensity: float = 1.0, m: int = 128,
                 a: float = 150.0) -> "TieConfig":
        """Stock regularisers: a tenth of the incident intensity, and a
        tenth of the frequency step divided by the pixel count."""
        return cls(delta_int=0.1 * incident_intensity, delta_tie=0.1 / (a * m))


def regularized_inverse_ksq(grid: FrequencyGrid, delta_tie: float) -> np.ndarray:
    """Softened 1/|k|^2: |k|^2 / (|k|^4 + delta_tie^4).

    Zero at DC, peaking at 1/(2 delta_tie^2) where |k| = delta_tie.
    """
    if not delta_tie > 0:
        raise ValueError("delta_tie must be positive")
    return grid.ksq / (grid.ksq**2 + delta_tie**4)


def intensity_derivative(i_plus: ScalarField, i_minus: ScalarField,
                         defocus: float) -> ScalarField:
    """Central-difference estimate of dI/dz from a defocus pair."""
    if not defocus > 0:
        raise ValueError("defocus distance must be positive")
    if (i_plus.m, i_plus.a) != (i_minus.m, i_minus.a):
        raise ValueError("defocus pair must share grid size and side length")
    return ScalarField(i_plus.m, i_plus.a, (i_plus.data - i_minus.data) / (2.0 * defocus))


def solve_tie(didz: ScalarField, i_zero: ScalarField, wavenumber: float,
              config: TieConfig) -> ScalarField:
    """Recover the in-focus phase from the axial intensity derivative.

    Parameters
    ----------
    didz : ScalarField
        Estimate of dI/dz in intensity per nanometre.
    i_zero : ScalarField
        In-focus intensity.
    wavenumber : float
        Angular wavenumber k of the beam in radians per nanometre.
    config : TieConfig
        Regularisation settings; windowing flags are not applied here.

    Returns
    -------
    ScalarField
        Retrieved phase in radians, zero mean by construction.
    """
    if (didz.m, didz.a) != (i_zero.m, i_zero.a):
        raise ValueError("derivative and in-focus intensity must share the grid")
    if not wavenumber > 0:
        raise ValueError("wavenumber must be positive")
    grid = frequency_grid(didz.m, didz.a)
    inv_ksq = regularized_inverse_ksq(grid, config.delta_tie)
    inv_i = i_zero.data / (i_zero.data**2 + config.delta_int**2)

    spectrum = np.fft.fft2(didz.data)
    grad_x = np.fft.ifft2(grid.kx * inv_ksq * spectrum) * inv_i
    grad_y = np.fft.ifft2(grid.ky * inv_ksq * spectrum) * inv_i
    recombined = inv_ksq * (grid.kx * np.fft.fft2(grad_x) + grid.ky * np.fft.fft2(grad_y))
    phi = np.fft.ifft2(recombined).real * (wavenumber / (4.0 * math.pi**2))
    return ScalarField(didz.m, didz.a, phi)


def retrieve_phase(i_minus: ScalarField, i_zero: ScalarField, i_plus: ScalarField,
                   optics: OpticsConfig, config: TieConfig) -> ScalarField:
    """Difference the defocus pair, window, and solve for the phase.

    By default the disk window multiplies the intensity derivative; with
    config.window_micrographs it multiplies the three micrographs before
    differencing instead. config.apodize False skips windowing entirely.
    """
    for field in (i_zero, i_plus):
        if (field.m, field.a) != (i_minus.m, i_minus.a):
            raise ValueError("micrographs must share grid size and side length")
    window = None
    if config.apodize:
        window = disk_window(i_minus.m, smooth=config.smooth_window)
    if window is not None and config.window_micrographs:
        i_minus = ScalarField(i_minus.m, i_minus.a, i_minus.data * window)
        i_zero = ScalarField(i_zero.m, i_zero.a, i_zero.data * window)
        i_plus = ScalarField(i_plus.m, i_plus.a, i_plus.data * window)
    didz = intensity_derivative(i_plus, i_minus, optics.defocus)
    if window is not None and not config.window_micrographs:
        didz = ScalarField(didz.m, didz.a, didz.data * window)
    return solve_tie(didz, i_zero, optics.wavenumber, config)
