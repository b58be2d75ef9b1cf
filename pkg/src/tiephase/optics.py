"""Electron-optical constants, free-space propagation and counting noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ComplexField, ScalarField, frequency_grid

# CODATA values in SI units; h, e and c are exact by definition.
PLANCK_CONSTANT = 6.62607015e-34      # J s
ELECTRON_MASS = 9.1093837015e-31      # kg
ELEMENTARY_CHARGE = 1.602176634e-19   # C
SPEED_OF_LIGHT = 2.99792458e8         # m/s


def electron_wavelength(voltage: float) -> float:
    """Relativistic electron wavelength in nanometres.

    Parameters
    ----------
    voltage : float
        Accelerating voltage in volts, e.g. 300e3.
    """
    if not voltage > 0:
        raise ValueError("accelerating voltage must be positive")
    energy = ELEMENTARY_CHARGE * voltage
    rest = ELECTRON_MASS * SPEED_OF_LIGHT**2
    momentum = math.sqrt(2.0 * ELECTRON_MASS * energy * (1.0 + energy / (2.0 * rest)))
    return PLANCK_CONSTANT / momentum * 1e9


def interaction_constant(voltage: float) -> float:
    """Beam-specimen coupling in radians per volt and nanometre.

    Multiplying by the specimen potential in volts and the traversed
    thickness in nanometres gives the imprinted phase in radians.
    """
    lam = electron_wavelength(voltage)
    energy = ELEMENTARY_CHARGE * voltage
    rest = ELECTRON_MASS * SPEED_OF_LIGHT**2
    return (2.0 * math.pi / (lam * voltage)) * (rest + energy) / (2.0 * rest + energy)


@dataclass(frozen=True)
class OpticsConfig:
    """Imaging-side parameters of the simulated microscope.

    voltage is the accelerating voltage in volts; defocus the distance in
    nanometres between the in-focus plane and each defocused plane (the
    under-focus image sits at -defocus, the over-focus image at +defocus).
    potential is the complex specimen potential in volts, whose imaginary
    part absorbs. noise_level is the relative shot-noise level of a pixel
    at the incident intensity; 0 turns noise off.
    """

    voltage: float = 300e3
    defocus: float = 8000.0
    potential: complex = -17.0 + 1.0j
    incident_intensity: float = 1.0
    noise_level: float = 0.15

    def __post_init__(self):
        if not self.voltage > 0:
            raise ValueError("accelerating voltage must be positive")
        if not self.defocus > 0:
            raise ValueError("defocus distance must be positive")
        if not self.incident_intensity > 0:
            raise ValueError("incident intensity must be positive")
        if not 0.0 <= self.noise_level < 1.0:
            raise ValueError("noise level must lie in [0, 1)")
        object.__setattr__(self, "potential", complex(self.potential))

    @property
    def wavelength(self) -> float:
        """Beam wavelength in nanometres."""
        return electron_wavelength(self.voltage)

    @property
    def wavenumber(self) -> float:
        """Angular wavenumber 2 pi / wavelength in radians per nanometre."""
        return 2.0 * math.pi / self.wavelength

    @property
    def sigma(self) -> float:
        """Interaction constant for this voltage."""
        return interaction_constant(self.voltage)


def propagate(psi: ComplexField, distance: float, wavelength: float) -> ComplexField:
    """Fresnel-propagate a wave by a signed distance in nanometres.

    The spectrum is multiplied by exp(-i pi lambda z |k|^2) with k in cycles
    per nanometre, so hops compose (z1 then z2 equals z1 + z2), distance 0
    is the identity and the total intensity is conserved.
    """
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    grid = frequency_grid(psi.m, psi.a)
    kernel = np.exp(-1j * math.pi * wavelength * distance * grid.ksq)
    data = np.fft.ifft2(kernel * np.fft.fft2(psi.data))
    return ComplexField(psi.m, psi.a, data)


def defocus_series(psi0: ComplexField, defocus: float, wavelength: float):
    """Under-, in- and over-focus intensities of an exit wave.

    Returns
    -------
    (i_minus, i_zero, i_plus) : tuple of ScalarField
        Intensities at -defocus, 0 and +defocus.
    """
    if not defocus > 0:
        raise ValueError("defocus distance must be positive")
    i_minus = propagate(psi0, -defocus, wavelength).intensity()
    i_zero = psi0.intensity()
    i_plus = propagate(psi0, +defocus, wavelength).intensity()
    return i_minus, i_zero, i_plus


def add_shot_noise(intensity: ScalarField, noise_level: float,
                   incident_intensity: float, seed: int) -> ScalarField:
    """Poisson counting noise at a dose set by the noise level.

    The mean count of a pixel at the incident intensity is 1/noise_level**2,
    so a uniform image at that intensity comes back with relative standard
    deviation noise_level. Sampling is deterministic in the seed, and a
    noise level of 0 returns the input unchanged.
    """
    if not 0.0 <= noise_level < 1.0:
        raise ValueError("noise level must lie in [0, 1)")
    if noise_level == 0.0:
        return intensity
    if not incident_intensity > 0:
        raise ValueError("incident intensity must be positive")
    if np.any(intensity.data < 0):
        raise ValueError("intensity must be nonnegative to draw counts")
    mean_count = 1.0 / noise_level**2
    rng = np.random.default_rng(seed)
    counts = rng.poisson(mean_count * intensity.data / incident_intensity)
    return ScalarField(intensity.m, intensity.a, counts * (incident_intensity / mean_count))
