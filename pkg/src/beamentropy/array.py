"""Uniform linear array steering vectors and DFT beamforming codebooks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """A ULA with ``num_elements`` elements spaced ``spacing_wavelengths`` apart."""

    num_elements: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 1:
            raise DomainError(f"num_elements must be a positive integer, got {self.num_elements!r}")
        if not self.spacing_wavelengths > 0:
            raise DomainError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths!r}")
        object.__setattr__(self, "num_elements", int(self.num_elements))
        object.__setattr__(self, "spacing_wavelengths", float(self.spacing_wavelengths))

    def spatial_frequency(self, angle_deg: float) -> float:
        """psi = 2 d sin(theta); DFT beam m sits at psi = 2m/N (wrapped)."""
        return 2.0 * self.spacing_wavelengths * np.sin(np.deg2rad(angle_deg))

    def angle_of(self, psi: float) -> float:
        """Physical angle (degrees) whose spatial frequency is ``psi``."""
        x = psi / (2.0 * self.spacing_wavelengths)
        if abs(x) > 1.0:
            raise DomainError(f"spatial frequency {psi} is not visible for spacing {self.spacing_wavelengths}")
        return float(np.rad2deg(np.arcsin(x)))


@dataclass(frozen=True)
class SteeringVector:
    elements: np.ndarray
    angle_deg: float

    def __len__(self):
        return self.elements.shape[0]


@dataclass(frozen=True)
class Codebook:
    """Unitary N x N DFT codebook; column m is beam m."""

    weights: np.ndarray
    beam_index_to_spatial_freq: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[1]

    def column(self, beam: int) -> np.ndarray:
        _check_beam(beam, self.size)
        return self.weights[:, beam]


def _check_beam(beam, n):
    if not (0 <= beam < n) or int(beam) != beam:
        raise DomainError(f"beam index {beam!r} out of range [0, {n})")


def _check_angle(angle_deg):
    if not np.isfinite(angle_deg) or not (-90.0 <= angle_deg <= 90.0):
        raise DomainError(f"angle {angle_deg!r} deg outside [-90, 90]")


def steering_vector(geom: ArrayGeometry, angle_deg: float) -> SteeringVector:
    """Unit-modulus ULA response at ``angle_deg`` from broadside."""
    _check_angle(angle_deg)
    k = np.arange(geom.num_elements)
    phase = 2.0 * np.pi * geom.spacing_wavelengths * k * np.sin(np.deg2rad(angle_deg))
    return SteeringVector(np.exp(1j * phase), float(angle_deg))


def steering_vector_at(geom: ArrayGeometry, psi: float) -> SteeringVector:
    """Steering vector parameterised directly by spatial frequency.

    Evaluated from ``psi`` rather than from the angle so that on-grid vectors
    coincide with scaled DFT columns to the last bit of phase.
    """
    angle = geom.angle_of(psi)
    k = np.arange(geom.num_elements)
    return SteeringVector(np.exp(1j * np.pi * psi * k), angle)


def beam_centers(n: int) -> np.ndarray:
    psi = 2.0 * np.arange(n) / n
    return np.where(psi >= 1.0, psi - 2.0, psi)


def dft_codebook(geom: ArrayGeometry) -> Codebook:
    n = geom.num_elements
    k = np.arange(n)
    # exact integer phase index keeps large-N columns orthonormal to ~1e-15
    km = np.outer(k, k) % n
    w = np.exp(2j * np.pi * km / n) / np.sqrt(n)
    return Codebook(w, beam_centers(n))


def beam_gain(codebook: Codebook, beam: int, direction: SteeringVector | np.ndarray) -> float:
    """|w_beam^H a| for a steering vector ``a``."""
    w = codebook.column(beam)
    a = direction.elements if isinstance(direction, SteeringVector) else np.asarray(direction)
    if a.shape != w.shape:
        raise DomainError(f"direction has length {a.shape[0]}, codebook expects {w.shape[0]}")
    return float(abs(np.vdot(w, a)))
