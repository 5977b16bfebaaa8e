"""Free-space optical link budget and receiver noise.

The composite amplitude gain of a line-of-sight optical link is

    h(n) = sqrt(G_t * G_r * eta_t * eta_r * L_path(n) * L_point)

with aperture gains ``G = (pi * D / lambda)**2``, free-space path loss
``L_path = (lambda / (4 pi d(n)))**2`` and pointing loss
``L_point = exp(-8 * jitter**2 / divergence**2)``.  The link is exo-
atmospheric, so no turbulence or absorption terms appear.

Distance may drift linearly across a sample, ``d(n) = d0 + v * n``; the
default drift is zero (constant gain per sample).

All dB values in this package are decibel-watts, ``10 * log10`` of a
power quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkBudget:
    """Geometry and optics of one transmitter/receiver pair."""

    tx_power_w: float
    distance_m: float
    wavelength_m: float
    tx_aperture_m: float
    rx_aperture_m: float
    tx_efficiency: float = 1.0
    rx_efficiency: float = 1.0
    jitter_rad: float = 0.0
    divergence_rad: float = 0.02
    drift_m_per_sample: float = 0.0

    def __post_init__(self) -> None:
        for name in ("tx_power_w", "distance_m", "wavelength_m",
                     "tx_aperture_m", "rx_aperture_m", "divergence_rad"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("tx_efficiency", "rx_efficiency"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.jitter_rad < 0:
            raise ValueError("jitter_rad must be non-negative")

    def distance_at(self, n: float) -> float:
        d = self.distance_m + self.drift_m_per_sample * n
        if d <= 0:
            raise ValueError(f"drift drives distance non-positive at n={n}")
        return d


def aperture_gain(aperture_m: float, wavelength_m: float) -> float:
    return (math.pi * aperture_m / wavelength_m) ** 2


def path_loss(distance_m: float, wavelength_m: float) -> float:
    return (wavelength_m / (4.0 * math.pi * distance_m)) ** 2


def pointing_loss(jitter_rad: float, divergence_rad: float) -> float:
    return math.exp(-8.0 * jitter_rad**2 / divergence_rad**2)


def gain_breakdown(link: LinkBudget, n: float = 0) -> dict[str, float]:
    """Multiplicative factors of the squared gain, by name."""
    return {
        "tx_gain": aperture_gain(link.tx_aperture_m, link.wavelength_m),
        "rx_gain": aperture_gain(link.rx_aperture_m, link.wavelength_m),
        "tx_efficiency": link.tx_efficiency,
        "rx_efficiency": link.rx_efficiency,
        "path_loss": path_loss(link.distance_at(n), link.wavelength_m),
        "pointing_loss": pointing_loss(link.jitter_rad, link.divergence_rad),
    }


def channel_gain(link: LinkBudget, n: float = 0) -> float:
    """Composite amplitude gain h(n) > 0."""
    product = 1.0
    for factor in gain_breakdown(link, n).values():
        product *= factor
    return math.sqrt(product)


def gain_series(link: LinkBudget, length: int) -> np.ndarray:
    """Per-sample amplitude gains h(0..length-1)."""
    if link.drift_m_per_sample == 0.0:
        return np.full(length, channel_gain(link))
    return np.array([channel_gain(link, n) for n in range(length)])


def received_power_dbw(link: LinkBudget, n: float = 0) -> float:
    """Received signal power P * h(n)**2 in dBW."""
    return 10.0 * math.log10(link.tx_power_w * channel_gain(link, n) ** 2)


@dataclass(frozen=True)
class NoiseConfig:
    """Receiver noise floor, circularly symmetric complex Gaussian."""

    variance_dbw: float

    @property
    def linear_variance(self) -> float:
        return 10.0 ** (self.variance_dbw / 10.0)

    @classmethod
    def from_linear(cls, variance_w: float) -> "NoiseConfig":
        if variance_w <= 0:
            raise ValueError("noise variance must be positive")
        return cls(variance_dbw=10.0 * math.log10(variance_w))


def awgn(length: int, noise: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. complex Gaussian samples with E[|w|^2] = linear variance."""
    if length <= 0:
        raise ValueError("length must be positive")
    sigma = math.sqrt(noise.linear_variance / 2.0)
    return sigma * (rng.standard_normal(length) + 1j * rng.standard_normal(length))
