"""Flat Rayleigh block-fading channel with distance path loss.

The channel power gain of every stream is

    |h|^2 = eps_o * d**(-phi) * |h~|^2,

with |h~|^2 a unit-mean exponential draw (squared magnitude of a
unit-variance circularly symmetric complex Gaussian). The reference
distance is fixed at 1 m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ConfigError, DomainError

if TYPE_CHECKING:
    from .config import SystemConfig


@dataclass(frozen=True)
class ChannelParams:
    """Large-scale channel parameters, all linear.

    Attributes
    ----------
    pathloss_ref : float
        Power ratio at the 1 m reference distance.
    pathloss_exp : float
        Path loss exponent.
    distance : float
        Link distance in meters, at least the 1 m reference.
    noise_density : float
        Noise power spectral density in W/Hz.
    """

    pathloss_ref: float
    pathloss_exp: float
    distance: float
    noise_density: float

    def __post_init__(self):
        if not self.pathloss_ref > 0:
            raise ConfigError("pathloss_ref must be > 0")
        if not self.pathloss_exp > 0:
            raise ConfigError("pathloss_exp must be > 0")
        if not self.distance >= 1.0:
            raise ConfigError("distance must be >= 1 m (reference distance)")
        if not self.noise_density > 0:
            raise ConfigError("noise_density must be > 0")


def mean_gain(ch: ChannelParams) -> float:
    """Deterministic path gain eps_o * d**(-phi), i.e. E|h|^2."""
    return ch.pathloss_ref * ch.distance ** (-ch.pathloss_exp)


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_fading(ch: ChannelParams, count: int, seed) -> np.ndarray:
    """Draw `count` i.i.d. block-fading power gains |h|^2.

    `seed` is an integer or an existing ``numpy.random.Generator``; a
    generator is advanced in place.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = make_rng(seed)
    return mean_gain(ch) * rng.standard_exponential(count)


def stream_snr(power, gain_sq, bandwidth, noise_density):
    """Received SNR p*|h|^2 / (B*N0). Works elementwise on arrays."""
    return power * gain_sq / (bandwidth * noise_density)


def average_snr(sys: SystemConfig) -> float:
    """Channel quality indicator: full power over the total bandwidth."""
    return stream_snr(
        sys.total_power,
        mean_gain(sys.channel),
        sys.bw_prompt + sys.bw_cond,
        sys.channel.noise_density,
    )


def gain_for_average_snr(sys: SystemConfig, avg_snr: float) -> float:
    """Power gain |h|^2 that makes `average_snr` equal `avg_snr`.

    Sweeps are parameterized by average SNR rather than distance; this is
    the gain they plug into the optimizer.
    """
    if not avg_snr > 0:
        raise DomainError("avg_snr must be > 0")
    return avg_snr * (sys.bw_prompt + sys.bw_cond) * sys.channel.noise_density / sys.total_power
