"""Conditioning stream with adaptive MQAM.

Rate at SNR g and bit error target BER (variable-rate MQAM bound):

    R = B * log2(1 + alpha * g / (-ln(beta * BER)))

Evaluating the same bound at spectral efficiency log2(M) gives the BER at
a fixed order and the SNR threshold for an order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError, InfiniteDelayError

# BER targets must stay at least this far below 1/beta
BER_MARGIN = 1e-12


@dataclass(frozen=True)
class CondLinkConfig:
    alpha: float = 1.5
    beta: float = 5.0
    mod_set: tuple[int, ...] = field(default=(4, 16, 64))

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if not self.beta >= 1:
            raise ConfigError("beta must be >= 1")
        ms = tuple(int(m) for m in self.mod_set)
        if not ms:
            raise ConfigError("mod_set must not be empty")
        for m, raw in zip(ms, self.mod_set):
            if m != raw or m < 4 or m & (m - 1):
                raise ConfigError(f"mod_set entries must be powers of 2 >= 4, got {raw!r}")
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ConfigError("mod_set must be strictly increasing")
        object.__setattr__(self, "mod_set", ms)

    @property
    def max_ber(self) -> float:
        return 1.0 / self.beta - BER_MARGIN


def check_ber(ber: float, cfg: CondLinkConfig) -> float:
    """Validate a BER target against (0, 1/beta) and return it."""
    if not 0 < ber < 1.0 / cfg.beta:
        raise DomainError(f"BER target {ber!r} outside (0, 1/beta={1.0 / cfg.beta:g})")
    return float(ber)


def snr_gap(ber: float, cfg: CondLinkConfig) -> float:
    """-ln(beta*BER) / alpha: the SNR penalty factor of the rate bound."""
    return -math.log(cfg.beta * check_ber(ber, cfg)) / cfg.alpha


def spectral_efficiency(snr1: float, ber: float, cfg: CondLinkConfig) -> float:
    """Bits per symbol log2(1 + alpha*g/(-ln(beta*BER)))."""
    if snr1 < 0:
        raise DomainError("SNR must be >= 0")
    return math.log1p(snr1 / snr_gap(ber, cfg)) / math.log(2.0)


def achievable_rate(snr1: float, ber: float, bw: float, cfg: CondLinkConfig) -> float:
    return bw * spectral_efficiency(snr1, ber, cfg)


def cond_delay(cond_bits: float, snr1: float, ber: float, bw: float, cfg: CondLinkConfig) -> float:
    rate = achievable_rate(snr1, ber, bw, cfg)
    if rate <= 0:
        raise InfiniteDelayError("conditioning stream has zero rate")
    return cond_bits / rate


def fixed_order_delay(cond_bits: float, mod_order: int, bw: float) -> float:
    """Delay at a discrete order once its BER target is met."""
    return cond_bits / (bw * math.log2(mod_order))


def ber_at(snr1: float, mod_order: int, cfg: CondLinkConfig) -> float:
    """BER of order M at SNR g: exp(-alpha*g/(M-1)) / beta."""
    if snr1 < 0:
        raise DomainError("SNR must be >= 0")
    if mod_order < 2:
        raise DomainError("mod_order must be >= 2")
    return math.exp(-cfg.alpha * snr1 / (mod_order - 1)) / cfg.beta


def min_snr_for_mod(mod_order: int, ber: float, cfg: CondLinkConfig) -> float:
    """SNR at which order M meets the BER target exactly."""
    if mod_order < 2:
        raise DomainError("mod_order must be >= 2")
    return (mod_order - 1) * snr_gap(ber, cfg)


def select_modulation(snr1: float, ber: float, cfg: CondLinkConfig) -> int | None:
    """Largest order in ``cfg.mod_set`` meeting the BER target, or None."""
    if snr1 < 0:
        raise DomainError("SNR must be >= 0")
    best = None
    for m in cfg.mod_set:
        if min_snr_for_mod(m, ber, cfg) <= snr1:
            best = m
    return best
