"""Reliable prompt stream: coded packets with unbounded ARQ.

Packet error rate of a convolutionally coded packet of L bits at SNR g:

    PER(g) = 1 - L**(-k/g) * exp(-b/g) = 1 - exp(-(k*ln L + b) / g)

and the expected delay is (packets) x (transmissions per packet) x
(airtime per packet).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .channel import stream_snr
from .errors import ConfigError, DomainError, InfeasibleError

if TYPE_CHECKING:
    from .config import SystemConfig

# 1 - PER never drops below this; keeps the expected retransmission count finite
MIN_SUCCESS = 1e-12


@dataclass(frozen=True)
class PromptLinkConfig:
    packet_bits: int = 629
    code_rate: float = 0.5
    mod_order: int = 4
    per_k: float = 0.374
    per_b: float = -0.31

    def __post_init__(self):
        if self.packet_bits < 3:
            raise ConfigError("packet_bits must be >= 3")
        if not 0 < self.code_rate <= 1:
            raise ConfigError("code_rate must lie in (0, 1]")
        m = int(self.mod_order)
        if m != self.mod_order or m < 2 or m & (m - 1):
            raise ConfigError("prompt mod_order must be a power of 2, >= 2")

    @property
    def per_exponent(self) -> float:
        """k*ln(L) + b; PER = 1 - exp(-per_exponent / snr)."""
        return self.per_k * math.log(self.packet_bits) + self.per_b


@dataclass(frozen=True)
class PromptDelayBreakdown:
    n_packets: float
    exp_retx: float
    packet_time: float
    total: float
    per: float
    clamped: bool = False  # PER hit the clamp; treat the operating point as effectively infeasible


def _success_prob(snr0: float, cfg: PromptLinkConfig) -> float:
    x = cfg.per_exponent / snr0
    s = math.exp(-x) if x < 745.0 else 0.0
    return min(1.0, max(s, MIN_SUCCESS))


def packet_error_rate(snr0: float, cfg: PromptLinkConfig) -> float:
    """PER at prompt SNR `snr0`, clamped to [0, 1 - 1e-12]."""
    if not snr0 > 0:
        raise DomainError(f"prompt SNR must be > 0, got {snr0!r}")
    return 1.0 - _success_prob(snr0, cfg)


def packet_count(prompt_bits: float, cfg: PromptLinkConfig) -> float:
    """Coded packets needed for the prompt, kept continuous."""
    return prompt_bits / (cfg.code_rate * cfg.packet_bits)


def packet_time(cfg: PromptLinkConfig, bw: float) -> float:
    return cfg.packet_bits / (math.log2(cfg.mod_order) * bw)


def prompt_delay(prompt_bits: float, cfg: PromptLinkConfig, snr0: float, bw: float) -> PromptDelayBreakdown:
    if not snr0 > 0:
        raise DomainError(f"prompt SNR must be > 0, got {snr0!r}")
    if not prompt_bits > 0:
        raise DomainError("prompt_bits must be > 0")
    success = _success_prob(snr0, cfg)
    n_p = packet_count(prompt_bits, cfg)
    n_r = 1.0 / success
    t_p = packet_time(cfg, bw)
    return PromptDelayBreakdown(
        n_packets=n_p,
        exp_retx=n_r,
        packet_time=t_p,
        total=n_p * n_r * t_p,
        per=1.0 - success,
        clamped=success <= MIN_SUCCESS,
    )


def zero_per_delay(prompt_bits: float, cfg: PromptLinkConfig, bw: float) -> float:
    """Lower bound on the prompt delay, reached only as PER -> 0."""
    return packet_count(prompt_bits, cfg) * packet_time(cfg, bw)


def power_for_prompt_delay(target_t0: float, sys: SystemConfig, gain_sq: float) -> float:
    """Transmit power whose expected prompt delay equals `target_t0`.

    T0(p) = T_min * exp(c / snr(p)) is strictly decreasing, so the inverse
    is unique; it is evaluated in closed form.

    Raises
    ------
    InfeasibleError
        If `target_t0` is not above the zero-PER bound or needs a PER
        beyond the clamp.
    """
    cfg = sys.prompt_link
    t_min = zero_per_delay(sys.prompt_bits, cfg, sys.bw_prompt)
    if not target_t0 > t_min:
        raise InfeasibleError(
            f"target prompt delay {target_t0:.6g} s is not above the zero-PER bound {t_min:.6g} s"
        )
    c = cfg.per_exponent
    if c <= 0:
        # PER is identically zero; no finite power is pinned down by the target
        raise InfeasibleError("PER model is zero at every SNR; prompt delay is power-independent")
    ratio = math.log(target_t0 / t_min)
    if ratio >= -math.log(MIN_SUCCESS):
        raise InfeasibleError("target prompt delay lies in the clamped-PER region")
    snr0 = c / ratio
    return snr0 / stream_snr(1.0, gain_sq, sys.bw_prompt, sys.channel.noise_density)
