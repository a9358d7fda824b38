"""Min-max latency power allocation for one prompt and one conditioning stream.

With a single conditioning signal and non-increasing quality curves the
problem is convex and its optimum satisfies three conditions at once: the
power budget is spent, the BER sits at the tightest quality-implied bound,
and both streams finish together (T0 = T1). ``solve_continuous`` solves
that system by bisection on the prompt power. ``solve_discrete`` restricts
the conditioning stream to a finite MQAM order set.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .channel import stream_snr
from .cond_link import (
    cond_delay,
    fixed_order_delay,
    min_snr_for_mod,
    snr_gap,
    spectral_efficiency,
)
from .config import SystemConfig
from .errors import DomainError, InfeasibleQualityError
from .prompt_link import prompt_delay, zero_per_delay
from .quality import target_ber

BASELINE_BER = 1e-7


@dataclass(frozen=True)
class PowerAllocation:
    p_prompt: float
    p_cond: float

    @property
    def total(self) -> float:
        return self.p_prompt + self.p_cond


@dataclass(frozen=True)
class OptimizationResult:
    status: str  # "optimal" or "infeasible"
    mode: str  # "continuous" or "discrete"
    allocation: PowerAllocation | None
    ber_target: float
    t_prompt: float = math.nan
    t_cond: float = math.nan
    latency: float = math.nan
    mod_order: int | None = None
    bits_per_symbol: float = math.nan
    exp_retx: float = math.nan
    per: float = math.nan
    prompt_snr: float = math.nan
    cond_snr: float = math.nan
    balanced: bool = False  # T0 == T1 (continuous) / T0 <= T1 (discrete)
    compute_latency: float = 0.0
    reason: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def end_to_end(self) -> float:
        return self.latency + self.compute_latency

    def to_dict(self) -> dict:
        d = asdict(self)
        d["end_to_end"] = self.end_to_end
        return d


def _check_gain(gain_sq):
    if not gain_sq > 0:
        raise DomainError(f"channel gain must be > 0, got {gain_sq!r}")


def split_power(p_total, p_prompt):
    """(p0, p1) with p0 + p1 == p_total exactly in floating point.

    The larger share absorbs the rounding: after ``p1 = P - p0`` the
    subtraction ``P - p1`` is exact (Sterbenz), so the returned pair sums
    to P without error.
    """
    p_cond = p_total - p_prompt
    return p_total - p_cond, p_cond


def _kernel_args(sys: SystemConfig, gain0, gain1, ber):
    n0 = sys.channel.noise_density
    return dict(
        a0=np.asarray(gain0, dtype=float) / (sys.bw_prompt * n0),
        a1=np.asarray(gain1, dtype=float) / (sys.bw_cond * n0),
        p_total=sys.total_power,
        t0_min=zero_per_delay(sys.prompt_bits, sys.prompt_link, sys.bw_prompt),
        c=sys.prompt_link.per_exponent,
        t1_scale=sys.cond_bits * math.log(2.0) / sys.bw_cond,
        gap=snr_gap(ber, sys.cond_link),
    )


def balance_powers(sys: SystemConfig, gain0, gain1, ber):
    """Batched continuous solve at a fixed BER target.

    Returns (p0, p1) arrays shaped like the broadcast of the gains.
    """
    p0 = _kernels.balance_split(**_kernel_args(sys, gain0, gain1, ber))
    return split_power(sys.total_power, p0)


def quality_ber(sys: SystemConfig, requirements) -> float:
    """Binding BER of the requirements, capped to the rate model's domain."""
    return min(target_ber(requirements), sys.cond_link.max_ber)


def _infeasible(mode, ber, reason, sys):
    return OptimizationResult(
        status="infeasible", mode=mode, allocation=None, ber_target=ber,
        compute_latency=sys.compute_latency, reason=reason,
    )


def solve_continuous_at_ber(sys: SystemConfig, gain_sq: float, ber: float, cond_gain_sq=None) -> OptimizationResult:
    _check_gain(gain_sq)
    g1 = gain_sq if cond_gain_sq is None else cond_gain_sq
    _check_gain(g1)
    p0, p1 = balance_powers(sys, gain_sq, g1, ber)
    p0, p1 = float(p0), float(p1)
    n0 = sys.channel.noise_density
    snr0 = stream_snr(p0, gain_sq, sys.bw_prompt, n0)
    snr1 = stream_snr(p1, g1, sys.bw_cond, n0)
    bd = prompt_delay(sys.prompt_bits, sys.prompt_link, snr0, sys.bw_prompt)
    t1 = cond_delay(sys.cond_bits, snr1, ber, sys.bw_cond, sys.cond_link)
    latency = max(bd.total, t1)
    return OptimizationResult(
        status="optimal",
        mode="continuous",
        allocation=PowerAllocation(p0, p1),
        ber_target=ber,
        t_prompt=bd.total,
        t_cond=t1,
        latency=latency,
        bits_per_symbol=spectral_efficiency(snr1, ber, sys.cond_link),
        exp_retx=bd.exp_retx,
        per=bd.per,
        prompt_snr=snr0,
        cond_snr=snr1,
        balanced=abs(bd.total - t1) <= 1e-6 * latency,
        compute_latency=sys.compute_latency,
        reason="prompt PER at clamp" if bd.clamped else "",
    )


def solve_continuous(sys: SystemConfig, gain_sq: float, requirements, cond_gain_sq=None) -> OptimizationResult:
    """Optimal continuous-rate allocation.

    Parameters
    ----------
    sys : SystemConfig
    gain_sq : float
        Channel power gain |h|^2 of the prompt stream (and of the
        conditioning stream unless `cond_gain_sq` is given).
    requirements : iterable of QualityRequirement
    cond_gain_sq : float, optional
        Separate gain for the conditioning stream (per-stream fading).

    Raises
    ------
    InfeasibleQualityError
        If a requirement exceeds its curve's maximum.
    DomainError
        If a gain is not positive.
    """
    _check_gain(gain_sq)
    return solve_continuous_at_ber(sys, gain_sq, quality_ber(sys, requirements), cond_gain_sq)


def required_cond_power(sys: SystemConfig, gain_sq: float, mod_order: int, ber: float) -> float:
    """Power putting the conditioning stream exactly at the order-M threshold."""
    g = min_snr_for_mod(mod_order, ber, sys.cond_link)
    return g * sys.bw_cond * sys.channel.noise_density / gain_sq


DISCRETE_RULES = ("balanced", "full-power")


def solve_discrete_at_ber(
    sys: SystemConfig, gain_sq: float, ber: float, cond_gain_sq=None, rule: str = "balanced"
) -> OptimizationResult:
    if rule not in DISCRETE_RULES:
        raise ValueError(f"unknown discrete rule {rule!r}; expected one of {DISCRETE_RULES}")
    _check_gain(gain_sq)
    g1 = gain_sq if cond_gain_sq is None else cond_gain_sq
    _check_gain(g1)
    n0 = sys.channel.noise_density
    best = None
    any_fits = False
    for m in sorted(sys.cond_link.mod_set, reverse=True):
        p1 = required_cond_power(sys, g1, m, ber)
        if not p1 < sys.total_power:
            continue
        any_fits = True
        p0, p1 = split_power(sys.total_power, sys.total_power - p1)
        snr0 = stream_snr(p0, gain_sq, sys.bw_prompt, n0)
        bd = prompt_delay(sys.prompt_bits, sys.prompt_link, snr0, sys.bw_prompt)
        t1 = fixed_order_delay(sys.cond_bits, m, sys.bw_cond)
        if rule == "balanced" and bd.total > t1:
            continue
        latency = max(bd.total, t1)
        # strict comparison keeps the larger order on ties
        if best is None or latency < best[0]:
            best = (latency, m, p0, p1, bd, t1, snr0)
    if best is None:
        if any_fits:
            reason = "no modulation order meets BER with the prompt finishing first"
        else:
            reason = "no modulation order satisfies BER at full power"
        return _infeasible("discrete", ber, reason, sys)
    latency, m, p0, p1, bd, t1, snr0 = best
    return OptimizationResult(
        status="optimal",
        mode="discrete",
        allocation=PowerAllocation(p0, p1),
        ber_target=ber,
        t_prompt=bd.total,
        t_cond=t1,
        latency=latency,
        mod_order=m,
        bits_per_symbol=math.log2(m),
        exp_retx=bd.exp_retx,
        per=bd.per,
        prompt_snr=snr0,
        cond_snr=stream_snr(p1, g1, sys.bw_cond, n0),
        balanced=bd.total <= t1,
        compute_latency=sys.compute_latency,
        reason="prompt PER at clamp" if bd.clamped else "",
    )


def solve_discrete(
    sys: SystemConfig, gain_sq: float, requirements, cond_gain_sq=None, rule: str = "balanced"
) -> OptimizationResult:
    """Best discrete-order allocation.

    The conditioning stream gets exactly the power that meets the BER
    target at each candidate order and the prompt gets the rest. Among the
    admissible orders the smallest max-latency wins, larger order on ties.

    `rule` sets admissibility. ``"full-power"`` admits every order whose
    threshold fits under the budget. ``"balanced"`` (default) also requires
    the prompt to finish no later than the conditioning stream, so an
    order is only used where it is the latency bottleneck; this reproduces
    the reference modulation-region edges, including the infeasible band.
    """
    _check_gain(gain_sq)
    return solve_discrete_at_ber(sys, gain_sq, quality_ber(sys, requirements), cond_gain_sq, rule)


def solve(sys: SystemConfig, gain_sq: float, requirements, mode: str = "continuous",
          cond_gain_sq=None, rule: str = "balanced") -> OptimizationResult:
    if mode == "continuous":
        return solve_continuous(sys, gain_sq, requirements, cond_gain_sq)
    if mode == "discrete":
        return solve_discrete(sys, gain_sq, requirements, cond_gain_sq, rule)
    raise ValueError(f"unknown mode {mode!r}")


def baseline_single_stream(sys: SystemConfig, gain_sq: float, ber: float = BASELINE_BER) -> float:
    """Latency of sending both payloads as one adaptive-MQAM stream.

    Full power and the pooled bandwidth; the BER is held at the level the
    prompt needs.
    """
    _check_gain(gain_sq)
    bw = sys.bw_prompt + sys.bw_cond
    snr = stream_snr(sys.total_power, gain_sq, bw, sys.channel.noise_density)
    rate = bw * spectral_efficiency(snr, ber, sys.cond_link)
    return (sys.prompt_bits + sys.cond_bits) / rate


def feasibility_edge(sys: SystemConfig, mod_order: int, ber: float) -> float:
    """Average SNR (linear) at which order M needs the whole power budget."""
    g1 = min_snr_for_mod(mod_order, ber, sys.cond_link)
    return g1 * sys.bw_cond / (sys.bw_prompt + sys.bw_cond)


@dataclass(frozen=True)
class Feasibility:
    # continuous-feasible | discrete-feasible | discrete-infeasible
    # | infeasible-quality | unbounded-latency
    kind: str
    mod_orders: tuple[int, ...] = ()
    reason: str = ""

    @property
    def feasible(self) -> bool:
        return self.kind in ("continuous-feasible", "discrete-feasible")


def feasibility(sys: SystemConfig, gain_sq: float, requirements, mode: str = "discrete",
                rule: str = "balanced") -> Feasibility:
    """Classify whether (and how) the requirements can be served at `gain_sq`."""
    try:
        ber = quality_ber(sys, requirements)
    except InfeasibleQualityError as exc:
        return Feasibility("infeasible-quality", reason=str(exc))
    if not gain_sq > 0:
        return Feasibility("unbounded-latency", reason="quality reachable but channel gain is zero")
    if mode == "continuous":
        return Feasibility("continuous-feasible")
    fits = []
    for m in sys.cond_link.mod_set:
        p1 = required_cond_power(sys, gain_sq, m, ber)
        if not p1 < sys.total_power:
            continue
        if rule == "balanced":
            snr0 = stream_snr(sys.total_power - p1, gain_sq, sys.bw_prompt, sys.channel.noise_density)
            t0 = prompt_delay(sys.prompt_bits, sys.prompt_link, snr0, sys.bw_prompt).total
            if t0 > fixed_order_delay(sys.cond_bits, m, sys.bw_cond):
                continue
        fits.append(m)
    if not fits:
        res = solve_discrete_at_ber(sys, gain_sq, ber, rule=rule)
        return Feasibility("discrete-infeasible", reason=res.reason)
    return Feasibility("discrete-feasible", tuple(fits))
