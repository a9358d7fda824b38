"""Monte Carlo checks of the analytic link models.

Prompt packets are retransmitted until success; transmissions per packet are
geometric with success probability 1 - PER. Conditioning bits are flipped
independently at the analytic BER. Channel gains are either the mean gain
(deterministic mode) or one Rayleigh block-fading draw per stream per trial.

Trials are processed in fixed-size chunks. Chunk ``c`` draws from
``SeedSequence(seed, spawn_key=(c,))`` so results do not depend on how many
workers process the chunks.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .cond_link import ber_at, fixed_order_delay, min_snr_for_mod, snr_gap
from .config import SystemConfig
from .errors import DomainError
from .optimizer import balance_powers, quality_ber, solve
from .prompt_link import MIN_SUCCESS, packet_count, packet_time

CHUNK = 1 << 15
ARQ_CAP = 10_000
FADING_MODES = ("deterministic", "rayleigh")

# substream indices inside a chunk
_FADE0, _FADE1, _ARQ, _BITS = range(4)


@dataclass(frozen=True)
class SimSpec:
    trials: int
    seed: int = 0
    fading_mode: str = "deterministic"
    integer_packets: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.fading_mode not in FADING_MODES:
            raise DomainError(f"fading_mode must be one of {FADING_MODES}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass
class SimStats:
    trials: int
    mean_latency: float
    latency_quantiles: tuple[float, float, float]  # p50, p95, p99
    mean_retx: float
    retx_std_err: float
    empirical_per: float
    empirical_ber: float
    mean_prompt_delay: float = math.nan
    mean_cond_delay: float = math.nan
    packet_draws: int = 0
    bit_draws: int = 0
    arq_overflows: int = 0
    per_clamped: bool = False
    infeasible_trials: int = 0
    outage_fraction: float = 0.0
    analytic: dict = field(default_factory=dict)
    per_trial: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("per_trial")
        return _clean(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_trials_csv(self, path):
        if self.per_trial is None:
            raise ValueError("per-trial records were not kept")
        cols = list(self.per_trial)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", *cols])
            n = len(self.per_trial[cols[0]])
            for i in range(n):
                w.writerow([i, *(_fmt(self.per_trial[c][i]) for c in cols)])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return format(float(x), ".12g")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _chunk_rngs(seed: int, chunk: int) -> list[np.random.Generator]:
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(4)]


def _chunks(trials: int):
    return [(c, min(CHUNK, trials - c * CHUNK)) for c in range(math.ceil(trials / CHUNK))]


def _map_chunks(fn, spec: SimSpec):
    jobs = _chunks(spec.trials)
    if spec.workers == 1 or len(jobs) == 1:
        return [fn(c, n) for c, n in jobs]
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def success_prob(snr0, sys: SystemConfig):
    """1 - PER, elementwise, with the same clamp as the analytic model."""
    c = sys.prompt_link.per_exponent
    with np.errstate(over="ignore", divide="ignore"):
        s = np.exp(-c / np.asarray(snr0, dtype=float))
    return np.clip(s, MIN_SUCCESS, 1.0)


def _packet_layout(sys: SystemConfig, integer_packets: bool):
    n_p = packet_count(sys.prompt_bits, sys.prompt_link)
    if integer_packets:
        return math.ceil(n_p - 1e-12), 0.0
    full = math.floor(n_p + 1e-12)
    frac = n_p - full
    return full, (frac if frac > 1e-12 else 0.0)


def _prompt_chunk(rng, n, success, sys, integer_packets, keep=None):
    """Per-trial prompt delays and ARQ tallies for `n` trials.

    Tallies cover only the rows selected by `keep` (all rows by default);
    draws are made for every row so the random stream is mask-independent.
    """
    full, frac = _packet_layout(sys, integer_packets)
    slots = full + (1 if frac > 0 else 0)
    u = 1.0 - rng.random((n, slots))
    s = np.broadcast_to(np.asarray(success, dtype=float).reshape(-1, 1) if np.ndim(success) else success, (n, slots))
    attempts, over = _kernels.arq_attempts(u, s, ARQ_CAP)
    weights = np.ones(slots)
    if frac > 0:
        weights[-1] = frac
    delay = packet_time(sys.prompt_link, sys.bw_prompt) * (attempts @ weights)
    kept = attempts if keep is None else attempts[keep]
    return {
        "delay": delay,
        "attempts": attempts.sum(axis=1),
        "sum": float(kept.sum()),
        "sumsq": float((kept.astype(float) ** 2).sum()),
        "draws": kept.size,
        "overflows": int((over if keep is None else over[keep]).sum()),
    }


def _summarize_retx(parts):
    draws = sum(p["draws"] for p in parts)
    total = sum(p["sum"] for p in parts)
    sumsq = sum(p["sumsq"] for p in parts)
    mean = total / draws
    var = max(sumsq / draws - mean * mean, 0.0)
    se = math.sqrt(var / draws) if draws > 1 else math.nan
    per = (total - draws) / total
    return draws, mean, se, per, sum(p["overflows"] for p in parts)


def _quantiles(x):
    if x.size == 0:
        return (math.nan, math.nan, math.nan)
    q = np.quantile(x, [0.5, 0.95, 0.99])
    return (float(q[0]), float(q[1]), float(q[2]))


def simulate_prompt(sys: SystemConfig, snr0: float, spec: SimSpec, keep_trials: bool = False) -> SimStats:
    """Sample prompt delivery at a fixed prompt SNR."""
    if not snr0 > 0:
        raise DomainError("prompt SNR must be > 0")
    success = float(success_prob(snr0, sys))

    def run(c, n):
        rngs = _chunk_rngs(spec.seed, c)
        return _prompt_chunk(rngs[_ARQ], n, success, sys, spec.integer_packets)

    parts = _map_chunks(run, spec)
    delay = np.concatenate([p["delay"] for p in parts])
    draws, mean_retx, se, per, overflows = _summarize_retx(parts)
    stats = SimStats(
        trials=spec.trials,
        mean_latency=float(delay.mean()),
        latency_quantiles=_quantiles(delay),
        mean_retx=mean_retx,
        retx_std_err=se,
        empirical_per=per,
        empirical_ber=math.nan,
        mean_prompt_delay=float(delay.mean()),
        packet_draws=draws,
        arq_overflows=overflows,
        per_clamped=success <= MIN_SUCCESS,
        analytic={"per": 1.0 - success, "exp_retx": 1.0 / success},
    )
    if keep_trials:
        stats.per_trial = {
            "prompt_delay_s": delay,
            "attempts": np.concatenate([p["attempts"] for p in parts]),
        }
    return stats


def simulate_cond(sys: SystemConfig, snr1: float, mod_order: int, spec: SimSpec, keep_trials: bool = False) -> SimStats:
    """Flip conditioning bits at the analytic BER of order M at `snr1`."""
    if not snr1 > 0:
        raise DomainError("conditioning SNR must be > 0")
    if mod_order not in sys.cond_link.mod_set:
        raise DomainError(f"mod_order {mod_order} not in {sys.cond_link.mod_set}")
    ber = ber_at(snr1, mod_order, sys.cond_link)
    bits = int(round(sys.cond_bits))
    t1 = fixed_order_delay(sys.cond_bits, mod_order, sys.bw_cond)

    def run(c, n):
        return _chunk_rngs(spec.seed, c)[_BITS].binomial(bits, ber, size=n)

    errors = np.concatenate(_map_chunks(run, spec))
    bit_draws = bits * spec.trials
    delay = np.full(spec.trials, t1)
    stats = SimStats(
        trials=spec.trials,
        mean_latency=float(delay.mean()),
        latency_quantiles=_quantiles(delay),
        mean_retx=math.nan,
        retx_std_err=math.nan,
        empirical_per=math.nan,
        empirical_ber=float(errors.sum()) / bit_draws,
        mean_cond_delay=t1,
        bit_draws=bit_draws,
        analytic={"ber": ber, "cond_delay": t1},
    )
    if keep_trials:
        stats.per_trial = {"cond_delay_s": delay, "bit_errors": errors}
    return stats


def _discrete_batch(sys, g0, g1, ber, rule):
    """Vectorized discrete-mode solve; returns (ok, snr0, t1, ber_real)."""
    n0 = sys.channel.noise_density
    p_total = sys.total_power
    t0_min = packet_count(sys.prompt_bits, sys.prompt_link) * packet_time(sys.prompt_link, sys.bw_prompt)
    best_lat = np.full(g0.shape, np.inf)
    snr0 = np.full(g0.shape, np.nan)
    t1 = np.full(g0.shape, np.nan)
    ber_real = np.full(g0.shape, np.nan)
    for m in sorted(sys.cond_link.mod_set, reverse=True):
        g_req = min_snr_for_mod(m, ber, sys.cond_link)
        p1 = g_req * sys.bw_cond * n0 / g1
        fits = p1 < p_total
        s0 = np.where(fits, (p_total - p1) * g0 / (sys.bw_prompt * n0), np.nan)
        with np.errstate(invalid="ignore"):
            t0 = t0_min / success_prob(np.where(fits, s0, 1.0), sys)
        tm = fixed_order_delay(sys.cond_bits, m, sys.bw_cond)
        ok = fits & (t0 <= tm) if rule == "balanced" else fits
        lat = np.maximum(t0, tm)
        take = ok & (lat < best_lat)
        best_lat = np.where(take, lat, best_lat)
        snr0 = np.where(take, s0, snr0)
        t1 = np.where(take, tm, t1)
        # every selected order runs exactly at its threshold, so BER equals the target
        ber_real = np.where(take, ber_at(g_req, m, sys.cond_link), ber_real)
    return np.isfinite(best_lat), snr0, t1, ber_real


def simulate_end_to_end(
    sys: SystemConfig,
    requirements,
    spec: SimSpec,
    gain_sq: float,
    mode: str = "continuous",
    rule: str = "balanced",
    keep_trials: bool = False,
) -> SimStats:
    """Optimize and then sample both streams, per trial.

    `gain_sq` is the mean channel gain. In deterministic mode every trial
    uses it; in rayleigh mode each stream draws its own exponential fading
    around it and the optimizer is re-run per trial.

    ``mean_latency`` averages the realized max of the two stream delays,
    which exceeds the analytic (max of expectations) latency whenever the
    prompt delay is random; ``mean_prompt_delay`` is the quantity that
    converges to the analytic prompt delay.
    """
    if not gain_sq > 0:
        raise DomainError("gain_sq must be > 0")
    ber = quality_ber(sys, requirements)
    gap = snr_gap(ber, sys.cond_link)
    n0 = sys.channel.noise_density
    analytic = {}
    if spec.fading_mode == "deterministic":
        res = solve(sys, gain_sq, requirements, mode=mode, rule=rule)
        analytic = {"latency": res.latency, "t_prompt": res.t_prompt, "t_cond": res.t_cond,
                    "exp_retx": res.exp_retx, "ber": res.ber_target, "status": res.status}

    def run(c, n):
        rngs = _chunk_rngs(spec.seed, c)
        if spec.fading_mode == "rayleigh":
            g0 = gain_sq * rngs[_FADE0].standard_exponential(n)
            g1 = gain_sq * rngs[_FADE1].standard_exponential(n)
        else:
            g0 = np.full(n, gain_sq)
            g1 = np.full(n, gain_sq)
        if mode == "continuous":
            p0, p1 = balance_powers(sys, g0, g1, ber)
            snr0 = p0 * g0 / (sys.bw_prompt * n0)
            snr1 = p1 * g1 / (sys.bw_cond * n0)
            rate = sys.bw_cond * np.log1p(snr1 / gap) / math.log(2.0)
            ok = (rate > 0) & (snr0 > 0)
            t1 = np.where(ok, sys.cond_bits / np.where(ok, rate, 1.0), np.nan)
            ber_real = np.full(n, ber)
        elif mode == "discrete":
            ok, snr0, t1, ber_real = _discrete_batch(sys, g0, g1, ber, rule)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        success = success_prob(np.where(ok, snr0, 1.0), sys)
        # a clamped PER marks the draw as effectively infeasible
        ok = ok & (success > MIN_SUCCESS)
        pr = _prompt_chunk(rngs[_ARQ], n, success, sys, spec.integer_packets, keep=ok)
        errors = rngs[_BITS].binomial(int(round(sys.cond_bits)), np.where(ok, ber_real, 0.0))
        return {"ok": ok, "t1": t1, "errors": errors, "prompt": pr}

    parts = _map_chunks(run, spec)
    ok = np.concatenate([p["ok"] for p in parts])
    t0 = np.concatenate([p["prompt"]["delay"] for p in parts])
    t1 = np.concatenate([p["t1"] for p in parts])
    errors = np.concatenate([p["errors"] for p in parts])
    latency = np.maximum(t0, t1)
    n_ok = int(ok.sum())
    bits = int(round(sys.cond_bits))
    if n_ok:
        draws, mean_retx, se, per, overflows = _summarize_retx([p["prompt"] for p in parts])
    else:
        draws, mean_retx, se, per, overflows = 0, math.nan, math.nan, math.nan, 0
    lat_ok = latency[ok]
    stats = SimStats(
        trials=spec.trials,
        mean_latency=float(lat_ok.mean()) if n_ok else math.nan,
        latency_quantiles=_quantiles(lat_ok),
        mean_retx=mean_retx,
        retx_std_err=se,
        empirical_per=per,
        empirical_ber=float(errors[ok].sum()) / (bits * n_ok) if n_ok else math.nan,
        mean_prompt_delay=float(t0[ok].mean()) if n_ok else math.nan,
        mean_cond_delay=float(t1[ok].mean()) if n_ok else math.nan,
        packet_draws=draws,
        bit_draws=bits * n_ok,
        arq_overflows=overflows,
        infeasible_trials=spec.trials - n_ok,
        outage_fraction=(spec.trials - n_ok) / spec.trials,
        analytic=analytic,
    )
    if keep_trials:
        stats.per_trial = {
            "feasible": ok,
            "prompt_delay_s": np.where(ok, t0, np.nan),
            "cond_delay_s": t1,
            "latency_s": np.where(ok, latency, np.nan),
            "attempts": np.concatenate([p["prompt"]["attempts"] for p in parts]),
            "bit_errors": errors,
        }
    return stats
