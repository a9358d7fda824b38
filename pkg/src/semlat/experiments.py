"""Average-SNR sweeps, modulation-region tables and the baseline crossover.

Everything here is deterministic: the channel is held at its mean gain,
which is pinned by the requested average SNR.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .channel import gain_for_average_snr
from .cond_link import fixed_order_delay, min_snr_for_mod
from .config import SystemConfig
from .errors import ConfigError, InfeasibleQualityError
from .optimizer import (
    baseline_single_stream,
    feasibility_edge,
    quality_ber,
    solve,
    solve_continuous,
)
from .prompt_link import zero_per_delay
from .quality import PRESET_TARGETS, QualityCurve, TargetSet
from .units import db_to_linear, linear_to_db

FLOAT_FMT = ".12g"


def make_grid(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive dB grid, rounded so that 5 + 0.2*k prints as written."""
    if not step > 0 or hi < lo:
        raise ConfigError(f"bad grid {lo}:{hi}:{step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(n)]


def parse_grid(text: str) -> list[float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"grid must look like lo:hi:step, got {text!r}") from exc
    return make_grid(lo, hi, step)


DEFAULT_GRID = make_grid(5.0, 30.0, 0.2)
DEFAULT_TARGETS = ("t0999", "t0997", "t0978")


@dataclass(frozen=True)
class SweepSpec:
    snr_grid: tuple[float, ...] = tuple(DEFAULT_GRID)
    targets: tuple[TargetSet, ...] = tuple(PRESET_TARGETS[t] for t in DEFAULT_TARGETS)
    mode: str = "continuous"
    rule: str = "balanced"

    def __post_init__(self):
        g = self.snr_grid
        if not g or any(b <= a for a, b in zip(g, g[1:])):
            raise ConfigError("snr_grid must be non-empty and strictly increasing")
        if not self.targets:
            raise ConfigError("at least one target is required")
        if self.mode not in ("continuous", "discrete"):
            raise ConfigError(f"mode must be continuous or discrete, got {self.mode!r}")


@dataclass(frozen=True)
class SweepRow:
    avg_snr_db: float
    target_label: str
    prompt_power_pct: float
    latency_s: float
    mod_order: int | None
    exp_retx: float
    cond_snr_db: float
    status: str
    bits_per_symbol: float = math.nan
    ber_target: float = math.nan
    reason: str = ""


def _sweep_point(sys, curves, target: TargetSet, snr_db: float, mode: str, rule: str) -> SweepRow:
    gain = gain_for_average_snr(sys, db_to_linear(snr_db))
    try:
        res = solve(sys, gain, target.requirements(curves), mode=mode, rule=rule)
    except InfeasibleQualityError as exc:
        return SweepRow(snr_db, target.label, math.nan, math.nan, None, math.nan, math.nan,
                        "infeasible", reason=str(exc))
    if not res.optimal:
        return SweepRow(snr_db, target.label, math.nan, math.nan, None, math.nan, math.nan,
                        "infeasible", ber_target=res.ber_target, reason=res.reason)
    return SweepRow(
        avg_snr_db=snr_db,
        target_label=target.label,
        prompt_power_pct=100.0 * res.allocation.p_prompt / sys.total_power,
        latency_s=res.end_to_end,
        mod_order=res.mod_order,
        exp_retx=res.exp_retx,
        cond_snr_db=float(linear_to_db(res.cond_snr)),
        status="optimal",
        bits_per_symbol=res.bits_per_symbol,
        ber_target=res.ber_target,
        reason=res.reason,
    )


def sweep(sys: SystemConfig, curves: dict[str, QualityCurve], spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """One row per (target, average SNR), grouped by target in spec order."""
    jobs = [(t, g) for t in spec.targets for g in spec.snr_grid]

    def run(job):
        return _sweep_point(sys, curves, job[0], job[1], spec.mode, spec.rule)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


@dataclass(frozen=True)
class RegionRow:
    target_label: str
    mod_order: int  # 0 is the infeasible region
    from_db: float
    to_db: float
    cond_snr_db: float
    latency_ms: float
    feasibility_edge_db: float
    balanced_edge_db: float
    full_power_from_db: float
    full_power_to_db: float


def balanced_edge(sys: SystemConfig, mod_order: int, ber: float) -> float:
    """Average SNR (linear) where order M at threshold leaves T0 == T1.

    Returns inf if the prompt can never keep up with that order.
    """
    t1 = fixed_order_delay(sys.cond_bits, mod_order, sys.bw_cond)
    t_min = zero_per_delay(sys.prompt_bits, sys.prompt_link, sys.bw_prompt)
    c = sys.prompt_link.per_exponent
    if t1 <= t_min:
        return math.inf
    snr0 = c / math.log(t1 / t_min) if c > 0 else 0.0
    snr1 = min_snr_for_mod(mod_order, ber, sys.cond_link)
    return (snr0 * sys.bw_prompt + snr1 * sys.bw_cond) / (sys.bw_prompt + sys.bw_cond)


def _db(x):
    return float(linear_to_db(x)) if x > 0 and math.isfinite(x) else math.nan


def modulation_regions(
    sys: SystemConfig,
    curves: dict[str, QualityCurve],
    targets=None,
    grid=None,
    rule: str = "balanced",
) -> list[RegionRow]:
    """Average-SNR interval served by each discrete order, per target.

    ``from_db``/``to_db`` are grid points where the discrete solve (with
    `rule`) picks the order. ``feasibility_edge_db`` is the analytic SNR at
    which the order needs the whole power budget; ``balanced_edge_db`` the
    analytic SNR from which the prompt finishes no later than the order's
    fixed delay; ``full_power_from_db``/``full_power_to_db`` the same
    interval under the full-power rule.
    """
    targets = targets or [PRESET_TARGETS[t] for t in DEFAULT_TARGETS]
    grid = list(grid or DEFAULT_GRID)
    out = []
    for target in targets:
        reqs = target.requirements(curves)
        ber = quality_ber(sys, reqs)
        picks = {}
        for mode_rule in (rule, "full-power"):
            picks[mode_rule] = [
                _sweep_point(sys, curves, target, g, "discrete", mode_rule).mod_order or 0 for g in grid
            ]
        chosen = picks[rule]
        orders = sorted(sys.cond_link.mod_set, reverse=True) + [0]
        m_min = min(sys.cond_link.mod_set)
        for m in orders:
            where = [g for g, k in zip(grid, chosen) if k == m]
            fp = [g for g, k in zip(grid, picks["full-power"]) if k == m]
            mm = m if m else m_min
            out.append(RegionRow(
                target_label=target.label,
                mod_order=m,
                from_db=min(where) if where else math.nan,
                to_db=max(where) if where else math.nan,
                cond_snr_db=_db(min_snr_for_mod(mm, ber, sys.cond_link)) if m else math.nan,
                latency_ms=1e3 * fixed_order_delay(sys.cond_bits, m, sys.bw_cond) if m else math.nan,
                feasibility_edge_db=_db(feasibility_edge(sys, mm, ber)),
                balanced_edge_db=_db(balanced_edge(sys, mm, ber)),
                full_power_from_db=min(fp) if fp else math.nan,
                full_power_to_db=max(fp) if fp else math.nan,
            ))
    return out


@dataclass(frozen=True)
class CrossoverRow:
    target_label: str
    avg_snr_db: float
    multi_latency_s: float
    baseline_latency_s: float
    multi_wins: bool


def _multi_minus_base(sys, reqs, snr_db):
    gain = gain_for_average_snr(sys, db_to_linear(snr_db))
    return solve_continuous(sys, gain, reqs).latency - baseline_single_stream(sys, gain)


def crossover(
    sys: SystemConfig,
    curves: dict[str, QualityCurve],
    targets=None,
    grid=None,
) -> tuple[list[CrossoverRow], dict[str, float | None]]:
    """Multi-stream (continuous optimum) vs single-stream baseline.

    Returns the per-point table and, per target, the average SNR (dB) at
    which the baseline catches up, refined between grid points by root
    finding. None when the curves do not cross on the grid.
    """
    targets = targets or [PRESET_TARGETS["t0978"]]
    grid = list(grid or DEFAULT_GRID)
    rows = []
    points = {}
    for target in targets:
        reqs = target.requirements(curves)
        diffs = []
        for g in grid:
            gain = gain_for_average_snr(sys, db_to_linear(g))
            multi = solve_continuous(sys, gain, reqs).latency
            base = baseline_single_stream(sys, gain)
            rows.append(CrossoverRow(target.label, g, multi, base, multi < base))
            diffs.append(multi - base)
        point = None
        for (g0, d0), (g1, d1) in zip(zip(grid, diffs), zip(grid[1:], diffs[1:])):
            if d0 < 0 <= d1:
                if d1 == 0:
                    point = g1
                else:
                    point = brentq(lambda x: _multi_minus_base(sys, reqs, x), g0, g1, xtol=1e-9)
                break
        points[target.label] = point
    return rows, points


# -- output ------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, FLOAT_FMT)
    return str(v)


def write_rows(path, rows) -> None:
    """CSV with a header row in dataclass field order."""
    path = Path(path)
    if not rows:
        raise ValueError("no rows to write")
    cols = [f.name for f in fields(rows[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            d = asdict(r)
            w.writerow([_cell(d[c]) for c in cols])


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_metadata(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
