"""Acceptance gate: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the report lines.
"""

import math

import numpy as np

from conftest import gain_at
from oracles import grid_tolerance, latency_grid
from semlat.cli import main
from semlat.config import default_system
from semlat.channel import stream_snr
from semlat.cond_link import achievable_rate, ber_at, fixed_order_delay, min_snr_for_mod
from semlat.experiments import DEFAULT_GRID, crossover
from semlat.optimizer import balance_powers, feasibility_edge, solve
from semlat.prompt_link import prompt_delay
from semlat.quality import DEFAULT_CLIP, DEFAULT_MSSSIM, PRESET_TARGETS, QualityRequirement, target_ber
from semlat.simulator import SimSpec, simulate_cond, simulate_prompt

TARGET_BER = {"t0999": 1e-6, "t0997": 1e-5, "t0978": 1e-4}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_c1_region_cond_snr(system, capsys):
    table = {64: [27, 26, 25], 16: [21, 20, 19], 4: [14, 13, 12]}
    worst = 0.0
    misses = []
    for m, want in table.items():
        for label, w in zip(("t0999", "t0997", "t0978"), want):
            got = 10 * math.log10(min_snr_for_mod(m, TARGET_BER[label], system.cond_link))
            worst = max(worst, abs(got - w))
            if abs(got - w) > 0.15:
                misses.append(f"M={m}/{label}: {got:.3f} vs {w}")
    report(capsys, 1, not misses, f"max |dev| {worst:.3f} dB (tol 0.15); misses: {misses or 'none'}")


def test_c2_discrete_latency(system, capsys):
    want = {64: 1.31e-3, 16: 1.97e-3, 4: 3.93e-3}
    got = {m: fixed_order_delay(7864, m, system.bw_cond) for m in want}
    ok = all(abs(got[m] / want[m] - 1) <= 0.01 for m in want)
    report(capsys, 2, ok, ", ".join(f"M={m}: {1e3 * got[m]:.4f} ms" for m in want))


def test_c3_infeasibility_edges(system, curves, capsys):
    table = {"t0999": 11.0, "t0997": 10.2, "t0978": 9.2}
    parts = []
    ok = True
    for label, w in table.items():
        ber = target_ber(PRESET_TARGETS[label].requirements(curves))
        edge = 10 * math.log10(feasibility_edge(system, min(system.cond_link.mod_set), ber))
        # full power on the conditioning stream doubles its SNR relative to the average
        derived = 10 * math.log10(min_snr_for_mod(4, ber, system.cond_link) / 2)
        ok &= abs(edge - w) <= 0.5 and math.isclose(edge, derived, abs_tol=1e-9)
        parts.append(f"{label}: {edge:.3f} vs {w}")
    report(capsys, 3, ok, "; ".join(parts) + " (tol 0.5 dB)")


def test_c4_optimality_conditions(capsys):
    rng = np.random.default_rng(2024)
    base = default_system()
    worst_gap = 0.0
    sum_exact = True
    oracle_ok = True
    for _ in range(1000):
        s = base.with_payloads(int(round(10 ** rng.uniform(2, 5))), float(10 ** rng.uniform(2, 5)))
        g = gain_at(s, rng.uniform(5, 35))
        ber = 10 ** rng.uniform(-7, -3)
        p0, p1 = balance_powers(s, g, g, ber)
        p0, p1 = float(p0), float(p1)
        sum_exact &= p0 + p1 == s.total_power
        n0 = s.channel.noise_density
        t0 = prompt_delay(s.prompt_bits, s.prompt_link, stream_snr(p0, g, s.bw_prompt, n0), s.bw_prompt).total
        t1 = s.cond_bits / achievable_rate(stream_snr(p1, g, s.bw_cond, n0), ber, s.bw_cond, s.cond_link)
        t = max(t0, t1)
        worst_gap = max(worst_gap, abs(t0 - t1) / t)
        _, lat = latency_grid(s, g, ber, 10**4)
        oracle_ok &= t <= lat.min() + grid_tolerance(lat)
    ok = sum_exact and worst_gap <= 1e-6 and oracle_ok
    report(capsys, 4, ok, f"1000 configs: exact budget={sum_exact}, max |T0-T1|/T={worst_gap:.2e}, "
                          f"grid oracle never better={oracle_ok}")


def test_c5_monte_carlo(system, capsys):
    parts = []
    ok = True
    c = system.prompt_link.per_exponent
    for per in (0.01, 0.1, 0.5):
        snr = c / -math.log1p(-per)
        st = simulate_prompt(system, snr, SimSpec(trials=500_000, seed=int(per * 1000)))
        z = (st.mean_retx - 1 / (1 - per)) / st.retx_std_err
        ok &= st.packet_draws >= 10**6 and abs(z) <= 3
        parts.append(f"PER {per}: z={z:+.2f}")
    snr1, m = 60.0, 16
    want = ber_at(snr1, m, system.cond_link)
    trials = math.ceil(10**7 / system.cond_bits)
    st = simulate_cond(system, snr1, m, SimSpec(trials=trials, seed=5))
    z = (st.empirical_ber - want) / math.sqrt(want * (1 - want) / st.bit_draws)
    ok &= st.bit_draws >= 10**7 and abs(z) <= 3
    parts.append(f"BER {want:.3e}: z={z:+.2f}")
    report(capsys, 5, ok, "; ".join(parts))


def _sweep(system, curves, label, mode):
    reqs = PRESET_TARGETS[label].requirements(curves)
    return [solve(system, gain_at(system, x), reqs, mode=mode) for x in DEFAULT_GRID]


def test_c6_trends(system, curves, capsys):
    problems = []
    lat = {}
    for mode in ("continuous", "discrete"):
        for label in PRESET_TARGETS:
            res = _sweep(system, curves, label, mode)
            l = np.array([r.latency if r.optimal else np.inf for r in res])
            lat[mode, label] = l
            if (l[1:] > l[:-1]).any():
                problems.append(f"latency rises ({mode}, {label})")
            if mode == "continuous" and (np.diff([r.exp_retx for r in res]) > 1e-12).any():
                problems.append(f"retx rises ({label})")
            if mode == "discrete":
                ms = [r.mod_order or 0 for r in res]
                if (np.diff(ms) < 0).any():
                    problems.append(f"order drops ({label})")
        tighter = [lat[mode, t] for t in ("t0978", "t0997", "t0999")]
        if any((b < a).any() for a, b in zip(tighter, tighter[1:])):
            problems.append(f"tightening lowers latency ({mode})")
    report(capsys, 6, not problems, f"126-point sweep, 3 targets, both modes: {problems or 'all trends hold'}")


def test_c7_crossover(system, curves, capsys):
    rows, points = crossover(system, curves)
    low = [r for r in rows if r.avg_snr_db <= 10.0]
    wins = all(r.multi_wins for r in low)
    x = points["t0978"]
    ok = wins and x is not None and 10 <= x <= 14
    report(capsys, 7, ok, f"t0978: multi < baseline for all {len(low)} points <= 10 dB: {wins}; "
                          f"crossover {x:.3f} dB (window [10, 14])")


def test_c8_quality_algebra(capsys):
    worst = 0.0
    for curve in (DEFAULT_CLIP, DEFAULT_MSSSIM):
        for lb in np.linspace(-6, -4, 2001):
            back = curve.inverse(curve.evaluate(10 ** lb))
            worst = max(worst, abs(math.log10(back) - lb))
    tb = target_ber([QualityRequirement(DEFAULT_CLIP, 0.997), QualityRequirement(DEFAULT_MSSSIM, 0.918)])
    ok = worst <= 1e-9 and tb == 1e-5
    report(capsys, 8, ok, f"max round-trip error {worst:.1e} decades; target_ber={tb:g}")


COMMANDS = [
    ["optimize", "--snr-db", "25", "--targets", "t0978", "--mode", "discrete"],
    ["optimize", "--snr-db", "17.3", "--targets", "t0999"],
    ["sweep", "--mode", "discrete", "--workers", "{w}"],
    ["sweep", "--workers", "{w}"],
    ["regions"],
    ["crossover", "--targets", "t0978,t0997,t0999"],
    ["simulate", "--snr-db", "14", "--trials", "80000", "--fading", "rayleigh", "--workers", "{w}"],
    ["simulate", "--snr-db", "20", "--trials", "80000", "--mode", "discrete", "--workers", "{w}",
     "--per-trial-csv"],
]


def test_c9_determinism(tmp_path, capsys):
    mismatched = []
    for i, cmd in enumerate(COMMANDS):
        outs = []
        for run, w in enumerate(("1", "4", "1")):
            d = tmp_path / f"c{i}_{run}"
            args = ["--out", str(d), "--seed", "17", *[a.format(w=w) for a in cmd]]
            rc = main(args)
            text = capsys.readouterr().out.replace(str(d), "<out>")
            files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
            outs.append((rc, text, files))
        if not outs[0] == outs[1] == outs[2]:
            mismatched.append(" ".join(cmd))
    report(capsys, 9, not mismatched,
           f"{len(COMMANDS)} commands x (1, 4, 1 workers): mismatches {mismatched or 'none'}")
