import os
import subprocess
import sys

import numpy as np
import pytest

from semlat import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable or disabled")


def _random_balance_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    return dict(
        a0=10 ** rng.uniform(6, 12, n),
        a1=10 ** rng.uniform(6, 12, n),
        p_total=10 ** rng.uniform(-3, 0, n),
        t0_min=10 ** rng.uniform(-5, -2, n),
        c=rng.uniform(0.0, 4.0, n),
        t1_scale=10 ** rng.uniform(-4, -1, n),
        gap=rng.uniform(1, 20, n),
    )


def test_numpy_balance_is_balanced():
    kw = _random_balance_inputs(2000)
    p0 = _kernels.balance_split_numpy(**kw)
    assert ((p0 > 0) & (p0 < kw["p_total"])).all()
    t0 = kw["t0_min"] / np.clip(np.exp(-kw["c"] / (kw["a0"] * p0)), 1e-12, 1)
    t1 = kw["t1_scale"] / np.log1p(kw["a1"] * (kw["p_total"] - p0) / kw["gap"])
    interior = (p0 > 1e-9 * kw["p_total"]) & (p0 < (1 - 1e-9) * kw["p_total"])
    assert interior.mean() > 0.5
    assert (np.abs(t0 - t1)[interior] <= 1e-6 * np.maximum(t0, t1)[interior]).all()


@needs_numba
def test_balance_backends_agree():
    kw = _random_balance_inputs(5000, seed=1)
    a = _kernels.balance_split_numpy(**kw)
    b = _kernels.balance_split_numba(**kw)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_numba
def test_balance_scalar_broadcast():
    kw = dict(a0=np.array([1e9, 2e9]), a1=1e9, p_total=1e-2, t0_min=6.29e-4, c=2.1,
              t1_scale=5.45e-3, gap=5.0)
    np.testing.assert_allclose(_kernels.balance_split_numba(**kw), _kernels.balance_split_numpy(**kw),
                               rtol=1e-12)


def test_arq_numpy_edges():
    u = np.array([1.0, 0.5, 1e-300])
    att, over = _kernels.arq_attempts_numpy(u, np.array([1.0, 0.5, 1e-12]), 10_000)
    assert att.tolist() == [1, 1, 10_000]
    assert over.tolist() == [False, False, True]


def test_arq_geometric_mean():
    rng = np.random.default_rng(5)
    u = 1.0 - rng.random(10**6)
    att, _ = _kernels.arq_attempts_numpy(u, 0.9, 10_000)
    assert abs(att.mean() - 1 / 0.9) < 3 * np.sqrt(0.1 / 0.81 / 10**6)


@needs_numba
def test_arq_backends_identical():
    rng = np.random.default_rng(2)
    u = 1.0 - rng.random((1000, 3))
    s = rng.uniform(1e-6, 1.0, (1000, 3))
    a, oa = _kernels.arq_attempts_numpy(u, s, 10_000)
    b, ob = _kernels.arq_attempts_numba(u, s, 10_000)
    assert np.array_equal(a, b) and np.array_equal(oa, ob)


def test_env_flag_selects_numpy():
    env = {**os.environ, "SEMLAT_DISABLE_NUMBA": "1"}
    out = subprocess.run(
        [sys.executable, "-c", "from semlat import _kernels as k; print(k.BACKEND, k.balance_split.__name__)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split() == ["numpy", "balance_split_numpy"]


def test_backend_flag_consistent():
    assert _kernels.BACKEND == ("numba" if _kernels.HAVE_NUMBA else "numpy")


@needs_numba
def test_simulate_output_identical_across_backends(tmp_path):
    args = ["--seed", "5", "simulate", "--snr-db", "13", "--trials", "40000", "--fading", "rayleigh"]
    outs = []
    for flag in ("0", "1"):
        env = {**os.environ, "SEMLAT_DISABLE_NUMBA": flag}
        d = tmp_path / flag
        subprocess.run([sys.executable, "-m", "semlat.cli", "--out", str(d), *args],
                       env=env, capture_output=True, check=True)
        outs.append((d / "simstats.json").read_bytes())
    assert outs[0] == outs[1]
