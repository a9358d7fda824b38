"""Batched numeric kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``SEMLAT_DISABLE_NUMBA`` is
unset (or "0"). Both paths take identical inputs, including any random
draws, so switching backends never changes the random stream; results
agree to floating-point rounding.

Kernels
-------
balance_split
    Balance solve: for each configuration, the prompt power p0
    in (0, P) with T0(p0) = T1(P - p0) under a full-power split.
arq_attempts
    Transmissions per packet under unbounded ARQ, by geometric inversion
    of uniform draws, with an attempt cap.
"""

import math
import os

import numpy as np

# mirrors prompt_link.MIN_SUCCESS; kept local so kernels stay import-light
MIN_SUCCESS = 1e-12
BISECT_MAX_ITER = 200
BISECT_REL_GAP = 1e-9
P_LO_FRAC = 1e-12

_disabled = os.environ.get("SEMLAT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("disabled by SEMLAT_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# -- pure numpy --------------------------------------------------------------

def _np_prompt_delay(gamma, t0_min, c):
    with np.errstate(over="ignore", divide="ignore"):
        s = np.exp(-c / gamma)
    s = np.clip(s, MIN_SUCCESS, 1.0)
    return t0_min / s


def _np_cond_delay(gamma, t1_scale, gap):
    r = np.log1p(gamma / gap)
    with np.errstate(divide="ignore"):
        return np.where(r > 0, t1_scale / np.where(r > 0, r, 1.0), np.inf)


def balance_split_numpy(a0, a1, p_total, t0_min, c, t1_scale, gap):
    a0, a1, p_total, t0_min, c, t1_scale, gap = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (a0, a1, p_total, t0_min, c, t1_scale, gap))
    )
    p_lo = P_LO_FRAC * p_total
    lo = p_lo.copy()
    hi = p_total - p_lo

    def gap_at(p0):
        t0 = _np_prompt_delay(a0 * p0, t0_min, c)
        t1 = _np_cond_delay(a1 * (p_total - p0), t1_scale, gap)
        return t0 - t1, np.maximum(t0, t1)

    f_lo, _ = gap_at(lo)
    f_hi, _ = gap_at(hi)
    out = np.full(lo.shape, np.nan)
    out[f_lo <= 0] = lo[f_lo <= 0]
    out[(f_lo > 0) & (f_hi >= 0)] = hi[(f_lo > 0) & (f_hi >= 0)]
    active = np.isnan(out)
    for _ in range(BISECT_MAX_ITER):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        stuck = active & ((mid <= lo) | (mid >= hi))
        out[stuck] = mid[stuck]
        active &= ~stuck
        f_mid, t_mid = gap_at(mid)
        done = active & (np.abs(f_mid) <= BISECT_REL_GAP * t_mid)
        out[done] = mid[done]
        active &= ~done
        pos = active & (f_mid > 0)
        neg = active & ~(f_mid > 0)
        lo = np.where(pos, mid, lo)
        hi = np.where(neg, mid, hi)
    out[active] = 0.5 * (lo[active] + hi[active])
    return out


def arq_attempts_numpy(u, success, cap):
    """Attempts per packet from uniforms ``u`` in (0, 1].

    Returns (attempts, overflowed) where attempts are capped at `cap`.
    """
    u, success = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(success, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(u) / np.log1p(-success)
    ratio = np.where(success >= 1.0, 0.0, ratio)
    over = ~(ratio <= cap)
    k = np.ceil(np.where(over, cap, ratio))
    attempts = np.maximum(k, 1.0).astype(np.int64)
    return attempts, over


# -- numba -------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_prompt_delay(gamma, t0_min, c):
        x = c / gamma
        s = math.exp(-x) if x < 745.0 else 0.0
        if s > 1.0:
            s = 1.0
        if s < MIN_SUCCESS:
            s = MIN_SUCCESS
        return t0_min / s

    @njit(cache=True)
    def _nb_cond_delay(gamma, t1_scale, gap):
        r = math.log1p(gamma / gap)
        if r <= 0.0:
            return math.inf
        return t1_scale / r

    @njit(cache=True)
    def _nb_balance_one(a0, a1, p, t0_min, c, t1_scale, gap):
        lo = P_LO_FRAC * p
        hi = p - lo
        f_lo = _nb_prompt_delay(a0 * lo, t0_min, c) - _nb_cond_delay(a1 * (p - lo), t1_scale, gap)
        if f_lo <= 0.0:
            return lo
        f_hi = _nb_prompt_delay(a0 * hi, t0_min, c) - _nb_cond_delay(a1 * (p - hi), t1_scale, gap)
        if f_hi >= 0.0:
            return hi
        for _ in range(BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                return mid
            t0 = _nb_prompt_delay(a0 * mid, t0_min, c)
            t1 = _nb_cond_delay(a1 * (p - mid), t1_scale, gap)
            f = t0 - t1
            if abs(f) <= BISECT_REL_GAP * max(t0, t1):
                return mid
            if f > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    @njit(cache=True)
    def _nb_balance(a0, a1, p, t0_min, c, t1_scale, gap, out):
        for i in range(out.shape[0]):
            out[i] = _nb_balance_one(a0[i], a1[i], p[i], t0_min[i], c[i], t1_scale[i], gap[i])

    @njit(cache=True)
    def _nb_arq(u, success, cap, attempts, over):
        for i in range(u.shape[0]):
            s = success[i]
            if s >= 1.0:
                ratio = 0.0
            else:
                ratio = math.log(u[i]) / math.log1p(-s)
            if not ratio <= cap:
                over[i] = True
                ratio = cap
            k = math.ceil(ratio)
            attempts[i] = k if k >= 1 else 1

    def balance_split_numba(a0, a1, p_total, t0_min, c, t1_scale, gap):
        arrs = np.broadcast_arrays(
            *(np.asarray(x, dtype=float) for x in (a0, a1, p_total, t0_min, c, t1_scale, gap))
        )
        shape = arrs[0].shape
        flat = [np.ascontiguousarray(x).reshape(-1) for x in arrs]
        out = np.empty(flat[0].shape[0])
        _nb_balance(*flat, out)
        return out.reshape(shape)

    def arq_attempts_numba(u, success, cap):
        u, success = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(success, dtype=float))
        shape = u.shape
        uf = np.ascontiguousarray(u).reshape(-1)
        sf = np.ascontiguousarray(success).reshape(-1)
        attempts = np.empty(uf.shape[0], dtype=np.int64)
        over = np.zeros(uf.shape[0], dtype=np.bool_)
        _nb_arq(uf, sf, float(cap), attempts, over)
        return attempts.reshape(shape), over.reshape(shape)

    balance_split = balance_split_numba
    arq_attempts = arq_attempts_numba
else:
    balance_split = balance_split_numpy
    arq_attempts = arq_attempts_numpy
