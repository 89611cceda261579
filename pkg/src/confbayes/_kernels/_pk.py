"""Pure-Python (numpy) kernel backend.

Mirrors the compiled extension in ``_ck.pyx`` operation for operation; the
package selects one of the two at import time. Every function here must
stay structurally identical to its compiled twin so that tie-sensitive
comparisons resolve the same way on both backends.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"

# Lanczos approximation, g=7, 9 coefficients. Relative error below 1e-13
# over the positive reals, which is what the Beta-Binomial pmf needs for
# trial counts up to ~1e4.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_2PI = 0.9189385332046727  # log(2*pi)/2


def _log_gamma_arr(x: np.ndarray) -> np.ndarray:
    z = x - 1.0
    acc = np.full_like(z, _LANCZOS[0])
    for i in range(1, 9):
        acc = acc + _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(acc)


def _as_output(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def log_gamma(x):
    """Natural log of the Gamma function for x > 0 (scalar or ndarray)."""
    arr = np.asarray(x, dtype=np.float64)
    return _as_output(_log_gamma_arr(arr), arr.ndim == 0)


def log_beta(a, b):
    """log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b)."""
    aa = np.asarray(a, dtype=np.float64)
    bb = np.asarray(b, dtype=np.float64)
    out = _log_gamma_arr(aa) + _log_gamma_arr(bb) - _log_gamma_arr(aa + bb)
    return _as_output(out, aa.ndim == 0 and bb.ndim == 0)


def log_binom(n, k):
    """Log binomial coefficient via log-gamma."""
    nn = np.asarray(n, dtype=np.float64)
    kk = np.asarray(k, dtype=np.float64)
    out = _log_gamma_arr(nn + 1.0) - _log_gamma_arr(kk + 1.0) - _log_gamma_arr(nn - kk + 1.0)
    return _as_output(out, nn.ndim == 0 and kk.ndim == 0)


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta, modified Lentz scheme.
    eps = 3.0e-16
    fpmin = 1.0e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for mi in range(1, 300):
        m = float(mi)
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        de = d * c
        h *= de
        if abs(de - 1.0) < eps:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b), a, b > 0."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = (
        float(log_gamma(a + b))
        - float(log_gamma(a))
        - float(log_gamma(b))
        + a * float(np.log(x))
        + b * float(np.log1p(-x))
    )
    bt = float(np.exp(lbt))
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def bb_logpmf(y, m: int, a: float, b: float):
    """Beta-Binomial log pmf at y (scalar or ndarray) over {0..m}."""
    yarr = np.asarray(y, dtype=np.float64)
    mf = np.float64(m)
    out = (
        (_log_gamma_arr(mf + 1.0) - _log_gamma_arr(yarr + 1.0) - _log_gamma_arr(mf - yarr + 1.0))
        + _log_gamma_arr(yarr + a)
        + _log_gamma_arr(mf - yarr + b)
        - _log_gamma_arr(np.float64(m + a + b))
        - _log_gamma_arr(np.float64(a))
        - _log_gamma_arr(np.float64(b))
        + _log_gamma_arr(np.float64(a + b))
    )
    return _as_output(out, yarr.ndim == 0)


def bb_logpmf_all(m: int, a: float, b: float) -> np.ndarray:
    """Beta-Binomial log pmf over the full support {0..m}."""
    return bb_logpmf(np.arange(m + 1, dtype=np.float64), m, a, b)


def t_logpdf(x, dof: float, loc: float, scale2: float):
    """Location-scale Student-t log density (scalar or ndarray)."""
    x = np.asarray(x, dtype=np.float64)
    s = np.sqrt(scale2)
    t = (x - loc) / s
    out = (
        log_gamma((dof + 1.0) / 2.0)
        - log_gamma(dof / 2.0)
        - 0.5 * np.log(dof * np.pi)
        - np.log(s)
        - ((dof + 1.0) / 2.0) * np.log1p(t * t / dof)
    )
    if out.ndim == 0:
        return float(out)
    return out


def t_cdf(x: float, dof: float, loc: float, scale2: float) -> float:
    """Location-scale Student-t CDF via the regularized incomplete beta."""
    t = (x - loc) / float(np.sqrt(scale2))
    xb = dof / (dof + t * t)
    p = 0.5 * betainc_reg(dof / 2.0, 0.5, xb)
    if t >= 0.0:
        return 1.0 - p
    return p


# Conformity score identifiers shared with the compiled backend.
SCORE_PPD = 0
SCORE_BRES = 1
SCORE_QBRES = 2
SCORE_DBRES = 3

# Near-ties within this relative tolerance count as ties (see core.REL_TIE_TOL).
REL_TIE_TOL = 1e-9


def _count_nonconf(r_obs: np.ndarray, r_cand: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(r_obs), np.abs(r_cand))
    return np.sum(r_obs - r_cand >= -REL_TIE_TOL * scale, axis=1)


def _count_conf(r_obs: np.ndarray, r_cand: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.abs(r_obs), np.abs(r_cand))
    return np.sum(r_cand - r_obs >= -REL_TIE_TOL * scale, axis=1)


def bb_full_cp_mask(
    ys: np.ndarray,
    m: int,
    a: float,
    b: float,
    k: int,
    score_id: int,
    alpha_inner: float,
) -> np.ndarray:
    """Inclusion mask of the full conformal set over {0..m} for a Binomial sample.

    For every candidate y the Beta posterior is refitted on the augmented
    sample, all n observed outcomes plus the candidate are scored under the
    refitted predictive distribution, and the candidate is kept when at
    least ``k`` observed scores are at least as implausible as its own.
    ``k`` <= 0 keeps everything.
    """
    ys = np.asarray(ys, dtype=np.int64)
    n = ys.size
    s = int(ys.sum())
    cand = np.arange(m + 1, dtype=np.int64)
    ap = s + cand + a  # augmented Beta parameters, one per candidate
    bp = (n + 1) * m - s - cand + b

    if score_id == SCORE_BRES:
        mean_c = m * ap / (ap + bp)
        r_obs = np.abs(ys[None, :].astype(np.float64) - mean_c[:, None])
        r_cand = np.abs(cand.astype(np.float64) - mean_c)
        count = _count_nonconf(r_obs, r_cand[:, None])
        return (count >= k).astype(np.uint8)

    # Remaining scores need the refitted pmf over the whole support. The
    # expression grouping matches bb_logpmf term for term so the fast path
    # and the generic engine agree exactly.
    j = np.arange(m + 1, dtype=np.float64)
    logc = log_binom(float(m), j)
    logpmf = (
        logc[None, :]
        + log_gamma(j[None, :] + ap[:, None])
        + log_gamma((m - j)[None, :] + bp[:, None])
        - log_gamma(m + ap + bp)[:, None]
        - log_gamma(ap)[:, None]
        - log_gamma(bp)[:, None]
        + log_gamma(ap + bp)[:, None]
    )
    pmf = np.exp(logpmf)

    rows = np.arange(m + 1)
    if score_id == SCORE_PPD:
        r_obs = pmf[:, ys]
        r_cand = pmf[rows, cand]
        count = _count_conf(r_obs, r_cand[:, None])
    elif score_id == SCORE_DBRES:
        map_idx = np.argmax(pmf, axis=1)  # first index on ties
        p_map = pmf[rows, map_idx]
        r_obs = np.abs(pmf[:, ys] - p_map[:, None])
        r_cand = np.abs(pmf[rows, cand] - p_map)
        count = _count_nonconf(r_obs, r_cand[:, None])
    elif score_id == SCORE_QBRES:
        cdf = np.cumsum(pmf, axis=1)
        p_lo = alpha_inner / 2.0
        p_hi = 1.0 - alpha_inner / 2.0
        q_lo = np.argmax(cdf >= p_lo, axis=1).astype(np.float64)
        ge_hi = cdf >= p_hi
        # cumulative rounding can leave the last cdf just under 1
        ge_hi[:, m] = True
        q_hi = np.argmax(ge_hi, axis=1).astype(np.float64)
        yf = ys.astype(np.float64)
        r_obs = np.maximum(q_lo[:, None] - yf[None, :], yf[None, :] - q_hi[:, None])
        cf = cand.astype(np.float64)
        r_cand = np.maximum(q_lo - cf, cf - q_hi)
        count = _count_nonconf(r_obs, r_cand[:, None])
    else:
        raise ValueError(f"unknown score_id {score_id}")

    return (count >= k).astype(np.uint8)
