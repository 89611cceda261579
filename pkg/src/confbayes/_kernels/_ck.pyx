# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Twin of ``_pk.py``: same operations, same expression order, loops pushed
down to C. Keep the two files in sync; the parity tests compare them.
"""

import numpy as np

from libc.math cimport exp, fabs, log, log1p, sqrt

BACKEND = "compiled"

cdef double LANCZOS_G = 7.0
cdef double[9] LANCZOS
LANCZOS[0] = 0.99999999999980993
LANCZOS[1] = 676.5203681218851
LANCZOS[2] = -1259.1392167224028
LANCZOS[3] = 771.32342877765313
LANCZOS[4] = -176.61502916214059
LANCZOS[5] = 12.507343278686905
LANCZOS[6] = -0.13857109526572012
LANCZOS[7] = 9.9843695780195716e-6
LANCZOS[8] = 1.5056327351493116e-7

cdef double HALF_LOG_2PI = 0.9189385332046727
cdef double PI = 3.141592653589793


cdef double _lgamma(double x) noexcept nogil:
    cdef double z = x - 1.0
    cdef double acc = LANCZOS[0]
    cdef int i
    for i in range(1, 9):
        acc = acc + LANCZOS[i] / (z + i)
    cdef double t = z + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (z + 0.5) * log(t) - t + log(acc)


cdef double _log_binom(double n, double k) noexcept nogil:
    return _lgamma(n + 1.0) - _lgamma(k + 1.0) - _lgamma(n - k + 1.0)


cdef double _betacf(double a, double b, double x) noexcept nogil:
    cdef double eps = 3.0e-16
    cdef double fpmin = 1.0e-300
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, de, m, m2
    cdef int mi
    if fabs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for mi in range(1, 300):
        m = <double> mi
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if fabs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if fabs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        de = d * c
        h *= de
        if fabs(de - 1.0) < eps:
            break
    return h


cdef double _betainc_reg(double a, double b, double x) noexcept nogil:
    cdef double lbt, bt
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = (_lgamma(a + b) - _lgamma(a) - _lgamma(b)
           + a * log(x) + b * log1p(-x))
    bt = exp(lbt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


cdef double _bb_logpmf(double y, double m, double a, double b) noexcept nogil:
    return (_log_binom(m, y)
            + _lgamma(y + a)
            + _lgamma(m - y + b)
            - _lgamma(m + a + b)
            - _lgamma(a)
            - _lgamma(b)
            + _lgamma(a + b))


cdef double _t_logpdf(double x, double dof, double loc, double scale2) noexcept nogil:
    cdef double s = sqrt(scale2)
    cdef double t = (x - loc) / s
    return (_lgamma((dof + 1.0) / 2.0)
            - _lgamma(dof / 2.0)
            - 0.5 * log(dof * PI)
            - log(s)
            - ((dof + 1.0) / 2.0) * log1p(t * t / dof))


def log_gamma(x):
    """Natural log of the Gamma function for x > 0 (scalar or ndarray)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return _lgamma(float(arr))
    flat = np.ascontiguousarray(arr, dtype=np.float64).ravel()
    cdef double[::1] v = flat
    out = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        o[i] = _lgamma(v[i])
    return out.reshape(arr.shape)


def log_beta(a, b):
    """log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a + b)."""
    return log_gamma(a) + log_gamma(b) - log_gamma(np.asarray(a, dtype=np.float64) + b)


def log_binom(n, k):
    """Log binomial coefficient via log-gamma."""
    narr = np.asarray(n, dtype=np.float64)
    karr = np.asarray(k, dtype=np.float64)
    if narr.ndim == 0 and karr.ndim == 0:
        return _log_binom(float(narr), float(karr))
    narr, karr = np.broadcast_arrays(narr, karr)
    shape = narr.shape
    nflat = np.ascontiguousarray(narr, dtype=np.float64).ravel()
    kflat = np.ascontiguousarray(karr, dtype=np.float64).ravel()
    cdef double[::1] nv = nflat
    cdef double[::1] kv = kflat
    out = np.empty(nflat.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(nv.shape[0]):
        o[i] = _log_binom(nv[i], kv[i])
    return out.reshape(shape)


def betainc_reg(double a, double b, double x):
    """Regularized incomplete beta function I_x(a, b), a, b > 0."""
    return _betainc_reg(a, b, x)


def bb_logpmf(y, m, a, b):
    """Beta-Binomial log pmf at y (scalar or ndarray) over {0..m}."""
    cdef double mm = <double> m
    cdef double aa = <double> a
    cdef double bb = <double> b
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 0:
        return _bb_logpmf(float(arr), mm, aa, bb)
    flat = np.ascontiguousarray(arr, dtype=np.float64).ravel()
    cdef double[::1] v = flat
    out = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        o[i] = _bb_logpmf(v[i], mm, aa, bb)
    return out.reshape(arr.shape)


def bb_logpmf_all(m, a, b):
    """Beta-Binomial log pmf over the full support {0..m}."""
    cdef int mm = <int> m
    cdef double aa = <double> a
    cdef double bb = <double> b
    out = np.empty(mm + 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef int j
    for j in range(mm + 1):
        o[j] = _bb_logpmf(<double> j, <double> mm, aa, bb)
    return out


def t_logpdf(x, dof, loc, scale2):
    """Location-scale Student-t log density (scalar or ndarray)."""
    cdef double d = <double> dof
    cdef double l = <double> loc
    cdef double s2 = <double> scale2
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        return _t_logpdf(float(arr), d, l, s2)
    flat = np.ascontiguousarray(arr, dtype=np.float64).ravel()
    cdef double[::1] v = flat
    out = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        o[i] = _t_logpdf(v[i], d, l, s2)
    return out.reshape(arr.shape)


def t_cdf(double x, double dof, double loc, double scale2):
    """Location-scale Student-t CDF via the regularized incomplete beta."""
    cdef double t = (x - loc) / sqrt(scale2)
    cdef double xb = dof / (dof + t * t)
    cdef double p = 0.5 * _betainc_reg(dof / 2.0, 0.5, xb)
    if t >= 0.0:
        return 1.0 - p
    return p


SCORE_PPD = 0
SCORE_BRES = 1
SCORE_QBRES = 2
SCORE_DBRES = 3

# Near-ties within this relative tolerance count as ties (see core.REL_TIE_TOL).
cdef double REL_TIE_TOL = 1e-9


cdef inline double _fmax(double x, double y) noexcept nogil:
    return x if x > y else y


cdef inline double _fabsmax(double x, double y) noexcept nogil:
    return _fmax(fabs(x), fabs(y))


cdef inline bint _ge_nonconf(double r_obs, double r_cand) noexcept nogil:
    return r_obs - r_cand >= -REL_TIE_TOL * _fabsmax(r_obs, r_cand)


cdef inline bint _ge_conf(double r_obs, double r_cand) noexcept nogil:
    return r_cand - r_obs >= -REL_TIE_TOL * _fabsmax(r_obs, r_cand)


def bb_full_cp_mask(ys, m, a, b, k, score_id, alpha_inner):
    """Inclusion mask of the full conformal set over {0..m} for a Binomial sample.

    For every candidate y the Beta posterior is refitted on the augmented
    sample, all n observed outcomes plus the candidate are scored under the
    refitted predictive distribution, and the candidate is kept when at
    least ``k`` observed scores are at least as implausible as its own.
    ``k`` <= 0 keeps everything.
    """
    ys_arr = np.ascontiguousarray(np.asarray(ys, dtype=np.int64))
    cdef long long[::1] yv = ys_arr
    cdef int n = <int> ys_arr.shape[0]
    cdef int mm = <int> m
    cdef double aa = <double> a
    cdef double bb = <double> b
    cdef int kk = <int> k
    cdef int sid = <int> score_id
    cdef double ainn = <double> alpha_inner

    cdef long long s = 0
    cdef int i, c, j
    for i in range(n):
        s += yv[i]

    mask = np.zeros(mm + 1, dtype=np.uint8)
    cdef unsigned char[::1] mv = mask

    logc_arr = np.empty(mm + 1, dtype=np.float64)
    cdef double[::1] logc = logc_arr
    pmf_arr = np.empty(mm + 1, dtype=np.float64)
    cdef double[::1] pmf = pmf_arr

    cdef double ap, bp, mean_c, r_cand, v, cdf, p_lo, p_hi
    cdef double d1, d2, d3, d4
    cdef double q_lo, q_hi, p_map, yf
    cdef int count, map_idx
    cdef bint found_hi

    for j in range(mm + 1):
        logc[j] = _log_binom(<double> mm, <double> j)

    for c in range(mm + 1):
        ap = s + c + aa
        bp = (n + 1) * mm - s - c + bb

        if sid == 1:  # bres
            mean_c = mm * ap / (ap + bp)
            r_cand = fabs(c - mean_c)
            count = 0
            for i in range(n):
                if _ge_nonconf(fabs(yv[i] - mean_c), r_cand):
                    count += 1
            mv[c] = 1 if count >= kk else 0
            continue

        # Same term order as bb_logpmf; constants hoisted out of the j loop.
        d1 = _lgamma(mm + ap + bp)
        d2 = _lgamma(ap)
        d3 = _lgamma(bp)
        d4 = _lgamma(ap + bp)
        for j in range(mm + 1):
            v = logc[j] + _lgamma(j + ap) + _lgamma(mm - j + bp) - d1 - d2 - d3 + d4
            pmf[j] = exp(v)

        if sid == 0:  # ppd
            r_cand = pmf[c]
            count = 0
            for i in range(n):
                if _ge_conf(pmf[yv[i]], r_cand):
                    count += 1
        elif sid == 3:  # dbres
            map_idx = 0
            for j in range(1, mm + 1):
                if pmf[j] > pmf[map_idx]:
                    map_idx = j
            p_map = pmf[map_idx]
            r_cand = fabs(pmf[c] - p_map)
            count = 0
            for i in range(n):
                if _ge_nonconf(fabs(pmf[yv[i]] - p_map), r_cand):
                    count += 1
        elif sid == 2:  # qbres
            p_lo = ainn / 2.0
            p_hi = 1.0 - ainn / 2.0
            cdf = 0.0
            q_lo = -1.0
            q_hi = <double> mm
            found_hi = False
            for j in range(mm + 1):
                cdf = cdf + pmf[j]
                if q_lo < 0.0 and cdf >= p_lo:
                    q_lo = <double> j
                if (not found_hi) and cdf >= p_hi:
                    q_hi = <double> j
                    found_hi = True
            if q_lo < 0.0:
                q_lo = <double> mm
            r_cand = _fmax(q_lo - c, c - q_hi)
            count = 0
            for i in range(n):
                yf = <double> yv[i]
                if _ge_nonconf(_fmax(q_lo - yf, yf - q_hi), r_cand):
                    count += 1
        else:
            raise ValueError(f"unknown score_id {score_id}")

        mv[c] = 1 if count >= kk else 0

    return mask
