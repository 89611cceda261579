"""Numeric kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise the
numpy fallback is used. ``CONFBAYES_PURE_PYTHON=1`` forces the fallback,
which the benchmark suite uses to compare the two.
"""

import os
import warnings

if os.environ.get("CONFBAYES_PURE_PYTHON"):
    from confbayes._kernels import _pk as _backend
else:
    try:
        from confbayes._kernels import _ck as _backend  # type: ignore[no-redef]
    except ImportError:
        warnings.warn(
            "compiled kernels unavailable; using the pure-Python fallback "
            "(build with `python setup.py build_ext --inplace` for speed)",
            RuntimeWarning,
            stacklevel=2,
        )
        from confbayes._kernels import _pk as _backend  # type: ignore[no-redef]

BACKEND = _backend.BACKEND

SCORE_PPD = _backend.SCORE_PPD
SCORE_BRES = _backend.SCORE_BRES
SCORE_QBRES = _backend.SCORE_QBRES
SCORE_DBRES = _backend.SCORE_DBRES

log_gamma = _backend.log_gamma
log_beta = _backend.log_beta
log_binom = _backend.log_binom
betainc_reg = _backend.betainc_reg
bb_logpmf = _backend.bb_logpmf
bb_logpmf_all = _backend.bb_logpmf_all
t_logpdf = _backend.t_logpdf
t_cdf = _backend.t_cdf
bb_full_cp_mask = _backend.bb_full_cp_mask


def backend_name() -> str:
    """Name of the kernel backend in use ('compiled' or 'pure')."""
    return BACKEND
