# Builds the optional compiled kernel extension. If Cython or a C compiler
# is unavailable the install still succeeds and the package falls back to
# the pure-Python kernels at import time.
#
# To build in place:  python setup.py build_ext --inplace

import os

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    # -ffp-contract=off keeps both backends bit-compatible (no FMA fusing).
    ext_modules = cythonize(
        [
            Extension(
                "confbayes._kernels._ck",
                ["src/confbayes/_kernels/_ck.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

if os.environ.get("CONFBAYES_NO_EXT"):
    ext_modules = []

setup(ext_modules=ext_modules)
