"""Build script for the optional compiled stencil kernels.

The package works without the extension (a pure-numpy twin is selected at
import time); compiling it just makes the hot loops faster.  Set
SKTLAB_PURE_PYTHON=1 to skip the build entirely.

-ffp-contract=off keeps the compiler from fusing multiply-adds, so the
compiled kernels produce bit-identical results to the numpy fallback.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SKTLAB_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sktlab._kernels_cy",
                    ["src/sktlab/_kernels_cy.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
