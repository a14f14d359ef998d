"""Build script.

The compiled kernels are optional: if Cython or a C compiler is missing
(or DIOPH_NO_EXT=1 is set), the package installs without the extension
and falls back to the numpy implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DIOPH_NO_EXT", "0") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "diophcurve._kernels._ckernels",
                    sources=["src/diophcurve/_kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
