"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python fallback with the
same interface is selected at import time), so any failure to cythonize
or compile degrades to a pure-Python install instead of aborting.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "dyadnav.core._kernels",
                sources=["src/dyadnav/core/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build env
    sys.stderr.write(f"dyadnav: skipping compiled kernels ({exc}); "
                     "pure-Python fallback will be used\n")

setup(ext_modules=ext_modules)
