"""Build script: compiles the optional Cython jet kernel.

The package works without the extension (a pure-numpy kernel is selected at
import time), so a failing Cython build degrades gracefully to a slower but
equivalent implementation.
"""

import numpy
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "crtractor._jetfast",
                ["src/crtractor/_jetfast.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: Cython extension disabled ({exc}); using pure-python kernel")

setup(ext_modules=ext_modules)
