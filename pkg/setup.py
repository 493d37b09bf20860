"""Build script for the compiled OMP kernel.

The extension is optional at runtime: patchsphere falls back to a pure
numpy implementation when the compiled module is absent (see
patchsphere.sparse).
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "patchsphere._omp_fast",
                ["src/patchsphere/_omp_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
