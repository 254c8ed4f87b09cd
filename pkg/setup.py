"""Build script: compiles the optional Cython kernel extension.

The extension is a pure speedup; if Cython or a C compiler is missing the
install proceeds and the package falls back to the numpy implementation in
privgmm._kernels._pycore at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "privgmm._kernels._core",
                ["src/privgmm/_kernels/_core.pyx", "src/privgmm/_kernels/_pairsum.c"],
                include_dirs=[numpy.get_include(), "src/privgmm/_kernels"],
                extra_compile_args=[
                    "-O3",
                    "-march=native",
                    "-funroll-loops",
                    "-fopenmp-simd",
                ],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    sys.stderr.write(f"privgmm: skipping native kernel build ({exc!r}); "
                     "falling back to pure numpy kernels\n")

setup(ext_modules=ext_modules)
