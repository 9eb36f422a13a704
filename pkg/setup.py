"""Build script: compiles the optional trajectory kernel extension.

The package works without the extension (a pure-Python kernel is selected
at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "budgetlab._kernels_cy",
                ["src/budgetlab/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"budgetlab: skipping compiled kernel ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
