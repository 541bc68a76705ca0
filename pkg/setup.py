"""Build script for the optional compiled kernel backend.

The package is pure Python plus one Cython extension holding the batched
log-probability kernels. The extension is marked optional: if no compiler
or Cython is available the install still succeeds and the package falls
back to the NumPy implementations of the same kernels.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "tumatch._core_cy",
                ["src/tumatch/_core_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
