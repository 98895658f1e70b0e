"""Builds the optional Cython kernel for grid interpolation.

The package works without it: hybridscale._kernels falls back to the pure
Python implementation when the compiled module is missing.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hybridscale._kernels._grid_cy",
                ["src/hybridscale/_kernels/_grid_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
