"""Builds the compiled statevector kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a missing compiler or Cython only costs speed.
"""
import warnings

from setuptools import find_packages, setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "geoqgan.backends._cykernel",
                ["src/geoqgan/backends/_cykernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython/numpy unavailable at build time; installing pure-Python fallback only.")
    extensions = []

setup(
    ext_modules=extensions,
    package_dir={"": "src"},
    packages=find_packages("src"),
)
