"""Build script for the optional compiled split-search kernels.

The package works without the extension (a pure numpy fallback is selected
at import time), so a failed compile only costs speed.
"""

from setuptools import setup
from setuptools.extension import Extension


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "flowense._kernels",
        ["src/flowense/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        language="c++",
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=make_extensions())
