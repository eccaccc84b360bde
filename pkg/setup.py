"""Build hook for the optional compiled kernel backend.

The package is pure Python plus one Cython extension holding the hot
loops (plan evaluation and the lattice solver).  If Cython or a C
compiler is unavailable the build silently skips the extension and the
package falls back to the pure implementation at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dispatchkit._kernels._core",
                ["src/dispatchkit/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
