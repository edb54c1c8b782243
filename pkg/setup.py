import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "henonlab._kernel._core",
                ["src/henonlab/_kernel/_core.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Cython unavailable: install pure-Python only; the kernel selector
    # falls back to the numpy implementation at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
