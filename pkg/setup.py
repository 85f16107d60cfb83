"""Optional compiled kernel; the package falls back to pure Python without it."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPINWN_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("spinwn._kernels", ["src/spinwn/_kernels.pyx"],
                       language="c++", extra_compile_args=["-O3", "-std=c++17"])],
            language_level=3,
        )
    except ImportError:  # Cython missing: ship the fallback only
        ext_modules = []

setup(ext_modules=ext_modules)
