"""Builds the optional compiled kernel extension.

The package is fully functional without it (kernels.py falls back to the
pure-Python implementation), so any failure to cythonize or compile is
downgraded to a warning and the install proceeds.
"""

import sys

from setuptools import Extension, setup


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("cython not available; building without the compiled kernels",
              file=sys.stderr)
        return []
    ext = Extension("zdcubes._kernels_c", ["src/zdcubes/_kernels_c.pyx"])
    try:
        return cythonize([ext], language_level=3)
    except Exception as exc:  # noqa: BLE001 - degrade to pure python on any build issue
        print(f"cythonize failed ({exc}); building without the compiled kernels",
              file=sys.stderr)
        return []


setup(ext_modules=_extensions())
