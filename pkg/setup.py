"""Build script for the optional compiled distance kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so the extension is marked optional: a missing compiler or
Cython only costs speed, never a failed install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "clarq._ckern",
                sources=["src/clarq/_ckern.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
