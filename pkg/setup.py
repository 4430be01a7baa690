import os

from setuptools import setup

ext_modules = []
if os.environ.get("HYPERWAVE_NO_EXT", "") in ("", "0"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "hyperwave._kernels",
                    ["src/hyperwave/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # no Cython or numpy at build time: the pure-Python kernels are used
        ext_modules = []

setup(ext_modules=ext_modules)
