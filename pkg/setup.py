import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels are optional: if the build fails (or Cython is
# missing) the package falls back to the pure-Python implementations in
# torustomo._kernels.fallback.
ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "torustomo._kernels._core",
                ["src/torustomo/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
