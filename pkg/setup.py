import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled kernels bit-identical to the pure
# Python fallback (no FMA contraction or reassociation of IEEE doubles).
ext = Extension(
    "germflow._kernels._native",
    ["src/germflow/_kernels/_native.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
