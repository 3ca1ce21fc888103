import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiled kernel's arithmetic order aligned with
# the numpy fallback (agreement to rounding); -fcx-limited-range skips the C99
# NaN/Inf recovery path for complex multiplies, which unit-norm data never hits.
ext_modules = [
    Extension(
        "meshcodec._kernel._core",
        sources=["src/meshcodec/_kernel/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off", "-fcx-limited-range"],
    )
]

setup(
    ext_modules=cythonize(
        ext_modules,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    ),
)
