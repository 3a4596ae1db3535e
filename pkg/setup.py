from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = cythonize(
    [
        Extension(
            "atspp.kernels._core",
            ["src/atspp/kernels/_core.pyx"],
            extra_compile_args=["-O3"],
        )
    ],
    language_level="3",
)

setup(ext_modules=ext_modules)
