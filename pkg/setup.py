from setuptools import Extension, setup

# The compiled kernel is optional: if Cython (or a C compiler) is missing the
# install still succeeds and the package falls back to the pure-Python kernels.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "etcdelay._kernel",
                ["src/etcdelay/_kernel.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
