from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython available: install runs with the pure-Python engine only.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "uncoordsim._kernel",
                ["src/uncoordsim/_kernel.pyx"],
                # No -ffast-math: the compiled engine must stay bit-identical
                # to the pure-Python one.
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
