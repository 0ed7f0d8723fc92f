import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HOMEOSTAT_NO_EXT", "0") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; installing the pure-Python kernel only")
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "homeostat._kernel",
                    ["src/homeostat/_kernel.pyx"],
                    # no FMA contraction: keep bit-for-bit agreement with the Python twin
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
