"""Builds the optional compiled flight-dynamics kernel.

The package works without the extension (a pure-Python kernel is selected at
import time); the compiled kernel just makes simulation stepping faster.
-ffp-contract=off keeps the compiled kernel bit-identical to the pure one.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "aircombat.simcore._fdm_c",
                ["src/aircombat/simcore/_fdm_c.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
