"""Build script: compiles the optional Cython stepping kernel.

The package works without the extension (a pure-Python twin of the kernel
is selected at import time), so a missing compiler or Cython must not fail
the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "chemoseek._backend._ckernel",
                ["src/chemoseek/_backend/_ckernel.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off keeps C arithmetic bit-compatible with
                # the pure-Python kernel (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
