import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dispersim._kernels",
                ["src/dispersim/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # No -ffast-math / -march=native: the stepper promises
                # bit-reproducible trajectories, so IEEE semantics stay on.
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-python kernel fallback is selected at import time, so a build
    # without Cython still produces a working (slower) package.
    ext_modules = []

setup(ext_modules=ext_modules)
