import os
import sys

import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to numpy when the
# extension is missing, so a failed build must not abort installation.
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

openmp = [] if sys.platform == "darwin" or os.environ.get("NNKOP_NO_OPENMP") else ["-fopenmp"]

extensions = []
if cythonize is not None and not os.environ.get("NNKOP_NO_EXTENSION"):
    extensions = cythonize(
        [
            Extension(
                "nnkop._kernels",
                ["src/nnkop/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no FMA contraction: results must match the numpy fallback bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"] + openmp,
                extra_link_args=openmp,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
