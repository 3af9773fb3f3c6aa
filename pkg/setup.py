import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("POLYBALL_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "polyball._kernels",
                    ["src/polyball/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O2"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
