"""Build the optional compiled FDTD kernels.

Without Cython or a C compiler the package still installs and runs on the
numpy fallback.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("PCMRCS_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "pcmrcs.solver._kernels",
                    ["src/pcmrcs/solver/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction: keeps rounding identical to the numpy path
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
