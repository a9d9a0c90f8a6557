"""Build the optional compiled pair-sum extension.

The package works without it; ``eucdesign._backend`` falls back to NumPy.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("EUCDESIGN_NO_EXT"):
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
                    "eucdesign._pairsum",
                    ["src/eucdesign/_pairsum.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
