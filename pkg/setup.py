from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "qrl_lake._statevec_c",
                ["src/qrl_lake/_statevec_c.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

# The compiled kernel is optional: qrl_lake falls back to the pure-numpy
# kernel at import time if the extension is missing.
setup(ext_modules=ext_modules)
