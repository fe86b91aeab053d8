import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the numpy
# implementation when the extension is unavailable.
setup(
    ext_modules=cythonize(
        [
            Extension(
                "gdkkt._core._kernels",
                sources=["src/gdkkt/_core/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
)
