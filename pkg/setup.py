# Builds the optional compiled jet kernel when Cython is available.
# Without it the package falls back to the pure-numpy kernel at import time.
#   python setup.py build_ext --inplace
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "finslerlab.jets._kernels",
            ["src/finslerlab/jets/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
