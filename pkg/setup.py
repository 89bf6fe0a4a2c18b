# Builds the optional compiled kernels; a failed build leaves the numpy fallback in charge.
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("possprev._ckernels", ["src/possprev/_ckernels.pyx"],
                   extra_compile_args=["-O3"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
