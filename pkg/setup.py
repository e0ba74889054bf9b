import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "topslice.topology._kernel",
        ["src/topslice/topology/_kernel.pyx"],
        extra_compile_args=["-O3"],
    )
]

# The compiled kernel is optional: the package falls back to the pure-Python
# implementation when the extension is missing (set TOPSLICE_NO_EXT=1 to skip
# the build deliberately).
if cythonize is not None and os.environ.get("TOPSLICE_NO_EXT") != "1":
    ext_modules = cythonize(extensions, language_level=3)
else:
    ext_modules = []

setup(ext_modules=ext_modules)
