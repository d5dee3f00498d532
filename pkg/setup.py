import os

from setuptools import setup

ext_modules = []
if os.environ.get("SIGNUM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install
        pass
    else:
        ext_modules = cythonize(
            "src/signum/_ckernels.pyx",
            compiler_directives={"language_level": "3"},
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
            ext.extra_compile_args.append("-O3")
            ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))

setup(ext_modules=ext_modules)
