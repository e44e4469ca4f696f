import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPANNER_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "spanner._kernel",
                    ["src/spanner/_kernel.pyx"],
                    language="c++",
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
