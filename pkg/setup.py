"""Build script for the optional compiled convolution kernel.

The package is fully functional without the extension (a pure-Python
twin of the kernel is selected at import time); compiling just makes the
exact-rational convolution hot path faster.  Build in place with:

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python kernel if compilation is impossible."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"warning: extension build skipped ({exc}); "
                  "falling back to the pure-Python kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to the pure-Python kernel")


PYX = "src/tailkit/_conv_cy.pyx"
_HERE = os.path.dirname(os.path.abspath(__file__))

ext_modules = []
if not os.environ.get("TAILKIT_NO_EXT") and os.path.exists(os.path.join(_HERE, PYX)):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("tailkit._conv_cy", [PYX])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
