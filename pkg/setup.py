"""Build hook for the optional compiled sampler kernels.

The package is fully functional without the extension: ``spherelangevin._kernels``
falls back to the pure-Python kernels at import time when the compiled module is
missing.  A failed compile therefore downgrades the install instead of breaking it.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator if we can, warn and continue if we cannot."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, broken headers, ...
            self._warn(exc)

    def build_extension(self, ext):
        # The backends promise bit-identical draws, but gcc fuses the
        # adjacent cos(a)/sin(a) of the Box-Muller pair into one glibc
        # sincos() call, which is allowed to round differently in the last
        # ulp from the separate calls the pure-Python kernels make.  Keep
        # the calls separate so the compiled stream matches bit for bit.
        if self.compiler.compiler_type != "msvc":
            ext.extra_compile_args = list(ext.extra_compile_args or [])
            for flag in ("-fno-builtin-sin", "-fno-builtin-cos",
                         "-fno-builtin-sincos"):
                if flag not in ext.extra_compile_args:
                    ext.extra_compile_args.append(flag)
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            "could not build the compiled sampler kernels (%s); "
            "falling back to the pure-Python implementation" % (exc,),
            stacklevel=1,
        )


extensions = [
    Extension(
        "spherelangevin._kernels._cykern",
        ["src/spherelangevin/_kernels/_cykern.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3),
    cmdclass={"build_ext": optional_build_ext},
)
