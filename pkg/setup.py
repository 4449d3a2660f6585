"""Build script: compiles the optional segmentation kernel extension.

The compiled extension is a pure speed-up; if Cython or a C compiler is
unavailable the build degrades to the NumPy fallback that ships in
``pressclaims._kernels._pure``.  Set PRESSCLAIMS_NO_EXT=1 to skip the
extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"pressclaims: compiled kernels unavailable ({exc}); "
            "falling back to the pure NumPy implementation"
        )


def extensions():
    if os.environ.get("PRESSCLAIMS_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "pressclaims._kernels._speed",
                ["src/pressclaims/_kernels/_speed.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
