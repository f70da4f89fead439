import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "opdsim._kernels",
        sources=["src/opdsim/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # keep libm results identical to the Python fallback: no sin/cos -> sincos fusion, no FMA
        extra_compile_args=["-O2", "-fno-builtin-sin", "-fno-builtin-cos", "-ffp-contract=off"],
        language="c++",
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
