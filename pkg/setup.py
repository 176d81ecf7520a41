import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "bdchain._kernels",
        ["src/bdchain/_kernels.pyx"],
        depends=["src/bdchain/_fpmode.h"],
        include_dirs=[np.get_include(), "src/bdchain"],
        extra_compile_args=["-O3", "-fno-math-errno"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
