"""Worker-process initializer.  Must stay free of numpy imports: it runs in
the child before numpy loads, so the thread caps below actually take effect.
Pinning BLAS to one thread keeps results byte-identical whatever the pool
width, since no reduction order ever changes."""

import os

_VARS = (
    "OPENBLAS_NUM_THREADS",
    "OMP_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def limit_blas_threads() -> None:
    for var in _VARS:
        os.environ[var] = "1"
