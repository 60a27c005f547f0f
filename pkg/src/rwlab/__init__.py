"""Boundary theory of recurrent graphs on finite windows."""

import os

# the bundled TBB is too old for numba; pick OpenMP quietly
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

__version__ = "0.1.0"
