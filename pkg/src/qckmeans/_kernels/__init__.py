"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is imported if it was built; otherwise the
numpy implementations in ``_pykernels`` are used. Setting the environment
variable ``QCKMEANS_PURE_PYTHON=1`` forces the numpy path.
"""
import os

from . import _pykernels as pure

compiled = None
if os.environ.get("QCKMEANS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

active = compiled if compiled is not None else pure
BACKEND = active.NAME

apply_1q = active.apply_1q
apply_xy = active.apply_xy
# numpy's vectorized multiply beats the compiled loop here
apply_diag = pure.apply_diag
controlled_phase_factors = active.controlled_phase_factors
qubo_energies = active.qubo_energies
nearest = active.nearest

__all__ = [
    "BACKEND", "compiled", "pure", "apply_1q", "apply_xy", "apply_diag",
    "controlled_phase_factors", "qubo_energies", "nearest",
]
