"""Backend selection for the ring kernels.

The numba path is used when numba imports cleanly, unless the environment
sets ``SECLOGREG_BACKEND=numpy``.  Both backends are importable directly
(``_kernels_numpy`` / ``_kernels_numba``) for benchmarks and cross-checks.
"""
import os

from . import _kernels_numpy

BACKEND = "numpy"
_impl = _kernels_numpy

if os.environ.get("SECLOGREG_BACKEND", "numba").lower() != "numpy":
    try:
        from . import _kernels_numba
    except ImportError:  # pragma: no cover - numba missing
        pass
    else:
        BACKEND = "numba"
        _impl = _kernels_numba

add = _impl.add
sub = _impl.sub
neg = _impl.neg
mul = _impl.mul
sign = _impl.sign
sar = _impl.sar
sum_rows = _impl.sum_rows
encode = _impl.encode
decode = _impl.decode
