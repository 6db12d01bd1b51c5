"""Hot reduction kernels: compiled core with a numpy fallback.

Two kernels carry essentially all the arithmetic in this package:

* ``logc_sum_axis``  stabilised complex log-sum-exp along the last axis
  (every quadrature, convolution stage and pairing slice reduces here);
* ``osc_reduce``     the oscillatory row reduction inside the STFT and
  Wigner transforms.

The Cython build of ``logc_sum_axis`` is selected when available: it wins
3-4x over numpy by skipping terms that cannot move the sum.  ``osc_reduce``
stays on the numpy implementation even when the extension is present,
because its inner loop is a complex matrix product and BLAS beats a scalar
loop on every realistic shape (see benchmarks/bench_kernels.py, which
measures both).  ``BACKEND`` names the active combination; setting
``PHASEQUANT_BACKEND=python`` forces the pure fallback.  ``get_backend``
returns an unmixed implementation for the cross-checking tests and the
benchmark.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:
    _core = None

if _core is None or os.environ.get("PHASEQUANT_BACKEND") == "python":
    BACKEND = "python"
    logc_sum_axis = _fallback.logc_sum_axis
else:
    BACKEND = "compiled"
    logc_sum_axis = _core.logc_sum_axis

osc_reduce = _fallback.osc_reduce


def available_backends():
    names = ["python"]
    if _core is not None:
        names.append("compiled")
    return names


def get_backend(name):
    if name == "python":
        return _fallback
    if name == "compiled" and _core is not None:
        return _core
    raise ValueError(f"backend {name!r} not available")
