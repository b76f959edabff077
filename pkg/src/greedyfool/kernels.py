"""Kernel dispatch: numba-compiled hot loops with a pure-numpy fallback.

The numba path is the default. Set GREEDYFOOL_NO_NUMBA=1 (any non-empty
value) before import to force the numpy fallback; the flag also serves
environments where numba cannot compile. ``USING_NUMBA`` reports which
path is active. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _kernels_numpy

NUMBA_ENV_FLAG = "GREEDYFOOL_NO_NUMBA"

USING_NUMBA = False
_impl = _kernels_numpy

if not os.environ.get(NUMBA_ENV_FLAG):
    try:
        from . import _kernels_numba

        _impl = _kernels_numba
        USING_NUMBA = True
    except ImportError:  # numba missing or broken: fall back silently
        pass

window_max = _impl.window_max
window_sd = _impl.window_sd
integ_loss_terms = _impl.integ_loss_terms
image_pair_loss = _impl.image_pair_loss
toy_forward = _impl.toy_forward
