"""Backend selection for the pointwise kernels.

The compiled extension is used when it imports; set ``SOBOGRAD_PURE_PYTHON=1``
to force the numpy fallback.  Both backends share one contract, documented
in ``_kernels_py``.
"""
import os

from . import _kernels_py

if os.environ.get("SOBOGRAD_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND

gpe_nonlinear = _impl.gpe_nonlinear
line_moments = _impl.line_moments
saturable_terms = _impl.saturable_terms
saturable_line_delta = _impl.saturable_line_delta
error_residual = _impl.error_residual
error_line_value = _impl.error_line_value
error_gradient_combine = _impl.error_gradient_combine
