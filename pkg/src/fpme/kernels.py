"""Inner-loop kernels: the compiled extension when built, NumPy otherwise.

Set FPME_PURE_PYTHON=1 to force the NumPy versions.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("FPME_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass

guarded_power = _impl.guarded_power
euler_update = _impl.euler_update
heun_combine = _impl.heun_combine
shell_sums = _impl.shell_sums
transport_rhs = _impl.transport_rhs

__all__ = ["BACKEND", "guarded_power", "euler_update", "heun_combine", "shell_sums", "transport_rhs"]
