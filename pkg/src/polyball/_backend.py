"""Select the compiled integrator kernel, falling back to pure Python.

Set ``POLYBALL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernel

BACKEND = "python"
shear_flow = _pykernel.shear_flow

if os.environ.get("POLYBALL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        shear_flow = _kernels.shear_flow

HORIZON = _pykernel.HORIZON
BOUNDARY = _pykernel.BOUNDARY
EXTINCT = _pykernel.EXTINCT
FLOOR = _pykernel.FLOOR
MAX_STEPS = _pykernel.MAX_STEPS
TIMEOUT = _pykernel.TIMEOUT
UNDERFLOW = _pykernel.UNDERFLOW

STATUS_NAMES = {
    HORIZON: "horizon",
    BOUNDARY: "boundary",
    EXTINCT: "extinct",
    FLOOR: "floor",
    MAX_STEPS: "max_steps",
    TIMEOUT: "timeout",
    UNDERFLOW: "underflow",
}
