"""Backend selection for the engine's inner loop.

The compiled extension is used when it is importable and
``HOMEOSTAT_PURE_PYTHON`` is unset or ``0``; otherwise the pure-Python twin
takes over. ``BACKEND`` names the choice.
"""

import os

from . import _kernel_py

STATE_SIZE = 5
STATS_SIZE = 5
I_SYN, V_THR, SW, V_MEM, REFR = range(STATE_SIZE)
S_MIN, S_MAX, S_SAT, S_VIOL, S_BAD_T = range(STATS_SIZE)

OK, SPIKES_FULL, OVERFLOW = 0, 1, 2

advance_py = _kernel_py.advance

try:
    from ._kernel import advance as advance_c
except ImportError:  # extension not built
    advance_c = None

if advance_c is not None and os.environ.get("HOMEOSTAT_PURE_PYTHON", "0") in ("", "0"):
    advance = advance_c
    BACKEND = "cython"
else:
    advance = advance_py
    BACKEND = "python"


def get_advance(backend=None):
    """Return the kernel for ``backend`` (``"cython"``, ``"python"`` or None for the default)."""
    if backend is None:
        return advance
    if backend == "python":
        return advance_py
    if backend == "cython":
        if advance_c is None:
            raise ImportError("compiled kernel is not built; run `pip install -e .`")
        return advance_c
    raise ValueError(f"unknown backend {backend!r}")
