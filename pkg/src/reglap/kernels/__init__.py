"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set REGLAP_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
tests that cross-check the two implementations).
"""
import os

from . import fallback

if os.environ.get("REGLAP_PURE_PYTHON") == "1":
    _impl = fallback
    COMPILED = False
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = fallback
        COMPILED = False

inf_to_one_exact = _impl.inf_to_one_exact
jacobi_sweeps = _impl.jacobi_sweeps
