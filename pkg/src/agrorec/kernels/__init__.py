"""Hot-kernel backend selection.

The numba-compiled path is the default; setting ``AGROREC_NUMBA=0`` (or
``off``/``false``/``no``) selects the pure-numpy fallback. ``AGROREC_NUMBA=1``
makes a missing numba installation a hard error instead of falling back.
Both backends are importable directly for differential tests and the
benchmark in ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

from . import numpy_backend

_flag = os.environ.get("AGROREC_NUMBA", "auto").strip().lower()

if _flag in ("0", "false", "off", "no"):
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import numba_backend as _impl  # type: ignore[no-redef]

        BACKEND = "numba"
    except ImportError:
        if _flag in ("1", "true", "on", "yes"):
            raise
        _impl = numpy_backend
        BACKEND = "numpy"

split_scan = _impl.split_scan
tree_route = _impl.tree_route
smo_solve = _impl.smo_solve

__all__ = ["BACKEND", "split_scan", "tree_route", "smo_solve", "numpy_backend"]
