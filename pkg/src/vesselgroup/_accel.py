"""Optional numba acceleration.

Hot inner loops (path simulation, pairwise affinity) have two
implementations: a numba ``@njit`` version and a vectorized numpy one.
Selection order:

* ``VESSELGROUP_NUMBA=0`` (or ``off``/``false``) forces the numpy path,
* otherwise numba is used when importable,
* individual call sites may also pass ``backend="numpy"|"numba"`` explicitly.

Both paths are written to produce identical results (the path simulation
bins the same pregenerated increments; the affinity loop does the same
gathers and arithmetic, with transcendentals applied in shared numpy code)
so the flag never changes numerics, only speed.
``benchmarks/bench_kernels.py`` compares them.
"""

import os

_env = os.environ.get("VESSELGROUP_NUMBA", "").strip().lower()
_DISABLED = _env in ("0", "off", "false", "no")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAS_NUMBA and not _DISABLED


def resolve_backend(backend: str = "auto") -> str:
    """Map a requested backend name to the one that will actually run."""
    if backend == "auto":
        return "numba" if USE_NUMBA else "numpy"
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend
