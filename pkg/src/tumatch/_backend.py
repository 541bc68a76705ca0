"""Selection of the batched kernel backend.

Two interchangeable implementations of the low-level log-probability
kernels exist: a compiled Cython extension and a NumPy reference. The
compiled one is picked at import if it was built; otherwise the package
silently runs on NumPy. The choice can be overridden per process with
:func:`set_backend`, which mainly serves tests and benchmarks.
"""

from __future__ import annotations

from tumatch import _core_py

try:
    from tumatch import _core_cy
except ImportError:
    _core_cy = None

_BACKENDS = {"numpy": _core_py}
if _core_cy is not None:
    _BACKENDS["compiled"] = _core_cy

_active = "compiled" if _core_cy is not None else "numpy"


def available_backends() -> tuple[str, ...]:
    """Names of the kernel backends importable in this process."""
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    """Name of the backend kernel calls are currently routed to."""
    return _active


def set_backend(name: str) -> None:
    """Route subsequent kernel calls to the named backend (process-wide)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = name


def core():
    """The module implementing the batched kernels for the active backend."""
    return _BACKENDS[_active]
