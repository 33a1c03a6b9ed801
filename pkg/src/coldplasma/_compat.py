"""Optional numba acceleration.

Falls back to plain Python when numba is missing so every code path stays
importable; the integrator picks the fast path only when the right-hand
side it receives is actually a compiled dispatcher.
"""

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def is_compiled(func):
    """True when ``func`` is a numba dispatcher (safe without numba)."""
    return HAVE_NUMBA and hasattr(func, "nopython_signatures")


def python_twin(func):
    """The interpreted version of a possibly-jitted function."""
    return getattr(func, "py_func", func)
