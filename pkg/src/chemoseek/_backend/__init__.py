"""Backend selection: compiled stepping kernel with pure-Python fallback.

The Cython extension is optional; if it failed to build (no compiler, no
Cython) the pure-Python twin takes over with identical semantics. Use
``backend_name()`` to see which one is active and ``get_impl(name)`` to
address a specific backend (parity tests, benchmarks).
"""

try:
    from . import _ckernel as _impl

    HAVE_COMPILED = True
except ImportError:
    from . import _pykernel as _impl

    HAVE_COMPILED = False

run_continuous = _impl.run_continuous
run_single_param = _impl.run_single_param


def backend_name():
    return "compiled" if HAVE_COMPILED else "python"


def get_impl(name):
    """Fetch a specific kernel implementation: 'compiled' or 'python'."""
    if name == "python":
        from . import _pykernel

        return _pykernel
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel is not available in this build")
        return _impl
    raise ValueError(f"unknown backend {name!r}")
