"""Grid interpolation kernels: compiled extension with pure-Python fallback.

The compiled module is built by setup.py when Cython and a C compiler are
available; otherwise the Python implementation is selected at import. Both
compute identical doubles. `BACKEND` names the active one.
"""

try:
    from ._grid_cy import interp3, interp3_many, locate  # noqa: F401

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from ._grid_py import interp3, interp3_many, locate  # noqa: F401

    BACKEND = "python"

__all__ = ["interp3", "interp3_many", "locate", "BACKEND"]
