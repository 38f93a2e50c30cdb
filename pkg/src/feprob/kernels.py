"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise, or when the
environment variable ``FEPROB_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy fallback is used. Both expose ``tabulate``, ``mc_count``
and ``uniforms`` with identical semantics.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback
from ._fallback import GOLDEN, MASK64, mix64

try:
    from . import _ckernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "mc_count",
    "stream_key",
    "tabulate",
    "uniforms",
]


def available_backends() -> list[str]:
    names = ["numpy"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def get_backend(name: str) -> ModuleType:
    if name == "numpy":
        return _fallback
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    forced = os.environ.get("FEPROB_PURE_PYTHON", "")
    if _ckernels is not None and forced in ("", "0"):
        return "cython", _ckernels
    return "numpy", _fallback


BACKEND, _impl = _select()

tabulate = _impl.tabulate
mc_count = _impl.mc_count
uniforms = _impl.uniforms


def stream_key(seed: int, stream: int = 0) -> int:
    """Key of the counter-based stream ``stream`` derived from ``seed``."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    return mix64((mix64(seed) + (stream + 1) * GOLDEN) & MASK64)
