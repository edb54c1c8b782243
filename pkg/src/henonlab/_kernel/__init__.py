"""Kernel selector: compiled Cython core with a pure-numpy fallback.

Set HENONLAB_PURE=1 to force the pure implementation (used by the
benchmark and by tests that assert parity between the two).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("HENONLAB_PURE"):
    _impl = None
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = None

HAVE_COMPILED = _impl is not None


def _select(name):
    if _impl is not None and hasattr(_impl, name):
        return getattr(_impl, name)
    return getattr(_pure, name)


cheb_eval = _select("cheb_eval")
cheb_eval_2d = _select("cheb_eval_2d")
std_orbit = _select("std_orbit")
std_orbit_points = _select("std_orbit_points")
std_power2_period = _select("std_power2_period")
std_orbit_jac = _select("std_orbit_jac")
std_orbit_dc = _select("std_orbit_dc")
henon_eval_many = _select("henon_eval_many")
henon_orbit_logjac = _select("henon_orbit_logjac")

__all__ = [
    "HAVE_COMPILED",
    "cheb_eval",
    "cheb_eval_2d",
    "std_orbit",
    "std_orbit_points",
    "std_power2_period",
    "std_orbit_jac",
    "std_orbit_dc",
    "henon_eval_many",
    "henon_orbit_logjac",
]
