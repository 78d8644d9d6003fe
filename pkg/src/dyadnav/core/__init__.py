"""Kernel backend selection.

The compiled Cython extension is preferred; the pure-Python twin is the
fallback. Override with DYADNAV_CORE=c|py (anything else means auto).
"""

import os

_choice = os.environ.get("DYADNAV_CORE", "auto").lower()

if _choice == "py":
    from . import _kernels_py as _impl
elif _choice == "c":
    from . import _kernels as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND

wrap_angle = _impl.wrap_angle
raycast = _impl.raycast
disc_collides = _impl.disc_collides
convex_hull = _impl.convex_hull
ray_hull_span = _impl.ray_hull_span
hull_thresholds = _impl.hull_thresholds
rollout_fixed = _impl.rollout_fixed
rollout_delayed = _impl.rollout_delayed
rollout_rod = _impl.rollout_rod

__all__ = [
    "BACKEND",
    "wrap_angle",
    "raycast",
    "disc_collides",
    "convex_hull",
    "ray_hull_span",
    "hull_thresholds",
    "rollout_fixed",
    "rollout_delayed",
    "rollout_rod",
]
