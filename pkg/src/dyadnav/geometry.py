"""SE(2) pose algebra, convex hulls, circle sampling, ray-polygon queries.

Angles are radians, counter-clockwise positive, wrapped to (-pi, pi];
degrees appear only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import core
from .core import wrap_angle

__all__ = [
    "Pose2",
    "Polygon2",
    "Ray",
    "wrap_angle",
    "compose",
    "invert",
    "convex_hull",
    "ray_polygon_distance",
    "circle_points",
]


@dataclass(frozen=True)
class Pose2:
    """SE(2) pose: planar position in meters plus heading in radians."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose components: {self}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta], dtype=np.float64)

    @classmethod
    def from_array(cls, a) -> "Pose2":
        return cls(float(a[0]), float(a[1]), float(a[2]))


def compose(a: Pose2, b: Pose2) -> Pose2:
    """a ∘ b: b's translation rotated into a's frame, headings summed."""
    c = math.cos(a.theta)
    s = math.sin(a.theta)
    return Pose2(
        a.x + c * b.x - s * b.y,
        a.y + s * b.x + c * b.y,
        a.theta + b.theta,
    )


def invert(p: Pose2) -> Pose2:
    """Inverse pose: compose(p, invert(p)) is the identity."""
    c = math.cos(p.theta)
    s = math.sin(p.theta)
    return Pose2(-(c * p.x + s * p.y), -(-s * p.x + c * p.y), -p.theta)


@dataclass(frozen=True)
class Polygon2:
    """Convex polygon as an (n, 2) CCW vertex array.

    n may be 1 or 2 for explicitly degenerate point/segment hulls.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) == 0:
            raise ValueError("polygon needs an (n, 2) vertex array, n >= 1")
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3

    def area(self) -> float:
        if self.is_degenerate:
            return 0.0
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def contains(self, point, slack: float = 1e-9) -> bool:
        """Point-in-polygon via edge cross products (boundary counts)."""
        px, py = float(point[0]), float(point[1])
        v = self.vertices
        if len(v) == 1:
            return math.hypot(px - v[0, 0], py - v[0, 1]) <= slack
        if len(v) == 2:
            ex, ey = v[1, 0] - v[0, 0], v[1, 1] - v[0, 1]
            wx, wy = px - v[0, 0], py - v[0, 1]
            t = (wx * ex + wy * ey) / max(ex * ex + ey * ey, 1e-300)
            t = min(max(t, 0.0), 1.0)
            return math.hypot(wx - t * ex, wy - t * ey) <= slack
        a = v
        b = np.roll(v, -1, axis=0)
        cross = (b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (b[:, 1] - a[:, 1]) * (px - a[:, 0])
        return bool(np.all(cross >= -slack))


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "angle", wrap_angle(self.angle))


def convex_hull(points) -> Polygon2:
    """Minimal convex polygon containing all points (collinear dropped)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("empty point set")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point in hull input")
    return Polygon2(core.convex_hull(pts))


def ray_polygon_distance(ray: Ray, poly: Polygon2) -> float | None:
    """Distance to the first boundary crossing; 0 if origin inside; None if miss."""
    hit, t_near, _ = core.ray_hull_span(poly.vertices, ray.origin[0],
                                        ray.origin[1], ray.angle)
    return t_near if hit else None


def circle_points(center, radius: float, n: int) -> np.ndarray:
    """n evenly spaced points on the circle, starting at angle 0."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n < 8:
        raise ValueError("need at least 8 samples")
    ang = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.column_stack(
        (center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang))
    )
