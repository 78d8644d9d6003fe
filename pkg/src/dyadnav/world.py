"""Static 2D occupancy worlds with obstacle queries and simulated lidar.

Worlds are closed: everything outside the grid counts as occupied, so
rays always terminate and episodes cannot leave the map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import core
from .geometry import Pose2

DEFAULT_CELL_SIZE = 0.05  # matches the ±5 cm lidar accuracy scale
DEFAULT_N_BEAMS = 72
DEFAULT_MAX_RANGE = 10.0
DEFAULT_LIDAR_SIGMA = 0.05


class WorldParseError(ValueError):
    pass


@dataclass(frozen=True)
class OccupancyWorld:
    """Immutable occupancy grid. grid[iy, ix], row 0 at min y."""

    cell_size: float
    grid: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    start_hint: Pose2 | None = None

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        g = np.ascontiguousarray(self.grid, dtype=np.uint8)
        if g.ndim != 2 or g.size == 0:
            raise ValueError("grid must be a non-empty 2D array")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    @property
    def extent(self) -> tuple[float, float]:
        ny, nx = self.grid.shape
        return (nx * self.cell_size, ny * self.cell_size)

    def occupied(self, point) -> bool:
        """True iff the point lies in an occupied cell or out of bounds."""
        ix = math.floor((point[0] - self.origin[0]) / self.cell_size)
        iy = math.floor((point[1] - self.origin[1]) / self.cell_size)
        ny, nx = self.grid.shape
        if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
            return True
        return bool(self.grid[iy, ix])

    def circle_collides(self, center, radius: float) -> bool:
        """Conservative disc-vs-occupied-cells overlap test."""
        if radius <= 0:
            raise ValueError("radius must be positive")
        return bool(core.disc_collides(self.grid, self.origin[0], self.origin[1],
                                       self.cell_size, float(center[0]),
                                       float(center[1]), radius))

    def occupied_boxes(self) -> list[list[float]]:
        """Occupied cells merged into per-row run boxes [x0, y0, x1, y1]."""
        boxes = []
        ny, nx = self.grid.shape
        cs = self.cell_size
        x_org, y_org = self.origin
        for iy in range(ny):
            row = self.grid[iy]
            ix = 0
            while ix < nx:
                if row[ix]:
                    ix0 = ix
                    while ix < nx and row[ix]:
                        ix += 1
                    boxes.append([x_org + ix0 * cs, y_org + iy * cs,
                                  x_org + ix * cs, y_org + (iy + 1) * cs])
                else:
                    ix += 1
        return boxes


@dataclass(frozen=True)
class SensorNoise:
    """Additive i.i.d. Gaussian lidar noise."""

    lidar_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.lidar_sigma < 0:
            raise ValueError("lidar_sigma must be >= 0")


@dataclass(frozen=True)
class LidarScan:
    angles: np.ndarray  # robot frame, strictly increasing
    ranges: np.ndarray
    max_range: float

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=np.float64)
        r = np.asarray(self.ranges, dtype=np.float64)
        if len(a) != len(r):
            raise ValueError("angles and ranges must have equal length")
        if np.any(np.diff(a) <= 0):
            raise ValueError("beam angles must be strictly increasing")
        if np.any(r < 0) or np.any(r > self.max_range + 1e-12):
            raise ValueError("ranges must lie in [0, max_range]")
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "ranges", r)


def beam_angles(n_beams: int) -> np.ndarray:
    """Robot-frame beam directions: -pi + 2*pi*i/n for i in 0..n-1."""
    if n_beams < 8:
        raise ValueError("need at least 8 beams")
    return -math.pi + 2.0 * math.pi * np.arange(n_beams) / n_beams


def lidar_scan(world: OccupancyWorld, pose: Pose2, n_beams: int = DEFAULT_N_BEAMS,
               max_range: float = DEFAULT_MAX_RANGE,
               noise: SensorNoise | None = None, scan_index: int = 0) -> LidarScan:
    """Simulate one 360° scan from the robot pose.

    Deterministic given (world, pose, noise.seed, scan_index): the noise
    stream is re-derived per scan so replays are exact regardless of how
    many scans other code has drawn.
    """
    rel = beam_angles(n_beams)
    ranges = core.raycast(world.grid, world.origin[0], world.origin[1],
                          world.cell_size, pose.x, pose.y,
                          rel + pose.theta, max_range)
    if noise is not None and noise.lidar_sigma > 0:
        rng = np.random.default_rng([np.uint64(noise.seed), np.uint64(scan_index)])
        ranges = ranges + rng.normal(0.0, noise.lidar_sigma, n_beams)
        np.clip(ranges, 0.0, max_range, out=ranges)
    return LidarScan(angles=rel, ranges=ranges, max_range=max_range)


def build_world(spec, cell_size: float = DEFAULT_CELL_SIZE) -> OccupancyWorld:
    """Build a world from an ASCII map, a JSON dict, or a file path.

    ASCII maps use '#' occupied, '.' free, 'S' free start marker; row 0 is
    the max-y row. JSON dicts follow
    {"cell_size": m, "extent": [w, h], "boxes": [[x0, y0, x1, y1], ...]}.
    """
    if isinstance(spec, OccupancyWorld):
        return spec
    if isinstance(spec, dict):
        return _world_from_json(spec)
    if isinstance(spec, Path):
        return build_world(spec.read_text(), cell_size=cell_size)
    if isinstance(spec, str):
        stripped = spec.strip()
        if stripped.startswith("{"):
            try:
                doc = json.loads(spec)
            except json.JSONDecodeError as exc:
                raise WorldParseError(
                    f"bad JSON world at line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from None
            return _world_from_json(doc)
        if "\n" not in spec and spec.endswith((".json", ".txt", ".map")):
            return build_world(Path(spec), cell_size=cell_size)
        return _world_from_ascii(spec, cell_size)
    raise WorldParseError(f"unsupported world spec type: {type(spec).__name__}")


def _world_from_ascii(text: str, cell_size: float) -> OccupancyWorld:
    rows = [r for r in text.splitlines() if r.strip() != ""]
    if not rows:
        raise WorldParseError("empty ASCII map")
    width = max(len(r) for r in rows)
    ny = len(rows)
    grid = np.zeros((ny, width), dtype=np.uint8)
    start = None
    for line_no, row in enumerate(rows):
        iy = ny - 1 - line_no  # text row 0 is max y
        for col, ch in enumerate(row):
            if ch == "#":
                grid[iy, col] = 1
            elif ch == "S":
                start = Pose2((col + 0.5) * cell_size, (iy + 0.5) * cell_size, 0.0)
            elif ch not in (".", " "):
                raise WorldParseError(
                    f"bad map character {ch!r} at line {line_no + 1}, column {col + 1}"
                )
        # short rows are padded with free space
    return OccupancyWorld(cell_size=cell_size, grid=grid, start_hint=start)


def _world_from_json(doc: dict) -> OccupancyWorld:
    try:
        cell = float(doc["cell_size"])
        w, h = (float(v) for v in doc["extent"])
        boxes = doc.get("boxes", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise WorldParseError(f"bad JSON world: {exc}") from None
    if cell <= 0 or w <= 0 or h <= 0:
        raise WorldParseError("cell_size and extent must be positive")
    nx = max(1, round(w / cell))
    ny = max(1, round(h / cell))
    grid = np.zeros((ny, nx), dtype=np.uint8)
    for k, box in enumerate(boxes):
        try:
            x0, y0, x1, y1 = (float(v) for v in box)
        except (TypeError, ValueError):
            raise WorldParseError(f"bad box at index {k}: {box!r}") from None
        if x1 < x0 or y1 < y0:
            raise WorldParseError(f"inverted box at index {k}: {box!r}")
        # mark every cell whose area intersects the box
        ix0 = max(0, math.floor(x0 / cell + 1e-12))
        ix1 = min(nx, math.ceil(x1 / cell - 1e-12))
        iy0 = max(0, math.floor(y0 / cell + 1e-12))
        iy1 = min(ny, math.ceil(y1 / cell - 1e-12))
        grid[iy0:iy1, ix0:ix1] = 1
    return OccupancyWorld(cell_size=cell, grid=grid)
