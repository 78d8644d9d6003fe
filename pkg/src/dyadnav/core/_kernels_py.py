"""Pure-Python kernels: grid raycasting, hulls, ray/hull spans, dyad rollouts.

Reference implementation of the hot inner loops. `dyadnav.core` prefers the
compiled Cython twin (`_kernels`) and falls back to this module; both must
implement identical semantics (see tests/test_core_backends.py).
"""

import math

import numpy as np

BACKEND = "py"

_TAU = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.remainder(theta, _TAU)
    if w <= -math.pi:
        w += _TAU
    return w


def raycast(grid, origin_x, origin_y, cell, ox, oy, angles, max_range):
    """March rays through an occupancy grid, returning hit distances.

    grid: (ny, nx) uint8, row 0 at min y. origin_x/y: world coords of the
    corner of cell (0, 0). Out-of-bounds counts as occupied (closed world).
    Uses exact cell-boundary traversal, so returned distances are the true
    geometric distance to the first occupied cell's boundary, clamped to
    max_range.
    """
    grid = np.asarray(grid, dtype=np.uint8)
    ny, nx = grid.shape
    angles = np.asarray(angles, dtype=np.float64)
    out = np.empty(len(angles), dtype=np.float64)
    for i, ang in enumerate(angles):
        out[i] = _raycast_one(grid, ny, nx, origin_x, origin_y, cell,
                              ox, oy, math.cos(ang), math.sin(ang), max_range)
    return out


def _raycast_one(grid, ny, nx, gx0, gy0, cell, ox, oy, dx, dy, max_range):
    ix = math.floor((ox - gx0) / cell)
    iy = math.floor((oy - gy0) / cell)
    if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
        return 0.0
    if grid[iy, ix]:
        return 0.0
    if dx > 0:
        step_x = 1
        t_max_x = ((ix + 1) * cell + gx0 - ox) / dx
        t_delta_x = cell / dx
    elif dx < 0:
        step_x = -1
        t_max_x = (ix * cell + gx0 - ox) / dx
        t_delta_x = -cell / dx
    else:
        step_x = 0
        t_max_x = math.inf
        t_delta_x = math.inf
    if dy > 0:
        step_y = 1
        t_max_y = ((iy + 1) * cell + gy0 - oy) / dy
        t_delta_y = cell / dy
    elif dy < 0:
        step_y = -1
        t_max_y = (iy * cell + gy0 - oy) / dy
        t_delta_y = -cell / dy
    else:
        step_y = 0
        t_max_y = math.inf
        t_delta_y = math.inf
    while True:
        if t_max_x <= t_max_y:
            t_cross = t_max_x
            ix += step_x
            t_max_x += t_delta_x
        else:
            t_cross = t_max_y
            iy += step_y
            t_max_y += t_delta_y
        if t_cross > max_range:
            return max_range
        if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
            return t_cross
        if grid[iy, ix]:
            return t_cross


def disc_collides(grid, origin_x, origin_y, cell, cx, cy, radius):
    """True iff the disc overlaps any occupied cell or leaves the grid."""
    grid = np.asarray(grid, dtype=np.uint8)
    ny, nx = grid.shape
    if (cx - radius < origin_x or cx + radius > origin_x + nx * cell
            or cy - radius < origin_y or cy + radius > origin_y + ny * cell):
        return True
    ix0 = max(0, math.floor((cx - radius - origin_x) / cell))
    ix1 = min(nx - 1, math.floor((cx + radius - origin_x) / cell))
    iy0 = max(0, math.floor((cy - radius - origin_y) / cell))
    iy1 = min(ny - 1, math.floor((cy + radius - origin_y) / cell))
    r2 = radius * radius
    for iy in range(iy0, iy1 + 1):
        y0 = origin_y + iy * cell
        # nearest y of the cell's extent to the disc center
        qy = cy if y0 <= cy <= y0 + cell else (y0 if cy < y0 else y0 + cell)
        dy = cy - qy
        for ix in range(ix0, ix1 + 1):
            if not grid[iy, ix]:
                continue
            x0 = origin_x + ix * cell
            qx = cx if x0 <= cx <= x0 + cell else (x0 if cx < x0 else x0 + cell)
            dx = cx - qx
            if dx * dx + dy * dy <= r2:
                return True
    return False


def convex_hull(points):
    """Monotone-chain hull of (n, 2) points, CCW, collinear points dropped.

    Returns an (m, 2) array; m may be 1 (all points coincide) or 2
    (collinear input). First vertex is the lexicographic minimum.
    """
    pts = np.asarray(points, dtype=np.float64)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.diff(pts, axis=0) != 0.0, axis=1)
    pts = pts[keep]
    n = len(pts)
    if n <= 2:
        return pts.copy()
    lower = []
    for i in range(n):
        p = pts[i]
        while len(lower) >= 2 and _cross3(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper = []
    for i in range(n - 1, -1, -1):
        p = pts[i]
        while len(upper) >= 2 and _cross3(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=np.float64)


def _cross3(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def ray_hull_span(verts, ox, oy, angle):
    """Intersection interval of a ray with a convex polygon.

    Returns (hit, t_near, t_far) with t measured along the ray from its
    origin; t_near is clamped at 0 when the origin lies inside. Degenerate
    polygons (1 or 2 vertices) are treated as point / segment targets.
    """
    verts = np.asarray(verts, dtype=np.float64)
    dx = math.cos(angle)
    dy = math.sin(angle)
    m = len(verts)
    if m == 1:
        return _ray_point(verts[0, 0], verts[0, 1], ox, oy, dx, dy)
    if m == 2:
        return _ray_segment(verts[0], verts[1], ox, oy, dx, dy)
    t0 = -math.inf
    t1 = math.inf
    for i in range(m):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % m]
        # outward normal of a CCW edge
        nx_ = by - ay
        ny_ = -(bx - ax)
        denom = nx_ * dx + ny_ * dy
        num = nx_ * (ox - ax) + ny_ * (oy - ay)
        if denom == 0.0:
            if num > 0.0:
                return False, 0.0, 0.0
            continue
        t = -num / denom
        if denom < 0.0:
            if t > t0:
                t0 = t
        else:
            if t < t1:
                t1 = t
    if t0 > t1 or t1 < 0.0:
        return False, 0.0, 0.0
    return True, max(t0, 0.0), t1


_EPS = 1e-9


def _ray_point(px, py, ox, oy, dx, dy):
    rx = px - ox
    ry = py - oy
    t = rx * dx + ry * dy
    if t < -_EPS:
        return False, 0.0, 0.0
    # perpendicular miss distance
    if abs(rx * dy - ry * dx) > _EPS:
        return False, 0.0, 0.0
    t = max(t, 0.0)
    return True, t, t


def _ray_segment(a, b, ox, oy, dx, dy):
    ex = b[0] - a[0]
    ey = b[1] - a[1]
    denom = dx * ey - dy * ex
    wx = a[0] - ox
    wy = a[1] - oy
    if abs(denom) < 1e-15:
        # parallel: collinear overlap reduces to the two endpoint "points"
        hit_a = _ray_point(a[0], a[1], ox, oy, dx, dy)
        hit_b = _ray_point(b[0], b[1], ox, oy, dx, dy)
        ts = [h[1] for h in (hit_a, hit_b) if h[0]]
        if not ts:
            return False, 0.0, 0.0
        return True, min(ts), max(ts)
    t = (wx * ey - wy * ex) / denom
    s = (wx * dy - wy * dx) / denom
    if t < 0.0 or s < -_EPS or s > 1.0 + _EPS:
        return False, 0.0, 0.0
    return True, t, t


def hull_thresholds(verts, ox, oy, angles):
    """Far-boundary (exit) distance of each ray from (ox, oy); NaN = miss."""
    angles = np.asarray(angles, dtype=np.float64)
    out = np.empty(len(angles), dtype=np.float64)
    for i, ang in enumerate(angles):
        hit, _, t_far = ray_hull_span(verts, ox, oy, ang)
        out[i] = t_far if hit else math.nan
    return out


def rollout_fixed(robot, d, human0):
    """Human trajectory under the rigid fixed-offset model."""
    robot = np.asarray(robot, dtype=np.float64)
    T = len(robot)
    out = np.empty((T, 3), dtype=np.float64)
    out[0] = human0
    for t in range(1, T):
        x, y, th = robot[t]
        out[t, 0] = x + d * math.cos(th)
        out[t, 1] = y + d * math.sin(th)
        out[t, 2] = th
    return out


def rollout_delayed(robot, obar_x, obar_y, obar_th, alpha, human0):
    """Human trajectory under the delayed-recovery offset model.

    Offsets are SE(2) transforms in the robot frame. Each step re-expresses
    the previous human pose in the new robot frame, then blends that
    temporary offset toward the default offset (weight alpha on the
    temporary offset, shortest arc for the heading).
    """
    robot = np.asarray(robot, dtype=np.float64)
    T = len(robot)
    out = np.empty((T, 3), dtype=np.float64)
    out[0] = human0
    hx, hy, hth = float(human0[0]), float(human0[1]), float(human0[2])
    for t in range(1, T):
        rx, ry, rth = robot[t]
        c = math.cos(rth)
        s = math.sin(rth)
        # temporary offset: previous human pose in the new robot frame
        ex = hx - rx
        ey = hy - ry
        tox = c * ex + s * ey
        toy = -s * ex + c * ey
        toth = wrap_angle(hth - rth)
        nox = alpha * tox + (1.0 - alpha) * obar_x
        noy = alpha * toy + (1.0 - alpha) * obar_y
        noth = wrap_angle(obar_th + alpha * wrap_angle(toth - obar_th))
        hx = rx + c * nox - s * noy
        hy = ry + s * nox + c * noy
        hth = wrap_angle(rth + noth)
        out[t, 0] = hx
        out[t, 1] = hy
        out[t, 2] = hth
    return out


def rollout_rod(robot, rod_length, ax, ay, human0):
    """Human trajectory under the taut rotating-rod model.

    The pivot rides at (ax, ay) in the robot frame; the human is kept at
    exactly rod_length from the pivot along the pivot->human direction and
    faces the pivot. If pivot and human coincide the previous direction is
    reused (initially: straight behind the robot).
    """
    robot = np.asarray(robot, dtype=np.float64)
    T = len(robot)
    out = np.empty((T, 3), dtype=np.float64)
    out[0] = human0
    hx, hy = float(human0[0]), float(human0[1])
    rth0 = float(robot[0, 2])
    last_ux = -math.cos(rth0)
    last_uy = -math.sin(rth0)
    for t in range(1, T):
        rx, ry, rth = robot[t]
        c = math.cos(rth)
        s = math.sin(rth)
        px = rx + c * ax - s * ay
        py = ry + s * ax + c * ay
        ux = hx - px
        uy = hy - py
        norm = math.hypot(ux, uy)
        if norm < 1e-12:
            ux, uy = last_ux, last_uy
        else:
            ux /= norm
            uy /= norm
            last_ux, last_uy = ux, uy
        hx = px + rod_length * ux
        hy = py + rod_length * uy
        out[t, 0] = hx
        out[t, 1] = hy
        out[t, 2] = math.atan2(py - hy, px - hx)
    return out
