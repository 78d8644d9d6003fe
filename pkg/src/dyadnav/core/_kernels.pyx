# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: grid raycasting, hulls, ray/hull spans, dyad rollouts.

Semantics must stay identical to the pure-Python twin in _kernels_py.py.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, fabs, floor, hypot, remainder, sin, sqrt, INFINITY, NAN, M_PI

cnp.import_array()

BACKEND = "c"

cdef double TAU = 2.0 * M_PI


cdef inline double _wrap(double theta) nogil:
    cdef double w = remainder(theta, TAU)
    if w <= -M_PI:
        w += TAU
    return w


def wrap_angle(double theta):
    """Wrap an angle to (-pi, pi]."""
    return _wrap(theta)


cdef double _raycast_one(const cnp.uint8_t[:, ::1] grid, Py_ssize_t ny, Py_ssize_t nx,
                         double gx0, double gy0, double cell,
                         double ox, double oy, double dx, double dy,
                         double max_range) nogil:
    cdef Py_ssize_t ix = <Py_ssize_t>floor((ox - gx0) / cell)
    cdef Py_ssize_t iy = <Py_ssize_t>floor((oy - gy0) / cell)
    cdef int step_x, step_y
    cdef double t_max_x, t_max_y, t_delta_x, t_delta_y, t_cross
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
        t_max_x = INFINITY
        t_delta_x = INFINITY
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
        t_max_y = INFINITY
        t_delta_y = INFINITY
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


def raycast(grid, double origin_x, double origin_y, double cell,
            double ox, double oy, angles, double max_range):
    """March rays through an occupancy grid, returning hit distances.

    Exact cell-boundary traversal; out-of-bounds counts as occupied.
    """
    cdef const cnp.uint8_t[:, ::1] g = np.ascontiguousarray(grid, dtype=np.uint8)
    cdef double[::1] a = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t ny = g.shape[0]
    cdef Py_ssize_t nx = g.shape[1]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _raycast_one(g, ny, nx, origin_x, origin_y, cell,
                                ox, oy, cos(a[i]), sin(a[i]), max_range)
    return out


def disc_collides(grid, double origin_x, double origin_y, double cell,
                  double cx, double cy, double radius):
    """True iff the disc overlaps any occupied cell or leaves the grid."""
    cdef const cnp.uint8_t[:, ::1] g = np.ascontiguousarray(grid, dtype=np.uint8)
    cdef Py_ssize_t ny = g.shape[0]
    cdef Py_ssize_t nx = g.shape[1]
    if (cx - radius < origin_x or cx + radius > origin_x + nx * cell
            or cy - radius < origin_y or cy + radius > origin_y + ny * cell):
        return True
    cdef Py_ssize_t ix0 = <Py_ssize_t>floor((cx - radius - origin_x) / cell)
    cdef Py_ssize_t ix1 = <Py_ssize_t>floor((cx + radius - origin_x) / cell)
    cdef Py_ssize_t iy0 = <Py_ssize_t>floor((cy - radius - origin_y) / cell)
    cdef Py_ssize_t iy1 = <Py_ssize_t>floor((cy + radius - origin_y) / cell)
    if ix0 < 0: ix0 = 0
    if iy0 < 0: iy0 = 0
    if ix1 > nx - 1: ix1 = nx - 1
    if iy1 > ny - 1: iy1 = ny - 1
    cdef double r2 = radius * radius
    cdef Py_ssize_t ix, iy
    cdef double x0, y0, qx, qy, dx, dy
    for iy in range(iy0, iy1 + 1):
        y0 = origin_y + iy * cell
        qy = cy if (y0 <= cy <= y0 + cell) else (y0 if cy < y0 else y0 + cell)
        dy = cy - qy
        for ix in range(ix0, ix1 + 1):
            if not g[iy, ix]:
                continue
            x0 = origin_x + ix * cell
            qx = cx if (x0 <= cx <= x0 + cell) else (x0 if cx < x0 else x0 + cell)
            dx = cx - qx
            if dx * dx + dy * dy <= r2:
                return True
    return False


cdef inline double _cross3(double ox_, double oy_, double ax_, double ay_,
                           double bx_, double by_) nogil:
    return (ax_ - ox_) * (by_ - oy_) - (ay_ - oy_) * (bx_ - ox_)


def convex_hull(points):
    """Monotone-chain hull of (n, 2) points, CCW, collinear points dropped."""
    pts_in = np.asarray(points, dtype=np.float64)
    order = np.lexsort((pts_in[:, 1], pts_in[:, 0]))
    pts_in = pts_in[order]
    keep = np.ones(len(pts_in), dtype=bool)
    keep[1:] = np.any(np.diff(pts_in, axis=0) != 0.0, axis=1)
    pts_in = np.ascontiguousarray(pts_in[keep])
    cdef double[:, ::1] pts = pts_in
    cdef Py_ssize_t n = pts.shape[0]
    if n <= 2:
        return pts_in.copy()
    buf = np.empty((2 * n, 2), dtype=np.float64)
    cdef double[:, ::1] h = buf
    cdef Py_ssize_t k = 0, i
    for i in range(n):
        while k >= 2 and _cross3(h[k - 2, 0], h[k - 2, 1], h[k - 1, 0],
                                 h[k - 1, 1], pts[i, 0], pts[i, 1]) <= 0.0:
            k -= 1
        h[k, 0] = pts[i, 0]
        h[k, 1] = pts[i, 1]
        k += 1
    cdef Py_ssize_t lower = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower and _cross3(h[k - 2, 0], h[k - 2, 1], h[k - 1, 0],
                                     h[k - 1, 1], pts[i, 0], pts[i, 1]) <= 0.0:
            k -= 1
        h[k, 0] = pts[i, 0]
        h[k, 1] = pts[i, 1]
        k += 1
    return buf[:k - 1].copy()


cdef int _span(double[:, ::1] verts, double ox, double oy,
               double dx, double dy, double* t_near, double* t_far) nogil:
    cdef Py_ssize_t m = verts.shape[0]
    cdef double t0 = -INFINITY
    cdef double t1 = INFINITY
    cdef double ax_, ay_, bx_, by_, nx_, ny_, denom, num, t
    cdef Py_ssize_t i, j
    if m == 1:
        return _span_point(verts[0, 0], verts[0, 1], ox, oy, dx, dy, t_near, t_far)
    if m == 2:
        return _span_segment(verts[0, 0], verts[0, 1], verts[1, 0], verts[1, 1],
                             ox, oy, dx, dy, t_near, t_far)
    for i in range(m):
        j = i + 1
        if j == m:
            j = 0
        ax_ = verts[i, 0]
        ay_ = verts[i, 1]
        bx_ = verts[j, 0]
        by_ = verts[j, 1]
        nx_ = by_ - ay_
        ny_ = -(bx_ - ax_)
        denom = nx_ * dx + ny_ * dy
        num = nx_ * (ox - ax_) + ny_ * (oy - ay_)
        if denom == 0.0:
            if num > 0.0:
                return 0
            continue
        t = -num / denom
        if denom < 0.0:
            if t > t0:
                t0 = t
        else:
            if t < t1:
                t1 = t
    if t0 > t1 or t1 < 0.0:
        return 0
    t_near[0] = t0 if t0 > 0.0 else 0.0
    t_far[0] = t1
    return 1


cdef double EPS = 1e-9


cdef int _span_point(double px, double py, double ox, double oy,
                     double dx, double dy, double* t_near, double* t_far) nogil:
    cdef double rx = px - ox
    cdef double ry = py - oy
    cdef double t = rx * dx + ry * dy
    if t < -EPS:
        return 0
    if fabs(rx * dy - ry * dx) > EPS:
        return 0
    if t < 0.0:
        t = 0.0
    t_near[0] = t
    t_far[0] = t
    return 1


cdef int _span_segment(double ax_, double ay_, double bx_, double by_,
                       double ox, double oy, double dx, double dy,
                       double* t_near, double* t_far) nogil:
    cdef double ex = bx_ - ax_
    cdef double ey = by_ - ay_
    cdef double denom = dx * ey - dy * ex
    cdef double wx = ax_ - ox
    cdef double wy = ay_ - oy
    cdef double t, s, ta, tb
    cdef double na, fa, nb, fb
    cdef int ha, hb
    if fabs(denom) < 1e-15:
        ha = _span_point(ax_, ay_, ox, oy, dx, dy, &na, &fa)
        hb = _span_point(bx_, by_, ox, oy, dx, dy, &nb, &fb)
        if not ha and not hb:
            return 0
        if ha and hb:
            t_near[0] = na if na < nb else nb
            t_far[0] = na if na > nb else nb
        elif ha:
            t_near[0] = na
            t_far[0] = na
        else:
            t_near[0] = nb
            t_far[0] = nb
        return 1
    t = (wx * ey - wy * ex) / denom
    s = (wx * dy - wy * dx) / denom
    if t < 0.0 or s < -EPS or s > 1.0 + EPS:
        return 0
    t_near[0] = t
    t_far[0] = t
    return 1


def ray_hull_span(verts, double ox, double oy, double angle):
    """Intersection interval (hit, t_near, t_far) of a ray with a convex polygon."""
    cdef double[:, ::1] v = np.ascontiguousarray(verts, dtype=np.float64)
    cdef double t_near = 0.0, t_far = 0.0
    cdef int hit = _span(v, ox, oy, cos(angle), sin(angle), &t_near, &t_far)
    return bool(hit), t_near, t_far


def hull_thresholds(verts, double ox, double oy, angles):
    """Far-boundary (exit) distance of each ray from (ox, oy); NaN = miss."""
    cdef double[:, ::1] v = np.ascontiguousarray(verts, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double t_near, t_far
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            if _span(v, ox, oy, cos(a[i]), sin(a[i]), &t_near, &t_far):
                o[i] = t_far
            else:
                o[i] = NAN
    return out


def rollout_fixed(robot, double d, human0):
    """Human trajectory under the rigid fixed-offset model."""
    cdef double[:, ::1] r = np.ascontiguousarray(robot, dtype=np.float64)
    cdef double[::1] h0 = np.ascontiguousarray(human0, dtype=np.float64)
    cdef Py_ssize_t T = r.shape[0]
    out = np.empty((T, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t t
    o[0, 0] = h0[0]
    o[0, 1] = h0[1]
    o[0, 2] = h0[2]
    with nogil:
        for t in range(1, T):
            o[t, 0] = r[t, 0] + d * cos(r[t, 2])
            o[t, 1] = r[t, 1] + d * sin(r[t, 2])
            o[t, 2] = r[t, 2]
    return out


def rollout_delayed(robot, double obar_x, double obar_y, double obar_th,
                    double alpha, human0):
    """Human trajectory under the delayed-recovery offset model."""
    cdef double[:, ::1] r = np.ascontiguousarray(robot, dtype=np.float64)
    cdef double[::1] h0 = np.ascontiguousarray(human0, dtype=np.float64)
    cdef Py_ssize_t T = r.shape[0]
    out = np.empty((T, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double hx = h0[0], hy = h0[1], hth = h0[2]
    cdef double rx, ry, rth, c, s, ex, ey, tox, toy, toth, nox, noy, noth
    cdef Py_ssize_t t
    o[0, 0] = hx
    o[0, 1] = hy
    o[0, 2] = hth
    with nogil:
        for t in range(1, T):
            rx = r[t, 0]
            ry = r[t, 1]
            rth = r[t, 2]
            c = cos(rth)
            s = sin(rth)
            ex = hx - rx
            ey = hy - ry
            tox = c * ex + s * ey
            toy = -s * ex + c * ey
            toth = _wrap(hth - rth)
            nox = alpha * tox + (1.0 - alpha) * obar_x
            noy = alpha * toy + (1.0 - alpha) * obar_y
            noth = _wrap(obar_th + alpha * _wrap(toth - obar_th))
            hx = rx + c * nox - s * noy
            hy = ry + s * nox + c * noy
            hth = _wrap(rth + noth)
            o[t, 0] = hx
            o[t, 1] = hy
            o[t, 2] = hth
    return out


def rollout_rod(robot, double rod_length, double ax, double ay, human0):
    """Human trajectory under the taut rotating-rod model."""
    cdef double[:, ::1] r = np.ascontiguousarray(robot, dtype=np.float64)
    cdef double[::1] h0 = np.ascontiguousarray(human0, dtype=np.float64)
    cdef Py_ssize_t T = r.shape[0]
    out = np.empty((T, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double hx = h0[0], hy = h0[1]
    cdef double last_ux = -cos(r[0, 2])
    cdef double last_uy = -sin(r[0, 2])
    cdef double rx, ry, rth, c, s, px, py, ux, uy, norm
    cdef Py_ssize_t t
    o[0, 0] = hx
    o[0, 1] = hy
    o[0, 2] = h0[2]
    with nogil:
        for t in range(1, T):
            rx = r[t, 0]
            ry = r[t, 1]
            rth = r[t, 2]
            c = cos(rth)
            s = sin(rth)
            px = rx + c * ax - s * ay
            py = ry + s * ax + c * ay
            ux = hx - px
            uy = hy - py
            norm = hypot(ux, uy)
            if norm < 1e-12:
                ux = last_ux
                uy = last_uy
            else:
                ux /= norm
                uy /= norm
                last_ux = ux
                last_uy = uy
            hx = px + rod_length * ux
            hy = py + rod_length * uy
            o[t, 0] = hx
            o[t, 1] = hy
            o[t, 2] = atan2(py - hy, px - hx)
    return out
