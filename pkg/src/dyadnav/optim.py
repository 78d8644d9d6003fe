"""Derivative-free simplex search (reflect/expand/contract/shrink).

Box constraints are enforced by evaluating at the clipped point plus a
quadratic out-of-box penalty, which keeps the simplex non-degenerate at
the boundary (clipping candidate vertices directly can collapse it).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PENALTY = 1e4


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int


def simplex_search(f, x0, bounds, xtol: float = 1e-4,
                   max_iter: int = 1000) -> SimplexResult:
    """Minimize f over a box; stops when the simplex diameter < xtol."""
    lo = np.array([b[0] for b in bounds], dtype=np.float64)
    hi = np.array([b[1] for b in bounds], dtype=np.float64)
    x0 = np.clip(np.asarray(x0, dtype=np.float64), lo, hi)
    n = len(x0)
    n_eval = 0

    def g(x):
        nonlocal n_eval
        n_eval += 1
        xc = np.clip(x, lo, hi)
        d = x - xc
        return f(xc) + _PENALTY * float(d @ d)

    # initial simplex: x0 plus per-axis steps scaled to the box
    step = 0.1 * (hi - lo)
    verts = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] = v[i] + step[i] if v[i] + step[i] <= hi[i] else v[i] - step[i]
        verts.append(v)
    verts = np.array(verts)
    vals = np.array([g(v) for v in verts])

    it = 0
    while it < max_iter:
        order = np.argsort(vals, kind="stable")
        verts = verts[order]
        vals = vals[order]
        diam = 0.0
        for i in range(1, n + 1):
            d = float(np.linalg.norm(verts[i] - verts[0]))
            if d > diam:
                diam = d
        if diam < xtol:
            break
        it += 1
        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]
        xr = centroid + (centroid - worst)
        fr = g(xr)
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = g(xe)
            if fe < fr:
                verts[-1], vals[-1] = xe, fe
            else:
                verts[-1], vals[-1] = xr, fr
        elif fr < vals[-2]:
            verts[-1], vals[-1] = xr, fr
        else:
            xc_ = centroid + 0.5 * (worst - centroid)
            fc = g(xc_)
            if fc < vals[-1]:
                verts[-1], vals[-1] = xc_, fc
            else:
                for i in range(1, n + 1):
                    verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                    vals[i] = g(verts[i])
    best = int(np.argmin(vals))
    return SimplexResult(x=np.clip(verts[best], lo, hi), fun=float(vals[best]),
                         iterations=it, evaluations=n_eval)
