"""Small planar convex-polygon helpers used by the contact model."""
from __future__ import annotations

import math

import numpy as np


def rect_corners(pose, length: float, width: float) -> np.ndarray:
    """Corners of a foot rectangle centered on ``pose``, counter-clockwise."""
    hl, hw = 0.5 * length, 0.5 * width
    c, s = math.cos(pose[2]), math.sin(pose[2])
    x, y = float(pose[0]), float(pose[1])
    return np.array([[x + c * lx - s * ly, y + s * lx + c * ly]
                     for lx, ly in ((-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw))])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, collinear points dropped."""
    pts = sorted(map(tuple, np.asarray(points, dtype=float).tolist()))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def area(poly: np.ndarray) -> float:
    """Signed shoelace area, positive for counter-clockwise polygons."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def contains(poly: np.ndarray, p, tol: float = 0.0) -> bool:
    """Point-in-convex-polygon test for a counter-clockwise polygon."""
    px, py = float(p[0]), float(p[1])
    pts = poly.tolist()
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        if ex * (py - ay) - ey * (px - ax) < -tol * math.hypot(ex, ey):
            return False
    return True


def closest_point(poly: np.ndarray, p) -> np.ndarray:
    """Nearest point of a closed convex polygon to ``p``."""
    if len(poly) == 1:
        return np.array(poly[0], dtype=float)
    # a collapsed polygon would pass every edge test, so only trust it with area
    if len(poly) > 2 and area(poly) > 0.0 and contains(poly, p):
        return np.array(p, dtype=float)
    px, py = float(p[0]), float(p[1])
    pts = poly.tolist()
    n = len(pts)
    best, best_d2 = None, math.inf
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        denom = ex * ex + ey * ey
        t = 0.0 if denom == 0.0 else min(1.0, max(0.0, ((px - ax) * ex + (py - ay) * ey) / denom))
        qx, qy = ax + t * ex, ay + t * ey
        d2 = (px - qx) ** 2 + (py - qy) ** 2
        if d2 < best_d2:
            best, best_d2 = (qx, qy), d2
    return np.array(best)


def clip(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of ``poly`` to the half-plane ``normal . x <= offset``."""
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        da, db = a @ normal - offset, b @ normal - offset
        if da <= 0.0:
            out.append(a)
        if (da < 0.0 < db) or (db < 0.0 < da):
            out.append(a + (da / (da - db)) * (b - a))
    return np.array(out).reshape(-1, 2)
