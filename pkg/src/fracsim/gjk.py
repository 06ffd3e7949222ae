"""Boolean convex-intersection test via support-function simplex search.

Independent cross-check for the box collision queries: shares no code with
the separating-axis path (plain float tuples, no numpy), so a bug in one is
very unlikely to hide in the other. Only the boolean answer is produced.

Results within ~1e-9 of grazing contact are inherently ambiguous and are
excluded from equivalence checks by the callers.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

Point = tuple[float, float, float]
SupportFn = Callable[[float, float, float], Point]

_MAX_ITER = 64


def _sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _neg(a: Point) -> Point:
    return (-a[0], -a[1], -a[2])


def _dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Point, b: Point) -> Point:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def box_support(center: Sequence[float], axes: Sequence[Sequence[float]],
                half_extents: Sequence[float]) -> SupportFn:
    """Support function of an oriented box (axes given as three unit rows)."""
    cx, cy, cz = (float(center[0]), float(center[1]), float(center[2]))
    rows = [tuple(float(v) for v in row) for row in axes]
    hs = [float(h) for h in half_extents]

    def support(dx: float, dy: float, dz: float) -> Point:
        px, py, pz = cx, cy, cz
        for (ax, ay, az), h in zip(rows, hs):
            if ax * dx + ay * dy + az * dz >= 0.0:
                px += h * ax
                py += h * ay
                pz += h * az
            else:
                px -= h * ax
                py -= h * ay
                pz -= h * az
        return (px, py, pz)

    return support


def sphere_support(center: Sequence[float], radius: float) -> SupportFn:
    """Support function of a sphere (used to validate the search itself)."""
    cx, cy, cz = (float(center[0]), float(center[1]), float(center[2]))
    r = float(radius)

    def support(dx: float, dy: float, dz: float) -> Point:
        n = math.sqrt(dx * dx + dy * dy + dz * dz)
        if n == 0.0:
            return (cx + r, cy, cz)
        return (cx + r * dx / n, cy + r * dy / n, cz + r * dz / n)

    return support


def convex_intersects(support_a: SupportFn, support_b: SupportFn,
                      seed_dir: Point = (1.0, 0.0, 0.0)) -> bool:
    """True iff the two convex sets share a point (touching counts).

    Runs the simplex refinement on the Minkowski difference A - B: the sets
    intersect iff the difference contains the origin.
    """

    def minkowski(d: Point) -> Point:
        pa = support_a(d[0], d[1], d[2])
        pb = support_b(-d[0], -d[1], -d[2])
        return _sub(pa, pb)

    d = seed_dir
    if _dot(d, d) == 0.0:
        d = (1.0, 0.0, 0.0)
    a = minkowski(d)
    simplex = [a]
    d = _neg(a)

    for _ in range(_MAX_ITER):
        if _dot(d, d) < 1e-30:
            return True  # origin sits on the current simplex feature
        a = minkowski(d)
        if _dot(a, d) < 0.0:
            return False  # supporting plane separates the origin
        simplex.append(a)
        hit, simplex, d = _next_simplex(simplex)
        if hit:
            return True
    return True  # no certificate after many refinements: deep or touching


def _next_simplex(s: list[Point]) -> tuple[bool, list[Point], Point]:
    if len(s) == 2:
        return _case_line(s)
    if len(s) == 3:
        return _case_triangle(s)
    return _case_tetrahedron(s)


def _case_line(s: list[Point]) -> tuple[bool, list[Point], Point]:
    b, a = s
    ab = _sub(b, a)
    ao = _neg(a)
    if _dot(ab, ao) > 0.0:
        d = _cross(_cross(ab, ao), ab)
        if _dot(d, d) == 0.0:
            return True, s, d  # origin on the segment
        return False, [b, a], d
    return False, [a], ao


def _case_triangle(s: list[Point]) -> tuple[bool, list[Point], Point]:
    c, b, a = s
    ab = _sub(b, a)
    ac = _sub(c, a)
    ao = _neg(a)
    abc = _cross(ab, ac)
    if _dot(_cross(abc, ac), ao) > 0.0:
        if _dot(ac, ao) > 0.0:
            return False, [c, a], _cross(_cross(ac, ao), ac)
        return _case_line([b, a])
    if _dot(_cross(ab, abc), ao) > 0.0:
        return _case_line([b, a])
    proj = _dot(abc, ao)
    if proj > 0.0:
        return False, [c, b, a], abc
    if proj < 0.0:
        return False, [b, c, a], _neg(abc)
    return True, s, abc  # origin in the triangle's plane, inside it


def _case_tetrahedron(s: list[Point]) -> tuple[bool, list[Point], Point]:
    d0, c, b, a = s
    ao = _neg(a)
    ab = _sub(b, a)
    ac = _sub(c, a)
    ad = _sub(d0, a)

    # Outward normals of the three faces that contain the newest point.
    for face, other in (((c, b, a), ad), ((d0, c, a), ab), ((b, d0, a), ac)):
        p, q, r = face
        n = _cross(_sub(q, r), _sub(p, r))
        if _dot(n, other) > 0.0:
            n = _neg(n)
        if _dot(n, ao) > 0.0:
            return _case_triangle([p, q, r])
    return True, s, (0.0, 0.0, 0.0)
