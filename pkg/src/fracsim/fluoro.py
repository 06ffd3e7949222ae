"""Simplified C-arm imaging: orthographic projection with additive opacity.

The imaging axis is the C-arm rotation's local +z; the image plane is
spanned by its local +x/+y. Every object whose silhouette covers a pixel
adds its material opacity there, then the accumulated intensity clamps to
[0, 1]. Box and capsule silhouettes are exact convex shapes, so projected
areas can be checked analytically. Outlines are also returned as 2D
polylines (mm) for lightweight vector display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collision import Obb
from .geometry import EulerAngles, Mat3, Vec3, euler_to_rotation


@dataclass(frozen=True, eq=False)
class CArmPose:
    rotation: Mat3
    center: Vec3

    @staticmethod
    def frontal(center: Vec3 | None = None) -> "CArmPose":
        return CArmPose(np.eye(3), np.zeros(3) if center is None else center)


@dataclass(frozen=True)
class MaterialOpacity:
    bone: float = 0.8
    thigh: float = 0.1
    overrides: tuple[tuple[str, float], ...] = ()

    def validate(self) -> None:
        values = [self.bone, self.thigh] + [v for _, v in self.overrides]
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError("opacities must sit in [0, 1]")

    def lookup(self, label: str, default: float) -> float:
        for name, value in self.overrides:
            if name == label:
                return value
        return default


@dataclass(frozen=True, eq=False)
class Capsule:
    """Segment p0-p1 swept by a sphere of the given radius (m)."""

    p0: Vec3
    p1: Vec3
    radius: float
    label: str = ""


@dataclass(frozen=True)
class FluoroConfig:
    width: int = 512
    height: int = 512
    mm_per_px: float = 0.5

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0 or self.mm_per_px <= 0.0:
            raise ValueError("image dimensions and pixel pitch must be positive")


@dataclass(eq=False)
class FluoroImage:
    width: int
    height: int
    mm_per_px: float
    intensity: np.ndarray  # (height, width), values in [0, 1]
    overlay: list[tuple[str, np.ndarray]] = field(default_factory=list)  # (label, (n, 2) mm)


def set_carm(current: CArmPose, delta: EulerAngles) -> CArmPose:
    """Compose an incremental rotation about the world axes; center unchanged."""
    return CArmPose(euler_to_rotation(delta) @ current.rotation, current.center)


def _convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, no repeated endpoint."""
    pts = sorted(map(tuple, points))
    if len(pts) <= 2:
        return np.array(pts)

    def half(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2:
                (ox, oy), (ax, ay) = out[-2], out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0.0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def _pixel_grid(cfg: FluoroConfig) -> tuple[np.ndarray, np.ndarray]:
    xs = (np.arange(cfg.width) - (cfg.width - 1) / 2.0) * cfg.mm_per_px
    ys = (np.arange(cfg.height) - (cfg.height - 1) / 2.0) * cfg.mm_per_px
    return np.meshgrid(xs, ys)


def _project(points: np.ndarray, carm: CArmPose) -> np.ndarray:
    """World points (n, 3) to image-plane mm coordinates (n, 2)."""
    rel = points - carm.center
    u = rel @ carm.rotation[:, 0]
    v = rel @ carm.rotation[:, 1]
    return np.column_stack([u, v]) * 1000.0


def _polygon_mask(hull: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    inside = np.ones(px.shape, dtype=bool)
    n = len(hull)
    for k in range(n):
        ax, ay = hull[k]
        bx, by = hull[(k + 1) % n]
        inside &= (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0.0
    return inside


def _capsule_outline(a: np.ndarray, b: np.ndarray, r_mm: float, segments: int = 24) -> np.ndarray:
    axis = b - a
    n = math.hypot(axis[0], axis[1])
    if n < 1e-9:
        angles = np.linspace(0.0, 2.0 * math.pi, 2 * segments, endpoint=False)
        return a + r_mm * np.column_stack([np.cos(angles), np.sin(angles)])
    t = axis / n
    base = math.atan2(t[1], t[0])
    out = []
    for center, start in ((b, base - math.pi / 2), (a, base + math.pi / 2)):
        for k in range(segments + 1):
            ang = start + math.pi * k / segments
            out.append(center + r_mm * np.array([math.cos(ang), math.sin(ang)]))
    return np.array(out)


def capture(
    objects: list[tuple[Obb | Capsule, float]],
    carm: CArmPose,
    cfg: FluoroConfig,
    opacity: MaterialOpacity | None = None,
    lines: list[tuple[str, Vec3, Vec3]] | None = None,
) -> FluoroImage:
    """Orthographic capture of the given (shape, opacity) list.

    ``lines`` are hardware outlines (e.g. actuator legs) drawn only into the
    overlay; they contribute no opacity.
    """
    if opacity is not None:
        opacity.validate()
    px, py = _pixel_grid(cfg)
    total = np.zeros((cfg.height, cfg.width))
    overlay: list[tuple[str, np.ndarray]] = []

    for shape, alpha in objects:
        if isinstance(shape, Obb):
            pts = _project(shape.vertices(), carm)
            hull = _convex_hull_2d(pts)
            if len(hull) >= 3:
                total += alpha * _polygon_mask(hull, px, py)
            overlay.append((shape.label or "box", hull))
        elif isinstance(shape, Capsule):
            a = _project(shape.p0[None, :], carm)[0]
            b = _project(shape.p1[None, :], carm)[0]
            r_mm = shape.radius * 1000.0
            ab = b - a
            denom = float(ab @ ab)
            if denom < 1e-12:
                dist = np.hypot(px - a[0], py - a[1])
            else:
                t = np.clip(((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / denom, 0.0, 1.0)
                dist = np.hypot(px - (a[0] + t * ab[0]), py - (a[1] + t * ab[1]))
            total += alpha * (dist <= r_mm)
            overlay.append((shape.label or "capsule", _capsule_outline(a, b, r_mm)))
        else:
            raise TypeError(f"unsupported projection shape: {type(shape).__name__}")

    for label, a3, b3 in lines or []:
        seg = _project(np.vstack([a3, b3]), carm)
        overlay.append((label, seg))

    return FluoroImage(cfg.width, cfg.height, cfg.mm_per_px, np.clip(total, 0.0, 1.0), overlay)


def silhouette_area_mm2(box: Obb, carm: CArmPose) -> float:
    """Analytic projected silhouette area of a box (shoelace on the hull)."""
    hull = _convex_hull_2d(_project(box.vertices(), carm))
    x = hull[:, 0]
    y = hull[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def write_pgm(image: FluoroImage, path: str) -> None:
    """Plain (P2) PGM, one raster row per line, max value 255."""
    levels = np.rint(image.intensity * 255.0).astype(int)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"P2\n{image.width} {image.height}\n255\n")
        for row in levels:
            fh.write(" ".join(str(v) for v in row))
            fh.write("\n")


def write_overlay_text(image: FluoroImage, path: str) -> None:
    """Outline polylines as text: ``polyline <label> x,y x,y ...`` in mm."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# fluoro overlay; image-plane coordinates in mm\n")
        for label, pts in image.overlay:
            coords = " ".join(f"{float(x)!r},{float(y)!r}" for x, y in pts)
            fh.write(f"polyline {label} {coords}\n")


def read_overlay_text(path: str) -> list[tuple[str, np.ndarray]]:
    out: list[tuple[str, np.ndarray]] = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            kind, label, *coords = line.split(" ")
            if kind != "polyline":
                raise ValueError(f"unknown overlay record {kind!r}")
            pts = np.array([[float(a) for a in c.split(",")] for c in coords])
            out.append((label, pts))
    return out
