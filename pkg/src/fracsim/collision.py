"""Oriented bounding boxes for bone segments and separating-axis contact queries.

A pair of boxes is tested against up to 15 candidate axes: the three face
normals of each box plus the nine pairwise edge cross products. Projections
that overlap on every axis mean collision; the axis with the smallest
overlap gives the penetration depth and contact normal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Mat3, Pose, Vec3, transform_point

DEGENERATE_CROSS_TOL = 1e-8
AXIS_UNIT_TOL = 1e-9


class BoneSegment(str, Enum):
    PROXIMAL_SHAFT = "proximal_shaft"
    PROXIMAL_HEAD = "proximal_head"
    DISTAL_SHAFT = "distal_shaft"
    DISTAL_CONDYLE = "distal_condyle"


@dataclass(frozen=True, eq=False)
class Obb:
    """Oriented box: world center (m), three unit axis rows, half extents (m)."""

    center: Vec3
    axes: Mat3  # rows are the box's local axis directions in world frame
    half_extents: Vec3
    label: str = ""

    def vertices(self) -> np.ndarray:
        """The 8 corners, shape (8, 3)."""
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
        return self.center + (signs * self.half_extents) @ self.axes

    def transformed(self, pose: Pose) -> "Obb":
        return Obb(
            center=transform_point(pose, self.center),
            axes=self.axes @ pose.rotation.T,
            half_extents=self.half_extents.copy(),
            label=self.label,
        )


def validate_obb(box: Obb, name: str = "obb") -> None:
    if not np.all(np.isfinite(box.center)):
        raise ValueError(f"{name}: non-finite center")
    if np.any(box.half_extents <= 0.0):
        raise ValueError(f"{name}: half extents must be strictly positive")
    gram = box.axes @ box.axes.T
    if np.max(np.abs(gram - np.eye(3))) > AXIS_UNIT_TOL:
        raise ValueError(f"{name}: axes are not orthonormal")


@dataclass(frozen=True)
class ProjectionInterval:
    lo: float
    hi: float


class CandidateAxis(NamedTuple):
    index: int  # position in the fixed 15-axis enumeration
    direction: Vec3


class ContactResult(NamedTuple):
    colliding: bool
    depth: float  # m, > 0 iff colliding
    normal: Vec3  # unit, points from the proximal box toward the distal box
    axis_index: int | None
    pair: tuple[str, str]  # (proximal label, distal label)


_FACE_INDICES = np.arange(6)
_ALL_INDICES = np.arange(15)


def _axis_matrix(p: Obb, d: Obb) -> tuple[np.ndarray, np.ndarray]:
    """All non-degenerate candidate axes as unit rows, with their indices.

    Enumeration order: p face normals (0-2), d face normals (3-5), then the
    cross products in row-major (i, j) order (6-14). Cross products whose
    pre-normalization norm falls below ``DEGENERATE_CROSS_TOL`` (parallel
    edge pairs) are dropped; they are redundant with the face axes.

    The cross products are expanded by hand: this sits on the per-tick hot
    path and np.cross carries too much shape machinery for 3-vectors.
    """
    pa = p.axes
    da = d.axes
    cx = (pa[:, 1, None] * da[None, :, 2] - pa[:, 2, None] * da[None, :, 1]).ravel()
    cy = (pa[:, 2, None] * da[None, :, 0] - pa[:, 0, None] * da[None, :, 2]).ravel()
    cz = (pa[:, 0, None] * da[None, :, 1] - pa[:, 1, None] * da[None, :, 0]).ravel()
    nsq = cx * cx + cy * cy + cz * cz
    if nsq.min() >= DEGENERATE_CROSS_TOL**2:  # common case: no parallel edges
        rows = np.empty((15, 3))
        rows[:3] = pa
        rows[3:6] = da
        inv = 1.0 / np.sqrt(nsq)
        rows[6:, 0] = cx * inv
        rows[6:, 1] = cy * inv
        rows[6:, 2] = cz * inv
        return rows, _ALL_INDICES
    kept = np.flatnonzero(nsq >= DEGENERATE_CROSS_TOL**2)
    rows = np.empty((6 + kept.size, 3))
    rows[:3] = pa
    rows[3:6] = da
    if kept.size:
        inv = 1.0 / np.sqrt(nsq[kept])
        rows[6:, 0] = cx[kept] * inv
        rows[6:, 1] = cy[kept] * inv
        rows[6:, 2] = cz[kept] * inv
    idx = np.empty(6 + kept.size, dtype=np.intp)
    idx[:6] = _FACE_INDICES
    idx[6:] = 6 + kept
    return rows, idx


def candidate_axes(p: Obb, d: Obb) -> list[CandidateAxis]:
    rows, idx = _axis_matrix(p, d)
    return [CandidateAxis(int(i), rows[k]) for k, i in enumerate(idx)]


def project_extent(b: Obb, axis: Vec3) -> float:
    """Half-width of the box's projection onto a unit axis."""
    return float(b.half_extents @ np.abs(b.axes @ axis))


def project_interval(b: Obb, axis: Vec3) -> ProjectionInterval:
    c = float(b.center @ axis)
    e = project_extent(b, axis)
    return ProjectionInterval(c - e, c + e)


def axis_overlap(a: ProjectionInterval, b: ProjectionInterval) -> float:
    """Signed interval overlap; negative means the projections separate."""
    return min(a.hi, b.hi) - max(a.lo, b.lo)


_NO_CONTACT_NORMAL = np.zeros(3)


def sat_contact(p: Obb, d: Obb) -> ContactResult:
    """Separating-axis query for one proximal/distal box pair.

    Evaluates every candidate axis at once (algebraically identical to the
    per-axis interval operations above). Any non-positive overlap means a
    separating axis exists. Otherwise the smallest overlap is the
    penetration depth, ties broken by the lowest enumeration index; the
    normal is the winning axis signed to point from p's center toward d's.
    """
    rows, idx = _axis_matrix(p, d)
    ep = np.abs(rows @ p.axes.T) @ p.half_extents
    ed = np.abs(rows @ d.axes.T) @ d.half_extents
    cp = rows @ p.center
    cd = rows @ d.center
    # Interval form, not the ep + ed - |cp - cd| shortcut: the two differ
    # when one projection contains the other (the shortcut reports the
    # larger escape distance, the interval form the contained width).
    overlap = np.minimum(cp + ep, cd + ed) - np.maximum(cp - ep, cd - ed)
    j = int(np.argmin(overlap))
    depth = float(overlap[j])
    if depth <= 0.0:
        return ContactResult(False, 0.0, _NO_CONTACT_NORMAL, None, (p.label, d.label))
    axis = rows[j] if cd[j] - cp[j] > 0.0 else -rows[j]
    return ContactResult(True, depth, axis, int(idx[j]), (p.label, d.label))


def scene_contacts(proximal: Sequence[Obb], distal: Sequence[Obb]) -> list[ContactResult]:
    """One contact query per (proximal, distal) pair.

    Deterministic order: distal boxes outer, proximal boxes inner. All pairs
    are evaluated in one batched sweep (same axis enumeration, overlaps and
    tie-breaking as sat_contact; degenerate cross axes are masked with +inf
    instead of dropped, which leaves argmin untouched).
    """
    np_ = len(proximal)
    nd = len(distal)
    if np_ * nd <= 1:
        return [sat_contact(p, d) for d in distal for p in proximal]

    pairs = [(p, d) for d in distal for p in proximal]
    k = len(pairs)
    pa = np.empty((k, 3, 3))
    da = np.empty((k, 3, 3))
    hp = np.empty((k, 3))
    hd = np.empty((k, 3))
    pc = np.empty((k, 3))
    cc = np.empty((k, 3))
    for ki, (p, d) in enumerate(pairs):
        pa[ki] = p.axes
        da[ki] = d.axes
        hp[ki] = p.half_extents
        hd[ki] = d.half_extents
        pc[ki] = p.center
        cc[ki] = d.center

    crosses = np.empty((k, 3, 3, 3))
    crosses[..., 0] = pa[:, :, None, 1] * da[:, None, :, 2] - pa[:, :, None, 2] * da[:, None, :, 1]
    crosses[..., 1] = pa[:, :, None, 2] * da[:, None, :, 0] - pa[:, :, None, 0] * da[:, None, :, 2]
    crosses[..., 2] = pa[:, :, None, 0] * da[:, None, :, 1] - pa[:, :, None, 1] * da[:, None, :, 0]
    crosses = crosses.reshape(k, 9, 3)
    nsq = np.einsum("kij,kij->ki", crosses, crosses)
    degenerate = nsq < DEGENERATE_CROSS_TOL**2
    inv = 1.0 / np.sqrt(np.where(degenerate, 1.0, nsq))

    axes = np.empty((k, 15, 3))
    axes[:, :3] = pa
    axes[:, 3:6] = da
    axes[:, 6:] = crosses * inv[:, :, None]

    ep = np.einsum("kim,km->ki", np.abs(np.einsum("kij,kmj->kim", axes, pa)), hp)
    ed = np.einsum("kim,km->ki", np.abs(np.einsum("kij,kmj->kim", axes, da)), hd)
    cp = np.einsum("kij,kj->ki", axes, pc)
    cd = np.einsum("kij,kj->ki", axes, cc)
    overlap = np.minimum(cp + ep, cd + ed) - np.maximum(cp - ep, cd - ed)
    overlap[:, 6:][degenerate] = np.inf

    results = []
    best = np.argmin(overlap, axis=1)
    for ki, (p, d) in enumerate(pairs):
        j = int(best[ki])
        depth = float(overlap[ki, j])
        if depth <= 0.0:
            results.append(ContactResult(False, 0.0, _NO_CONTACT_NORMAL, None, (p.label, d.label)))
        else:
            axis = axes[ki, j] if cd[ki, j] - cp[ki, j] > 0.0 else -axes[ki, j]
            results.append(ContactResult(True, depth, axis, j, (p.label, d.label)))
    return results
