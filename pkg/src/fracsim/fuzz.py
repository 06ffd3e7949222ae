"""Randomized cross-validation of the box contact queries.

Draws seeded random box pairs, compares the separating-axis boolean against
the independent support-function intersection search, and reports any
disagreement outside the grazing band (|smallest overlap| <= 1e-9), where
the two methods may legitimately differ.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .collision import Obb, _axis_matrix, sat_contact
from .geometry import random_rotation
from .gjk import box_support, convex_intersects

GRAZING_BAND = 1e-9


def random_obb(rng: np.random.Generator, label: str = "") -> Obb:
    """Uniform center in a 0.5 m cube, random rotation, extents in [0.01, 0.2]."""
    return Obb(
        center=rng.uniform(-0.25, 0.25, 3),
        axes=random_rotation(rng).T,
        half_extents=rng.uniform(0.01, 0.2, 3),
        label=label,
    )


def min_overlap(p: Obb, d: Obb) -> float:
    """Signed smallest overlap across the candidate axes (negative: separated)."""
    rows, _ = _axis_matrix(p, d)
    ep = np.abs(rows @ p.axes.T) @ p.half_extents
    ed = np.abs(rows @ d.axes.T) @ d.half_extents
    cp = rows @ p.center
    cd = rows @ d.center
    return float(np.min(np.minimum(cp + ep, cd + ed) - np.maximum(cp - ep, cd - ed)))


def oracle_intersects(p: Obb, d: Obb) -> bool:
    seed = tuple((p.center - d.center).tolist())
    return convex_intersects(
        box_support(p.center, p.axes, p.half_extents),
        box_support(d.center, d.axes, d.half_extents),
        seed_dir=seed,
    )


@dataclass
class FuzzDisagreement:
    index: int
    sat_colliding: bool
    oracle_colliding: bool
    smallest_overlap: float


@dataclass
class FuzzReport:
    pairs: int
    seed: int
    disagreements: list[FuzzDisagreement] = field(default_factory=list)
    grazing_skipped: int = 0
    sat_seconds: float = 0.0
    oracle_seconds: float = 0.0

    @property
    def clean(self) -> bool:
        return not self.disagreements

    def summary_lines(self) -> list[str]:
        return [
            f"pairs={self.pairs} seed={self.seed}",
            f"disagreements_outside_band={len(self.disagreements)}",
            f"grazing_band_skipped={self.grazing_skipped}",
            f"sat_seconds={self.sat_seconds:.3f} oracle_seconds={self.oracle_seconds:.3f}",
        ]


def collision_fuzz(pairs: int, seed: int) -> FuzzReport:
    if pairs <= 0:
        raise ValueError("pair count must be positive")
    rng = np.random.default_rng(seed)
    boxes = [(random_obb(rng, "p"), random_obb(rng, "d")) for _ in range(pairs)]

    t0 = time.perf_counter()
    sat_results = [sat_contact(p, d).colliding for p, d in boxes]
    sat_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    oracle_results = [oracle_intersects(p, d) for p, d in boxes]
    oracle_seconds = time.perf_counter() - t0

    report = FuzzReport(pairs=pairs, seed=seed, sat_seconds=sat_seconds,
                        oracle_seconds=oracle_seconds)
    for i, ((p, d), sat_hit, oracle_hit) in enumerate(zip(boxes, sat_results, oracle_results)):
        if sat_hit == oracle_hit:
            continue
        ol = min_overlap(p, d)
        if abs(ol) <= GRAZING_BAND:
            report.grazing_skipped += 1
            continue
        report.disagreements.append(FuzzDisagreement(i, sat_hit, oracle_hit, ol))
    return report


def write_fuzz_report(report: FuzzReport, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for line in report.summary_lines():
            fh.write(line + "\n")
        for rec in report.disagreements:
            fh.write(
                f"disagreement index={rec.index} sat={rec.sat_colliding} "
                f"oracle={rec.oracle_colliding} smallest_overlap={rec.smallest_overlap!r}\n"
            )
