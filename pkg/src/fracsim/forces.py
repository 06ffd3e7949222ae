"""Spring-damper penalty forces synthesized from box contacts.

Each colliding contact contributes k * depth along the contact normal; the
contributions sum over the scene's contact pairs, and the global force adds
a velocity damping term. An optional saturation cap models the bounded
output of a physical haptic device.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .collision import ContactResult
from .geometry import Vec3


@dataclass(frozen=True)
class ForceParams:
    spring_k: float = 1000.0  # N/m
    damping_c: float = 10.0  # N*s/m
    f_max: float | None = 30.0  # N; None disables saturation

    def validate(self) -> None:
        if self.spring_k <= 0.0:
            raise ValueError("spring_k must be > 0")
        if self.damping_c < 0.0:
            raise ValueError("damping_c must be >= 0")
        if self.f_max is not None and self.f_max <= 0.0:
            raise ValueError("f_max must be > 0 when set")


@dataclass(frozen=True, eq=False)
class ForceResult:
    f_col: Vec3  # summed contact spring force, N
    f_global: Vec3  # f_col with damping and saturation applied, N
    per_contact: tuple[tuple[tuple[str, str], Vec3], ...] = field(default_factory=tuple)


def contact_force(contact: ContactResult, params: ForceParams) -> Vec3:
    """Spring force of one contact: depth * normal * k (zero when apart)."""
    if not contact.colliding:
        return np.zeros(3)
    return contact.depth * contact.normal * params.spring_k


def aggregate_contact_forces(contacts: Sequence[ContactResult], params: ForceParams) -> Vec3:
    total = np.zeros(3)
    for c in contacts:
        if c.colliding:
            total = total + contact_force(c, params)
    return total


def global_force(f_col: Vec3, velocity: Vec3, params: ForceParams) -> Vec3:
    """f_col minus velocity damping, magnitude-capped if a limit is set."""
    f = f_col - velocity * params.damping_c
    if params.f_max is not None:
        mag = float(np.linalg.norm(f))
        if mag > params.f_max:
            f = f * (params.f_max / mag)
    return f


def evaluate_forces(contacts: Sequence[ContactResult], velocity: Vec3,
                    params: ForceParams) -> ForceResult:
    """Full per-tick force bookkeeping for a set of scene contacts."""
    per = tuple((c.pair, contact_force(c, params)) for c in contacts if c.colliding)
    f_col = np.zeros(3)
    for _, f in per:
        f_col = f_col + f
    return ForceResult(f_col, global_force(f_col, velocity, params), per)
