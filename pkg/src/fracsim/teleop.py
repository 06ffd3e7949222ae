"""Leader-to-follower incremental pose mapping with dynamic velocity clamping.

Each tick the follower target advances by the leader's pose increment,
scaled down whenever the leader moves faster than the configured maximum
linear/angular speed. Translation scales componentwise; rotation scales the
geodesic (axis-angle) increment, which is well defined across the +/-pi
wrap where scaled Euler differences are not. A clutch freezes the follower
while the leader repositions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import Pose, Twist, renormalized, scaled_rotation_increment


@dataclass(frozen=True)
class ScalingConfig:
    max_v: float = 0.05  # m/s
    max_w: float = 0.5  # rad/s

    def __post_init__(self) -> None:
        if self.max_v <= 0.0 or self.max_w <= 0.0:
            raise ValueError("max_v and max_w must be positive")


@dataclass(frozen=True)
class ScaleFactor:
    s_lin: float
    s_ang: float

    @staticmethod
    def unity() -> "ScaleFactor":
        return ScaleFactor(1.0, 1.0)


@dataclass(frozen=True, eq=False)
class TeleopState:
    hc_prev: Pose
    rsr_prev: Pose
    engaged: bool = True


def compute_scale(twist: Twist, cfg: ScalingConfig) -> ScaleFactor:
    """Clamp-only scale: 1 when at or under the speed limits, else limit/speed."""
    v = twist.linear_speed()
    w = twist.angular_speed()
    s_lin = cfg.max_v / v if v > cfg.max_v else 1.0
    s_ang = cfg.max_w / w if w > cfg.max_w else 1.0
    return ScaleFactor(s_lin, s_ang)


def map_increment(state: TeleopState, hc_now: Pose, s: ScaleFactor) -> Pose:
    """New follower target: previous target advanced by the scaled leader delta."""
    position = state.rsr_prev.position + s.s_lin * (hc_now.position - state.hc_prev.position)
    increment = scaled_rotation_increment(state.hc_prev.rotation, hc_now.rotation, s.s_ang)
    rotation = renormalized(state.rsr_prev.rotation @ increment)
    return Pose(position, rotation)


def tick(
    state: TeleopState,
    hc_now: Pose,
    hc_twist: Twist,
    cfg: ScalingConfig,
    engaged: bool = True,
) -> tuple[TeleopState, Pose]:
    """One control tick: returns the advanced state and the follower target.

    Disengaged ticks advance only the remembered leader pose, so the leader
    can be repositioned freely and re-engaging causes no follower jump.
    """
    if not engaged:
        new_state = TeleopState(hc_now, state.rsr_prev, engaged=False)
        return new_state, state.rsr_prev
    s = compute_scale(hc_twist, cfg)
    target = map_increment(state, hc_now, s)
    return TeleopState(hc_now, target, engaged=True), target


def retarget(state: TeleopState, new_target: Pose) -> TeleopState:
    """Replace the remembered follower target (used when a constraint mode
    projects the commanded pose)."""
    return replace(state, rsr_prev=new_target)
