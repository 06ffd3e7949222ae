"""Deterministic fixed-timestep simulation of the teleoperated reduction.

Tick order: leader input -> scaled follower target -> inverse kinematics ->
spring-damper servo drives on the six active joint coordinates -> Newton
forward kinematics of the moving ring (seeded from the previous tick) ->
bone attachment -> contact queries -> penalty forces -> sample record.

The step function is pure (state in, state out) and everything it touches
is deterministic, so identical scenes and input scripts reproduce identical
trajectories bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import teleop as teleop_mod
from .collision import ContactResult, Obb, scene_contacts, validate_obb
from .fluoro import Capsule, CArmPose, FluoroConfig, MaterialOpacity
from .forces import ForceParams, ForceResult, evaluate_forces
from .geometry import Pose, Twist, Vec3, rotation_between, rotation_log, transform_point
from .kinematics import (
    HcGeometry,
    HcJointState,
    KinematicsError,
    RsrGeometry,
    RsrJointState,
    hc_joint_state,
    rsr_forward_kinematics,
    rsr_inverse_kinematics,
)
from .teleop import ScalingConfig, TeleopState


class EmptyLogError(Exception):
    pass


@dataclass(frozen=True)
class DriveParams:
    """Servo drive for one joint class: spring-damper with a force cap."""

    stiffness: float = 5000.0
    damping: float = 140.0
    force_limit: float = 200.0

    def validate(self) -> None:
        if min(self.stiffness, self.damping, self.force_limit) <= 0.0:
            raise ValueError("drive parameters must be positive")


def drive_step(
    current: float, rate: float, target: float, params: DriveParams, dt: float
) -> tuple[float, float, float]:
    """Advance one unit-inertia joint coordinate by dt; returns (value, rate, force).

    The servo force is stiffness * error - damping * rate, clamped to the
    force limit, integrated semi-implicitly (rate first, then position).
    """
    force = params.stiffness * (target - current) - params.damping * rate
    if force > params.force_limit:
        force = params.force_limit
    elif force < -params.force_limit:
        force = -params.force_limit
    rate = rate + force * dt
    return current + rate * dt, rate, force


@dataclass(frozen=True, eq=False)
class DeviceInput:
    """One tick of leader-device input (SI units)."""

    pose: Pose
    twist: Twist | None = None  # measured from the pose delta when absent
    engaged: bool = True
    grip: float = 0.0


@dataclass(frozen=True)
class FaultFlags:
    ik_unreachable: bool = False
    fk_failed: bool = False
    hc_unreachable: bool = False

    def any(self) -> bool:
        return self.ik_unreachable or self.fk_failed or self.hc_unreachable


@dataclass(eq=False)
class Scene:
    """Validated static description of one simulation setup."""

    dt: float
    scaling: ScalingConfig
    linear_drive: DriveParams
    rotary_drive: DriveParams
    force_params: ForceParams
    rsr: RsrGeometry
    hc: HcGeometry
    rsr_home: Pose
    hc_home: Pose
    proximal_obbs: tuple[Obb, ...]
    distal_templates: tuple[Obb, ...]  # boxes expressed in the moving-ring frame
    thigh: Capsule | None = None
    fluoro: FluoroConfig = field(default_factory=FluoroConfig)
    opacity: MaterialOpacity = field(default_factory=MaterialOpacity)
    carm_home: CArmPose = field(default_factory=CArmPose.frontal)
    perfect_tracking: bool = False  # joints snap to targets (test mode)
    strict_constraint: bool = False  # project colliding targets back out (experimental)
    name: str = "scene"

    def validate(self) -> None:
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.linear_drive.validate()
        self.rotary_drive.validate()
        self.force_params.validate()
        self.opacity.validate()
        for i, box in enumerate(self.proximal_obbs):
            validate_obb(box, f"proximal obb {i} ({box.label})")
        for i, box in enumerate(self.distal_templates):
            validate_obb(box, f"distal obb {i} ({box.label})")
        # The home poses must be reachable or every run starts in a fault.
        rsr_inverse_kinematics(self.rsr_home, self.rsr)
        hc_joint_state(self.hc_home, self.hc)


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    hc_pose: Pose
    rsr_target: Pose
    rsr_actual: Pose
    joints: RsrJointState
    f_global: Vec3
    collision_flags: tuple[bool, ...]
    faults: FaultFlags
    fk_iterations: int


@dataclass(frozen=True, eq=False)
class SimState:
    time: float  # always tick * dt exactly (no accumulated drift)
    tick: int
    teleop: TeleopState
    joint_targets: RsrJointState
    joints: RsrJointState
    rates_d: np.ndarray
    rates_theta: np.ndarray
    ring_pose: Pose
    ring_velocity: Vec3
    hc_joints: HcJointState
    distal_obbs: tuple[Obb, ...]
    contacts: tuple[ContactResult, ...]
    force: ForceResult
    rsr_target: Pose
    faults: FaultFlags
    fk_iterations: int
    fault_counts: tuple[int, int, int]  # cumulative (ik, fk, hc)
    sample: TrajectorySample | None = None


def attach_distal(ring_pose: Pose, templates: Sequence[Obb]) -> tuple[Obb, ...]:
    """World boxes for the distal fragment rigidly attached to the ring."""
    return tuple(box.transformed(ring_pose) for box in templates)


def initial_state(scene: Scene) -> SimState:
    joints = rsr_inverse_kinematics(scene.rsr_home, scene.rsr)
    distal = attach_distal(scene.rsr_home, scene.distal_templates)
    contacts = tuple(scene_contacts(scene.proximal_obbs, distal))
    force = evaluate_forces(contacts, np.zeros(3), scene.force_params)
    return SimState(
        time=0.0,
        tick=0,
        teleop=TeleopState(scene.hc_home, scene.rsr_home, engaged=True),
        joint_targets=joints.copy(),
        joints=joints,
        rates_d=np.zeros(3),
        rates_theta=np.zeros(3),
        ring_pose=scene.rsr_home,
        ring_velocity=np.zeros(3),
        hc_joints=hc_joint_state(scene.hc_home, scene.hc),
        distal_obbs=distal,
        contacts=contacts,
        force=force,
        rsr_target=scene.rsr_home,
        faults=FaultFlags(),
        fk_iterations=0,
        fault_counts=(0, 0, 0),
    )


def _measured_twist(prev: Pose, now: Pose, dt: float) -> Twist:
    dp = (now.position - prev.position) / dt
    dw = rotation_log(prev.rotation.T @ now.rotation) / dt
    return Twist(dp, dw)


def _project_out_of_collision(target: Pose, scene: Scene, passes: int = 3) -> Pose:
    pose = target
    for _ in range(passes):
        contacts = [
            c
            for c in scene_contacts(scene.proximal_obbs, attach_distal(pose, scene.distal_templates))
            if c.colliding
        ]
        if not contacts:
            break
        worst = max(contacts, key=lambda c: c.depth)
        pose = Pose(pose.position + worst.depth * worst.normal, pose.rotation)
    return pose


def step(state: SimState, scene: Scene, device: DeviceInput) -> SimState:
    dt = scene.dt
    twist = device.twist
    if twist is None:
        twist = _measured_twist(state.teleop.hc_prev, device.pose, dt)

    tele, target = teleop_mod.tick(state.teleop, device.pose, twist, scene.scaling, device.engaged)
    if scene.strict_constraint and device.engaged:
        projected = _project_out_of_collision(target, scene)
        if projected is not target:
            tele = teleop_mod.retarget(tele, projected)
            target = projected

    ik_fault = False
    targets = state.joint_targets
    try:
        targets = rsr_inverse_kinematics(target, scene.rsr)
    except KinematicsError:
        ik_fault = True  # hold the previous joint targets

    if scene.perfect_tracking:
        joints = targets.copy()
        rates_d = np.zeros(3)
        rates_theta = np.zeros(3)
    else:
        d = np.empty(3)
        th = np.empty(3)
        rates_d = np.empty(3)
        rates_theta = np.empty(3)
        for i in range(3):
            d[i], rates_d[i], _ = drive_step(
                state.joints.d[i], state.rates_d[i], targets.d[i], scene.linear_drive, dt
            )
            th[i], rates_theta[i], _ = drive_step(
                state.joints.theta[i], state.rates_theta[i], targets.theta[i],
                scene.rotary_drive, dt,
            )
        joints = RsrJointState(d, th)

    fk_fault = False
    fk_iters = 0
    ring = state.ring_pose
    try:
        ring, fk_iters = rsr_forward_kinematics(joints, scene.rsr, state.ring_pose)
    except KinematicsError:
        fk_fault = True  # freeze the mechanism, keep accepting input
        joints = state.joints
        rates_d = state.rates_d
        rates_theta = state.rates_theta

    distal = attach_distal(ring, scene.distal_templates)
    contacts = tuple(scene_contacts(scene.proximal_obbs, distal))
    ring_velocity = (ring.position - state.ring_pose.position) / dt
    force = evaluate_forces(contacts, ring_velocity, scene.force_params)

    hc_fault = False
    hc_joints = state.hc_joints
    try:
        hc_joints = hc_joint_state(device.pose, scene.hc, device.grip)
    except KinematicsError:
        hc_fault = True

    faults = FaultFlags(ik_fault, fk_fault, hc_fault)
    sample = TrajectorySample(
        t=state.time,
        hc_pose=device.pose,
        rsr_target=target,
        rsr_actual=ring,
        joints=joints,
        f_global=force.f_global,
        collision_flags=tuple(c.colliding for c in contacts),
        faults=faults,
        fk_iterations=fk_iters,
    )
    counts = (
        state.fault_counts[0] + ik_fault,
        state.fault_counts[1] + fk_fault,
        state.fault_counts[2] + hc_fault,
    )
    return SimState(
        time=(state.tick + 1) * dt,
        tick=state.tick + 1,
        teleop=tele,
        joint_targets=targets,
        joints=joints,
        rates_d=rates_d,
        rates_theta=rates_theta,
        ring_pose=ring,
        ring_velocity=ring_velocity,
        hc_joints=hc_joints,
        distal_obbs=distal,
        contacts=contacts,
        force=force,
        rsr_target=target,
        faults=faults,
        fk_iterations=fk_iters,
        fault_counts=counts,
        sample=sample,
    )


def iter_states(scene: Scene, script: Sequence[tuple[float, DeviceInput]]):
    """Yield the SimState after every dt tick of a timed input script.

    Rows must be time-sorted and lie on the dt grid; between rows the last
    input holds (zero-order hold). An empty script yields nothing.
    """
    if not script:
        return
    dt = scene.dt
    rows: list[tuple[int, DeviceInput]] = []
    for t, dev in script:
        idx = int(round(t / dt))
        if abs(t - idx * dt) > 1e-9 or idx < 0:
            raise ValueError(f"script time {t} does not lie on the dt={dt} grid")
        rows.append((idx, dev))
    if any(b <= a for (a, _), (b, _) in zip(rows, rows[1:])):
        raise ValueError("script times must be strictly increasing")

    hold = DeviceInput(scene.hc_home, Twist.zero())
    state = initial_state(scene)
    cursor = 0
    for k in range(rows[-1][0] + 1):
        while cursor < len(rows) and rows[cursor][0] <= k:
            hold = rows[cursor][1]
            cursor += 1
        state = step(state, scene, hold)
        yield state


def run_script(
    scene: Scene, script: Sequence[tuple[float, DeviceInput]]
) -> list[TrajectorySample]:
    """Batch-execute a timed input script; one TrajectorySample per dt tick."""
    return [state.sample for state in iter_states(scene, script)]


@dataclass(eq=False)
class DeviationReport:
    """Follower tracking error of the commanded target, per tick and summarized."""

    times: np.ndarray
    translation_mm: np.ndarray  # (n,) Euclidean error
    rotation_deg: np.ndarray  # (n,) geodesic error
    per_axis_translation_mm: np.ndarray  # (n, 3)
    per_axis_rotation_deg: np.ndarray  # (n, 3) Euler decomposition of the error rotation
    max_translation_mm: float = 0.0
    mean_translation_mm: float = 0.0
    rms_translation_mm: float = 0.0
    max_rotation_deg: float = 0.0
    mean_rotation_deg: float = 0.0
    rms_rotation_deg: float = 0.0

    def __post_init__(self) -> None:
        self.max_translation_mm = float(np.max(self.translation_mm))
        self.mean_translation_mm = float(np.mean(self.translation_mm))
        self.rms_translation_mm = float(np.sqrt(np.mean(self.translation_mm**2)))
        self.max_rotation_deg = float(np.max(self.rotation_deg))
        self.mean_rotation_deg = float(np.mean(self.rotation_deg))
        self.rms_rotation_deg = float(np.sqrt(np.mean(self.rotation_deg**2)))

    def summary_lines(self) -> list[str]:
        return [
            f"translation error mm: max={self.max_translation_mm:.6f} "
            f"mean={self.mean_translation_mm:.6f} rms={self.rms_translation_mm:.6f}",
            f"rotation error deg: max={self.max_rotation_deg:.6f} "
            f"mean={self.mean_rotation_deg:.6f} rms={self.rms_rotation_deg:.6f}",
        ]


def deviation_report(samples: Sequence[TrajectorySample]) -> DeviationReport:
    """Commanded-vs-achieved error series and summary over a trajectory log."""
    if not samples:
        raise EmptyLogError("no samples to analyze")
    from .geometry import rotation_to_euler  # local import to keep module top lean

    n = len(samples)
    times = np.array([s.t for s in samples])
    d_mm = np.empty((n, 3))
    ang_deg = np.empty(n)
    eul_deg = np.empty((n, 3))
    for i, s in enumerate(samples):
        d_mm[i] = (s.rsr_target.position - s.rsr_actual.position) * 1000.0
        rel = s.rsr_target.rotation.T @ s.rsr_actual.rotation
        ang_deg[i] = np.degrees(rotation_between(s.rsr_target.rotation, s.rsr_actual.rotation))
        e = rotation_to_euler(rel)
        eul_deg[i] = np.degrees([e.alpha, e.beta, e.gamma])
    return DeviationReport(
        times=times,
        translation_mm=np.linalg.norm(d_mm, axis=1),
        rotation_deg=ang_deg,
        per_axis_translation_mm=d_mm,
        per_axis_rotation_deg=eul_deg,
    )


def drive_energy(state: SimState, scene: Scene) -> float:
    """Kinetic plus servo-spring energy of the six driven coordinates."""
    e = 0.0
    for i in range(3):
        e += 0.5 * float(state.rates_d[i]) ** 2
        e += 0.5 * scene.linear_drive.stiffness * float(state.joint_targets.d[i] - state.joints.d[i]) ** 2
        e += 0.5 * float(state.rates_theta[i]) ** 2
        e += 0.5 * scene.rotary_drive.stiffness * float(state.joint_targets.theta[i] - state.joints.theta[i]) ** 2
    return e


def fluoro_objects(
    scene: Scene, state: SimState
) -> tuple[list[tuple[Obb | Capsule, float]], list[tuple[str, Vec3, Vec3]]]:
    """Projection inputs for the current state: (shape, opacity) plus leg lines."""
    objects: list[tuple[Obb | Capsule, float]] = []
    for box in scene.proximal_obbs:
        objects.append((box, scene.opacity.lookup(box.label, scene.opacity.bone)))
    for box in state.distal_obbs:
        objects.append((box, scene.opacity.lookup(box.label, scene.opacity.bone)))
    if scene.thigh is not None:
        objects.append((scene.thigh, scene.opacity.lookup(scene.thigh.label, scene.opacity.thigh)))
    lines = []
    for i in range(3):
        tip = transform_point(state.ring_pose, scene.rsr.moving_anchors[i])
        lines.append((f"leg{i}", scene.rsr.fixed_anchors[i], tip))
    return objects, lines
