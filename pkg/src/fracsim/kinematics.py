"""Kinematics of the follower ring robot and the leader haptic device.

Follower: a 3-armed parallel mechanism. Each arm runs from an anchor on the
fixed ring through a universal joint (active rotary + passive pivot), a
prismatic actuator, and a spherical joint to an anchor on the moving ring.
Inverse kinematics uses the leg-vector form: with ring pose (p, R),
``l_i = p + R @ b_i - a_i`` gives actuator length d_i = |l_i| and the active
rotary angle as the polar angle of l_i in the arm's frame.

Leader: a delta mechanism (3-DOF translation, three active shoulder angles)
plus a 3-axis serial wrist carrying the hand orientation and a grip scalar.

Forward kinematics of the follower has no closed form; a Newton iteration
over the six leg residuals serves as the validation oracle and as the
per-tick pose reconstruction, seeded from the previous tick.

Arm frame convention: for rotary axis u, the zero plane is spanned by u and
v = normalize(z - (z.u)u) (world +x instead when u is near-vertical);
w = u x v completes the frame and theta = atan2(l.w, l.v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, Vec3, renormalized, rotation_to_euler, unit


class KinematicsError(Exception):
    pass


class UnreachablePoseError(KinematicsError):
    pass


class SingularPoseError(KinematicsError):
    pass


class NoConvergenceError(KinematicsError):
    pass


class AmbiguousBranchError(KinematicsError):
    pass


# ---------------------------------------------------------------------------
# Follower ring robot


@dataclass
class RsrGeometry:
    """Anchor layout of the follower. Lengths in meters.

    fixed_anchors: per-arm anchor on the fixed ring (world frame), rows.
    moving_anchors: per-arm anchor on the moving ring (body frame), rows.
    rotary_axes: first (active) universal-joint axis per arm, unit rows.
    """

    fixed_anchors: np.ndarray  # (3, 3)
    moving_anchors: np.ndarray  # (3, 3)
    rotary_axes: np.ndarray  # (3, 3)
    actuator_min: float
    actuator_max: float
    arm_v: np.ndarray = field(init=False)  # zero-plane direction per arm
    arm_w: np.ndarray = field(init=False)  # in-plane quadrature direction

    def __post_init__(self) -> None:
        self.fixed_anchors = np.asarray(self.fixed_anchors, dtype=float)
        self.moving_anchors = np.asarray(self.moving_anchors, dtype=float)
        self.rotary_axes = np.asarray(self.rotary_axes, dtype=float)
        if self.actuator_min >= self.actuator_max:
            raise ValueError("actuator_min must be < actuator_max")
        for name, anchors in (("fixed", self.fixed_anchors), ("moving", self.moving_anchors)):
            spread = np.cross(anchors[1] - anchors[0], anchors[2] - anchors[0])
            if np.linalg.norm(spread) < 1e-12:
                raise ValueError(f"{name} anchors are collinear")
        v_rows = []
        w_rows = []
        for u in self.rotary_axes:
            u = unit(u)
            ref = np.array([0.0, 0.0, 1.0])
            if abs(float(ref @ u)) > 1.0 - 1e-6:
                ref = np.array([1.0, 0.0, 0.0])
            v = unit(ref - (ref @ u) * u)
            v_rows.append(v)
            w_rows.append(np.cross(u, v))
        self.arm_v = np.array(v_rows)
        self.arm_w = np.array(w_rows)
        # Plain-float copies for the per-tick scalar solvers.
        self._flat_arms = tuple(
            (
                tuple(self.fixed_anchors[i].tolist()),
                tuple(self.moving_anchors[i].tolist()),
                tuple(self.arm_v[i].tolist()),
                tuple(self.arm_w[i].tolist()),
            )
            for i in range(3)
        )


@dataclass(frozen=True, eq=False)
class RsrJointState:
    d: np.ndarray  # (3,) actuator lengths, m
    theta: np.ndarray  # (3,) active rotary angles, rad

    def copy(self) -> "RsrJointState":
        return RsrJointState(self.d.copy(), self.theta.copy())


def _leg_vectors(pose: Pose, geom: RsrGeometry) -> np.ndarray:
    return pose.position + geom.moving_anchors @ pose.rotation.T - geom.fixed_anchors


def _leg_angles(legs: np.ndarray, geom: RsrGeometry) -> np.ndarray:
    x = np.einsum("ij,ij->i", legs, geom.arm_v)
    y = np.einsum("ij,ij->i", legs, geom.arm_w)
    return np.arctan2(y, x)


def rsr_inverse_kinematics(pose: Pose, geom: RsrGeometry) -> RsrJointState:
    """Actuator lengths and rotary angles placing the moving ring at ``pose``.

    Raises UnreachablePoseError when a leg length leaves the actuator range
    and SingularPoseError when a leg aligns with its rotary axis (the angle
    is then undefined). Scalar math: this runs every simulation tick.
    """
    p = pose.position
    r = pose.rotation
    px, py, pz = float(p[0]), float(p[1]), float(p[2])
    r00, r01, r02 = float(r[0, 0]), float(r[0, 1]), float(r[0, 2])
    r10, r11, r12 = float(r[1, 0]), float(r[1, 1]), float(r[1, 2])
    r20, r21, r22 = float(r[2, 0]), float(r[2, 1]), float(r[2, 2])
    d = [0.0, 0.0, 0.0]
    theta = [0.0, 0.0, 0.0]
    out_of_range = []
    singular = []
    for i, ((ax, ay, az), (bx, by, bz), (vx, vy, vz), (wx, wy, wz)) in enumerate(geom._flat_arms):
        lx = px + r00 * bx + r01 * by + r02 * bz - ax
        ly = py + r10 * bx + r11 * by + r12 * bz - ay
        lz = pz + r20 * bx + r21 * by + r22 * bz - az
        ln = math.sqrt(lx * lx + ly * ly + lz * lz)
        d[i] = ln
        if ln < geom.actuator_min or ln > geom.actuator_max:
            out_of_range.append(i)
            continue
        xv = lx * vx + ly * vy + lz * vz
        yw = lx * wx + ly * wy + lz * wz
        if math.hypot(xv, yw) < 1e-10:
            singular.append(i)
            continue
        theta[i] = math.atan2(yw, xv)
    if out_of_range:
        arms = ", ".join(map(str, out_of_range))
        raise UnreachablePoseError(
            f"actuator length out of range on arm(s) {arms}: "
            f"d={[round(v, 4) for v in d]} range=[{geom.actuator_min}, {geom.actuator_max}]"
        )
    if singular:
        arms = ", ".join(map(str, singular))
        raise SingularPoseError(f"leg parallel to rotary axis on arm(s) {arms}")
    return RsrJointState(np.array(d), np.array(theta))


def _solve6(jac: list[list[float]], res: list[float]) -> list[float]:
    """Solve jac @ x = -res by Gaussian elimination with partial pivoting."""
    m = [jac[i] + [-res[i]] for i in range(6)]
    for col in range(6):
        piv = max(range(col, 6), key=lambda k: abs(m[k][col]))
        if abs(m[piv][col]) < 1e-300:
            raise AmbiguousBranchError("singular Jacobian")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        prow = m[col]
        pval = prow[col]
        for k in range(col + 1, 6):
            row = m[k]
            f = row[col] / pval
            if f != 0.0:
                for c in range(col, 7):
                    row[c] -= f * prow[c]
    x = [0.0] * 6
    for k in range(5, -1, -1):
        s = m[k][6]
        row = m[k]
        for c in range(k + 1, 6):
            s -= row[c] * x[c]
        x[k] = s / row[k]
    return x


def rsr_forward_kinematics(
    joints: RsrJointState,
    geom: RsrGeometry,
    guess: Pose,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> tuple[Pose, int]:
    """Newton solve of the ring pose from joint values; returns (pose, iterations).

    The six residuals are per-arm length error |l_i| - d_i and wrapped angle
    error theta(l_i) - theta_i. The pose update is a world-frame twist
    increment with an analytic Jacobian. Raises NoConvergenceError past
    ``max_iter`` and AmbiguousBranchError when the Jacobian turns
    numerically singular (condition number above 1e12).

    Scalar math throughout: this reconstructs the ring pose every tick and
    numpy call overhead would dominate at this problem size.
    """
    g = guess.position
    px, py, pz = float(g[0]), float(g[1]), float(g[2])
    r = guess.rotation
    r00, r01, r02 = float(r[0, 0]), float(r[0, 1]), float(r[0, 2])
    r10, r11, r12 = float(r[1, 0]), float(r[1, 1]), float(r[1, 2])
    r20, r21, r22 = float(r[2, 0]), float(r[2, 1]), float(r[2, 2])
    d_target = joints.d.tolist()
    t_target = joints.theta.tolist()
    two_pi = 2.0 * math.pi

    for it in range(1, max_iter + 1):
        jac = [[0.0] * 6 for _ in range(6)]
        res = [0.0] * 6
        worst = 0.0
        for i, ((ax, ay, az), (bx, by, bz), (vx, vy, vz), (wx, wy, wz)) in enumerate(
            geom._flat_arms
        ):
            mx = r00 * bx + r01 * by + r02 * bz
            my = r10 * bx + r11 * by + r12 * bz
            mz = r20 * bx + r21 * by + r22 * bz
            lx = px + mx - ax
            ly = py + my - ay
            lz = pz + mz - az
            lsq = lx * lx + ly * ly + lz * lz
            if lsq < 1e-24:
                raise AmbiguousBranchError("leg length collapsed to zero during solve")
            ln = math.sqrt(lsq)
            ux, uy, uz = lx / ln, ly / ln, lz / ln
            xv = lx * vx + ly * vy + lz * vz
            yw = lx * wx + ly * wy + lz * wz
            planar = xv * xv + yw * yw
            if planar < 1e-20:
                raise AmbiguousBranchError("leg aligned with rotary axis during solve")
            err_len = ln - d_target[i]
            err_ang = math.atan2(yw, xv) - t_target[i]
            if err_ang > math.pi:
                err_ang -= two_pi
            elif err_ang <= -math.pi:
                err_ang += two_pi
            res[i] = err_len
            res[3 + i] = err_ang
            worst = max(worst, abs(err_len), abs(err_ang))
            gx = (xv * wx - yw * vx) / planar
            gy = (xv * wy - yw * vy) / planar
            gz = (xv * wz - yw * vz) / planar
            jac[i] = [ux, uy, uz, my * uz - mz * uy, mz * ux - mx * uz, mx * uy - my * ux]
            jac[3 + i] = [gx, gy, gz, my * gz - mz * gy, mz * gx - mx * gz, mx * gy - my * gx]

        if worst < tol:
            rot = renormalized(
                np.array([[r00, r01, r02], [r10, r11, r12], [r20, r21, r22]])
            )
            return Pose(np.array([px, py, pz]), rot), it - 1

        if it >= 4 and np.linalg.cond(np.array(jac)) > 1e12:
            raise AmbiguousBranchError("Jacobian condition number above 1e12")
        step = _solve6(jac, res)
        px += step[0]
        py += step[1]
        pz += step[2]
        sx, sy, sz = step[3], step[4], step[5]
        angle = math.sqrt(sx * sx + sy * sy + sz * sz)
        if angle > 0.0:
            kx, ky, kz = sx / angle, sy / angle, sz / angle
            c = math.cos(angle)
            s = math.sin(angle)
            cc = 1.0 - c
            e00 = c + kx * kx * cc
            e01 = kx * ky * cc - kz * s
            e02 = kx * kz * cc + ky * s
            e10 = ky * kx * cc + kz * s
            e11 = c + ky * ky * cc
            e12 = ky * kz * cc - kx * s
            e20 = kz * kx * cc - ky * s
            e21 = kz * ky * cc + kx * s
            e22 = c + kz * kz * cc
            n00 = e00 * r00 + e01 * r10 + e02 * r20
            n01 = e00 * r01 + e01 * r11 + e02 * r21
            n02 = e00 * r02 + e01 * r12 + e02 * r22
            n10 = e10 * r00 + e11 * r10 + e12 * r20
            n11 = e10 * r01 + e11 * r11 + e12 * r21
            n12 = e10 * r02 + e11 * r12 + e12 * r22
            n20 = e20 * r00 + e21 * r10 + e22 * r20
            n21 = e20 * r01 + e21 * r11 + e22 * r21
            n22 = e20 * r02 + e21 * r12 + e22 * r22
            r00, r01, r02 = n00, n01, n02
            r10, r11, r12 = n10, n11, n12
            r20, r21, r22 = n20, n21, n22
    raise NoConvergenceError(f"no convergence after {max_iter} iterations")


# ---------------------------------------------------------------------------
# Leader haptic device

ARM_AZIMUTHS = np.deg2rad([90.0, 210.0, 330.0])


@dataclass(frozen=True)
class HcGeometry:
    """Delta + wrist dimensions of the leader device, meters."""

    base_radius: float
    effector_radius: float
    upper_arm: float
    forearm: float
    wrist_axis_order: str = "xyz"  # extrinsic, fixed world axes

    def __post_init__(self) -> None:
        for name in ("base_radius", "effector_radius", "upper_arm", "forearm"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.wrist_axis_order != "xyz":
            raise ValueError("only the extrinsic xyz wrist order is supported")


@dataclass(frozen=True, eq=False)
class HcJointState:
    theta: np.ndarray  # (6,) three shoulder + three wrist angles, rad
    grip: float = 0.0  # grasp scalar in [0, 1], passed through untouched


_ARM_RADIAL = tuple((math.cos(a), math.sin(a)) for a in ARM_AZIMUTHS)


def _delta_arm_coeffs(position: Vec3, geom: HcGeometry, arm: int) -> tuple[float, float, float]:
    rx, ry = _ARM_RADIAL[arm]
    px, py, pz = float(position[0]), float(position[1]), float(position[2])
    dx = px * rx + py * ry + geom.effector_radius - geom.base_radius
    dy = -px * ry + py * rx
    e = 2.0 * geom.upper_arm * pz
    f = -2.0 * geom.upper_arm * dx
    g = geom.forearm**2 - geom.upper_arm**2 - dx * dx - dy * dy - pz * pz
    return e, f, g


def hc_delta_inverse_kinematics(position: Vec3, geom: HcGeometry) -> np.ndarray:
    """Shoulder angles placing the delta effector center at ``position``.

    Per arm this reduces to E sin(t) + F cos(t) = G, solved through the
    tangent half-angle quadratic; of the two roots the elbow-out branch
    (larger cos, elbow farther from the device axis) is returned.
    Positive angles swing the upper arm below the horizontal.
    """
    angles = np.empty(3)
    for arm in range(3):
        e, f, g = _delta_arm_coeffs(position, geom, arm)
        disc = e * e + f * f - g * g
        if disc < 0.0:
            raise UnreachablePoseError(f"delta arm {arm} cannot reach the target")
        root = math.sqrt(disc)
        a = g + f
        candidates = []
        if abs(a) < 1e-14:
            if abs(e) < 1e-14:
                raise SingularPoseError(f"delta arm {arm} is at a fold singularity")
            candidates.append(2.0 * math.atan((g - f) / (2.0 * e)))
        else:
            candidates.append(2.0 * math.atan((e + root) / a))
            candidates.append(2.0 * math.atan((e - root) / a))
        angles[arm] = max(candidates, key=math.cos)
    return angles


def hc_delta_forward_kinematics(shoulders: np.ndarray, geom: HcGeometry) -> Vec3:
    """Sphere-intersection (trilateration) delta forward kinematics.

    Independent of the inverse solution: the effector center lies at the
    lower intersection of three spheres of radius ``forearm`` centered on
    the elbow points shifted inward by the effector radius.
    """
    centers = np.empty((3, 3))
    for arm in range(3):
        phi = ARM_AZIMUTHS[arm]
        radial = np.array([math.cos(phi), math.sin(phi), 0.0])
        elbow = geom.base_radius * radial + geom.upper_arm * (
            math.cos(float(shoulders[arm])) * radial
            - math.sin(float(shoulders[arm])) * np.array([0.0, 0.0, 1.0])
        )
        centers[arm] = elbow - geom.effector_radius * radial
    s1, s2, s3 = centers
    ex = unit(s2 - s1)
    span = float(np.linalg.norm(s2 - s1))
    i = float(ex @ (s3 - s1))
    ey = unit(s3 - s1 - i * ex)
    ez = np.cross(ex, ey)
    j = float(ey @ (s3 - s1))
    if abs(j) < 1e-12:
        raise SingularPoseError("sphere centers are collinear")
    xx = span / 2.0
    yy = (i * i + j * j - 2.0 * i * xx) / (2.0 * j)
    hh = geom.forearm**2 - xx * xx - yy * yy
    if hh < 0.0:
        raise UnreachablePoseError("spheres do not intersect")
    base = s1 + xx * ex + yy * ey
    lift = math.sqrt(hh) * ez
    lo, hi = base - lift, base + lift
    return lo if lo[2] <= hi[2] else hi  # lower branch: effector hangs below


def hc_wrist_angles(orientation: np.ndarray) -> np.ndarray:
    """Three wrist joint angles reproducing ``orientation``.

    The serial wrist axes follow the package Euler convention, so this is
    the extrinsic X-Y-Z decomposition; the gimbal-lock branch of
    rotation_to_euler applies unchanged.
    """
    e = rotation_to_euler(orientation)
    return np.array([e.alpha, e.beta, e.gamma])


def hc_joint_state(pose: Pose, geom: HcGeometry, grip: float = 0.0) -> HcJointState:
    shoulders = hc_delta_inverse_kinematics(pose.position, geom)
    wrist = hc_wrist_angles(pose.rotation)
    return HcJointState(np.concatenate([shoulders, wrist]), grip)


# ---------------------------------------------------------------------------
# Link/joint graph descriptions (structural bookkeeping, not the math above)

JOINT_TYPES = ("revolute", "prismatic", "universal", "spherical")


@dataclass(frozen=True)
class Joint:
    name: str
    joint_type: str
    parent: str
    child: str
    active: bool = False
    local_frame: Pose = field(default_factory=Pose.identity)


@dataclass(frozen=True)
class KinematicModel:
    name: str
    links: tuple[str, ...]
    joints: tuple[Joint, ...]


_FOLLOWER_ARM_CHAIN = ("revolute", "revolute", "prismatic", "spherical")


def build_follower_model(geom: RsrGeometry) -> KinematicModel:
    links = ["fixed_ring", "moving_ring"]
    joints = []
    for arm in range(3):
        yoke = f"arm{arm}_yoke"
        lower = f"arm{arm}_lower"
        upper = f"arm{arm}_upper"
        links += [yoke, lower, upper]
        anchor = Pose(geom.fixed_anchors[arm], np.eye(3))
        joints += [
            Joint(f"arm{arm}_rotary", "revolute", "fixed_ring", yoke, True, anchor),
            Joint(f"arm{arm}_pivot", "revolute", yoke, lower),
            Joint(f"arm{arm}_slide", "prismatic", lower, upper, True),
            Joint(f"arm{arm}_ball", "spherical", upper, "moving_ring",
                  local_frame=Pose(geom.moving_anchors[arm], np.eye(3))),
        ]
    return KinematicModel("follower", tuple(links), tuple(joints))


def build_leader_model(geom: HcGeometry) -> KinematicModel:
    links = ["base_frame", "effector_plate", "wrist_roll_link", "wrist_pitch_link",
             "handle", "grip_paddle"]
    joints = []
    for arm in range(3):
        upper = f"arm{arm}_upper"
        rod_a = f"arm{arm}_rod_a"
        rod_b = f"arm{arm}_rod_b"
        links += [upper, rod_a, rod_b]
        anchor = Pose(geom.base_radius * np.array(
            [math.cos(ARM_AZIMUTHS[arm]), math.sin(ARM_AZIMUTHS[arm]), 0.0]), np.eye(3))
        joints += [
            Joint(f"arm{arm}_shoulder", "revolute", "base_frame", upper, True, anchor),
            Joint(f"arm{arm}_elbow_a", "universal", upper, rod_a),
            Joint(f"arm{arm}_elbow_b", "universal", upper, rod_b),
            Joint(f"arm{arm}_plate_a", "universal", rod_a, "effector_plate"),
            Joint(f"arm{arm}_plate_b", "universal", rod_b, "effector_plate"),
        ]
    joints += [
        Joint("wrist_roll", "revolute", "effector_plate", "wrist_roll_link", True),
        Joint("wrist_pitch", "revolute", "wrist_roll_link", "wrist_pitch_link", True),
        Joint("wrist_yaw", "revolute", "wrist_pitch_link", "handle", True),
        Joint("grip", "revolute", "handle", "grip_paddle"),
    ]
    return KinematicModel("leader", tuple(links), tuple(joints))


def validate_model(model: KinematicModel) -> list[str]:
    """Structural diagnostics; an empty list means the graph checks out."""
    issues: list[str] = []
    link_set = set(model.links)
    for j in model.joints:
        if j.joint_type not in JOINT_TYPES:
            issues.append(f"joint {j.name}: unknown type {j.joint_type!r}")
        for end, link in (("parent", j.parent), ("child", j.child)):
            if link not in link_set:
                issues.append(f"joint {j.name}: {end} link {link!r} is not declared")

    children = {}
    for j in model.joints:
        children.setdefault(j.parent, []).append(j)

    if model.name == "follower":
        for arm in range(3):
            chain_types = []
            link = "fixed_ring"
            for hop in range(4):
                nxt = [j for j in model.joints
                       if j.parent == link and j.name.startswith(f"arm{arm}_")]
                if not nxt:
                    expected = _FOLLOWER_ARM_CHAIN[hop]
                    issues.append(f"arm {arm}: missing {expected} joint after link {link!r}")
                    break
                chain_types.append(nxt[0].joint_type)
                link = nxt[0].child
            else:
                if tuple(chain_types) != _FOLLOWER_ARM_CHAIN:
                    issues.append(
                        f"arm {arm}: joint chain {chain_types} != {list(_FOLLOWER_ARM_CHAIN)}")
                if link != "moving_ring":
                    issues.append(f"arm {arm}: chain does not close on the moving ring")
    elif model.name == "leader":
        for arm in range(3):
            arm_joints = [j for j in model.joints if j.name.startswith(f"arm{arm}_")]
            shoulders = [j for j in arm_joints if j.joint_type == "revolute" and j.active]
            if len(shoulders) != 1:
                issues.append(f"arm {arm}: expected exactly one active shoulder joint")
            rods = [j for j in arm_joints if j.child == "effector_plate"]
            if len(rods) != 2:
                issues.append(f"arm {arm}: parallelogram does not close on the effector plate")
        wrist = [j for j in model.joints if j.name.startswith("wrist_")]
        if [j.joint_type for j in wrist] != ["revolute"] * 3 or not all(j.active for j in wrist):
            issues.append("wrist: expected three active revolute joints in series")
        if not any(j.name == "grip" for j in model.joints):
            issues.append("missing grip joint")
    else:
        issues.append(f"unknown model name {model.name!r}")
    return issues
