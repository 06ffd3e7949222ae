"""Scene configuration files and the CSV trajectory/script formats.

Scene files are YAML with SI units (meters, seconds, newtons) except where
a key is suffixed ``_deg``. Trajectory and script CSVs use the display
units shared with the wire protocol: millimeters and degrees. Trajectory
floats are written with ``repr`` so re-reading them is lossless and
byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import math
import os
from typing import Iterable, Sequence

import numpy as np
import yaml

from .collision import Obb
from .engine import DeviceInput, DriveParams, FaultFlags, Scene, TrajectorySample
from .fluoro import Capsule, CArmPose, FluoroConfig, MaterialOpacity
from .forces import ForceParams
from .geometry import EulerAngles, Pose, Twist, euler_to_rotation, rotation_to_euler
from .kinematics import HcGeometry, RsrGeometry
from .teleop import ScalingConfig


class SceneParseError(Exception):
    pass


class SceneValidationError(Exception):
    pass


DEFAULT_SCENE_NAME = "femur_default.yaml"
SCENE_DIR_ENV = "FRACSIM_SCENE_DIR"


def default_scene_dir() -> str:
    return os.environ.get(SCENE_DIR_ENV, "scenes")


def default_scene_path() -> str:
    return os.path.join(default_scene_dir(), DEFAULT_SCENE_NAME)


# ---------------------------------------------------------------------------
# Scene files


def _require(node: dict, key: str, where: str):
    if key not in node:
        raise SceneValidationError(f"{where}: missing field {key!r}")
    return node[key]


def _as_float(value, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise SceneValidationError(f"{where}: expected a number, got {value!r}") from exc


def _as_vec(value, where: str, n: int = 3) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SceneValidationError(f"{where}: expected a list of {n} numbers")
    return np.array([_as_float(v, where) for v in value])


def _as_pose(node, where: str) -> Pose:
    if not isinstance(node, dict):
        raise SceneValidationError(f"{where}: expected a mapping")
    pos = _as_vec(_require(node, "position", where), f"{where}.position")
    eul = _as_vec(node.get("euler_deg", [0.0, 0.0, 0.0]), f"{where}.euler_deg")
    rot = euler_to_rotation(EulerAngles(*np.deg2rad(eul)))
    return Pose(pos, rot)


def _as_obb(node, where: str) -> Obb:
    if not isinstance(node, dict):
        raise SceneValidationError(f"{where}: expected a mapping")
    label = str(node.get("label", where))
    center = _as_vec(_require(node, "center", where), f"{where}.center")
    half = _as_vec(_require(node, "half_extents", where), f"{where}.half_extents")
    eul = _as_vec(node.get("euler_deg", [0.0, 0.0, 0.0]), f"{where}.euler_deg")
    rot = euler_to_rotation(EulerAngles(*np.deg2rad(eul)))
    return Obb(center=center, axes=rot.T, half_extents=half, label=label)


def load_scene_text(text: str, name: str = "scene") -> Scene:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SceneParseError(f"{name}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SceneParseError(f"{name}: top level must be a mapping")

    dt = _as_float(_require(doc, "dt", "scene"), "dt")
    if dt <= 0.0:
        raise SceneValidationError("dt: must be > 0")

    tele = doc.get("teleop", {})
    try:
        scaling = ScalingConfig(
            max_v=_as_float(tele.get("max_v", 0.05), "teleop.max_v"),
            max_w=_as_float(tele.get("max_w", 0.5), "teleop.max_w"),
        )
    except ValueError as exc:
        raise SceneValidationError(f"teleop: {exc}") from exc

    drives = doc.get("drives", {})

    def drive(which: str) -> DriveParams:
        node = drives.get(which, {})
        params = DriveParams(
            stiffness=_as_float(node.get("stiffness", 5000.0), f"drives.{which}.stiffness"),
            damping=_as_float(node.get("damping", 140.0), f"drives.{which}.damping"),
            force_limit=_as_float(node.get("force_limit", 200.0), f"drives.{which}.force_limit"),
        )
        try:
            params.validate()
        except ValueError as exc:
            raise SceneValidationError(f"drives.{which}: {exc}") from exc
        return params

    contact = doc.get("contact", {})
    f_max = contact.get("f_max", 30.0)
    force_params = ForceParams(
        spring_k=_as_float(contact.get("spring_k", 1000.0), "contact.spring_k"),
        damping_c=_as_float(contact.get("damping_c", 10.0), "contact.damping_c"),
        f_max=None if f_max is None else _as_float(f_max, "contact.f_max"),
    )
    try:
        force_params.validate()
    except ValueError as exc:
        raise SceneValidationError(f"contact: {exc}") from exc

    fol = _require(doc, "follower", "scene")
    try:
        rsr = RsrGeometry(
            fixed_anchors=np.array(
                [_as_vec(v, "follower.fixed_anchors") for v in _require(fol, "fixed_anchors", "follower")]
            ),
            moving_anchors=np.array(
                [_as_vec(v, "follower.moving_anchors") for v in _require(fol, "moving_anchors", "follower")]
            ),
            rotary_axes=np.array(
                [_as_vec(v, "follower.rotary_axes") for v in _require(fol, "rotary_axes", "follower")]
            ),
            actuator_min=_as_float(_require(fol, "actuator_min", "follower"), "follower.actuator_min"),
            actuator_max=_as_float(_require(fol, "actuator_max", "follower"), "follower.actuator_max"),
        )
    except ValueError as exc:
        raise SceneValidationError(f"follower: {exc}") from exc
    rsr_home = _as_pose(_require(fol, "home", "follower"), "follower.home")

    led = _require(doc, "leader", "scene")
    try:
        hc = HcGeometry(
            base_radius=_as_float(_require(led, "base_radius", "leader"), "leader.base_radius"),
            effector_radius=_as_float(
                _require(led, "effector_radius", "leader"), "leader.effector_radius"
            ),
            upper_arm=_as_float(_require(led, "upper_arm", "leader"), "leader.upper_arm"),
            forearm=_as_float(_require(led, "forearm", "leader"), "leader.forearm"),
        )
    except ValueError as exc:
        raise SceneValidationError(f"leader: {exc}") from exc
    hc_home = _as_pose(_require(led, "home", "leader"), "leader.home")

    bones = _require(doc, "bones", "scene")
    proximal = tuple(
        _as_obb(node, f"bones.proximal[{i}]")
        for i, node in enumerate(_require(bones, "proximal", "bones"))
    )
    distal = tuple(
        _as_obb(node, f"bones.distal[{i}]")
        for i, node in enumerate(_require(bones, "distal", "bones"))
    )

    thigh = None
    if doc.get("thigh") is not None:
        tnode = doc["thigh"]
        thigh = Capsule(
            p0=_as_vec(_require(tnode, "p0", "thigh"), "thigh.p0"),
            p1=_as_vec(_require(tnode, "p1", "thigh"), "thigh.p1"),
            radius=_as_float(_require(tnode, "radius", "thigh"), "thigh.radius"),
            label="thigh",
        )
        if thigh.radius <= 0.0:
            raise SceneValidationError("thigh.radius: must be > 0")

    fl = doc.get("fluoro", {})
    try:
        fluoro_cfg = FluoroConfig(
            width=int(fl.get("width", 512)),
            height=int(fl.get("height", 512)),
            mm_per_px=_as_float(fl.get("mm_per_px", 0.5), "fluoro.mm_per_px"),
        )
    except ValueError as exc:
        raise SceneValidationError(f"fluoro: {exc}") from exc
    op = fl.get("opacity", {})
    opacity = MaterialOpacity(
        bone=_as_float(op.get("bone", 0.8), "fluoro.opacity.bone"),
        thigh=_as_float(op.get("thigh", 0.1), "fluoro.opacity.thigh"),
    )
    carm_node = fl.get("carm")
    if carm_node is None:
        carm_home = CArmPose.frontal()
    else:
        pose = _as_pose(
            {"position": carm_node.get("center", [0, 0, 0]),
             "euler_deg": carm_node.get("euler_deg", [0, 0, 0])},
            "fluoro.carm",
        )
        carm_home = CArmPose(pose.rotation, pose.position)

    scene = Scene(
        dt=dt,
        scaling=scaling,
        linear_drive=drive("linear"),
        rotary_drive=drive("rotary"),
        force_params=force_params,
        rsr=rsr,
        hc=hc,
        rsr_home=rsr_home,
        hc_home=hc_home,
        proximal_obbs=proximal,
        distal_templates=distal,
        thigh=thigh,
        fluoro=fluoro_cfg,
        opacity=opacity,
        carm_home=carm_home,
        perfect_tracking=bool(doc.get("perfect_tracking", False)),
        strict_constraint=bool(doc.get("strict_constraint", False)),
        name=str(doc.get("name", name)),
    )
    try:
        scene.validate()
    except (ValueError, Exception) as exc:  # noqa: BLE001 - surface which invariant failed
        if isinstance(exc, (SceneParseError, SceneValidationError)):
            raise
        raise SceneValidationError(str(exc)) from exc
    return scene


def load_scene(path: str) -> Scene:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file {path!r}: {exc}") from exc
    return load_scene_text(text, name=os.path.basename(path))


def scene_to_dict(scene: Scene) -> dict:
    """Scene summary for clients, in wire units (mm, degrees)."""

    def pose_dict(pose: Pose) -> dict:
        e = rotation_to_euler(pose.rotation)
        return {
            "position_mm": [float(v) * 1000.0 for v in pose.position],
            "euler_deg": [math.degrees(a) for a in (e.alpha, e.beta, e.gamma)],
        }

    def obb_dict(box: Obb) -> dict:
        e = rotation_to_euler(box.axes.T)
        return {
            "label": box.label,
            "center_mm": [float(v) * 1000.0 for v in box.center],
            "euler_deg": [math.degrees(a) for a in (e.alpha, e.beta, e.gamma)],
            "half_extents_mm": [float(v) * 1000.0 for v in box.half_extents],
        }

    return {
        "name": scene.name,
        "dt": scene.dt,
        "teleop": {"max_v_mm_s": scene.scaling.max_v * 1000.0,
                   "max_w_deg_s": math.degrees(scene.scaling.max_w)},
        "follower": {
            "fixed_anchors_mm": (scene.rsr.fixed_anchors * 1000.0).tolist(),
            "moving_anchors_mm": (scene.rsr.moving_anchors * 1000.0).tolist(),
            "actuator_min_mm": scene.rsr.actuator_min * 1000.0,
            "actuator_max_mm": scene.rsr.actuator_max * 1000.0,
            "home": pose_dict(scene.rsr_home),
        },
        "leader": {"home": pose_dict(scene.hc_home)},
        "proximal_obbs": [obb_dict(b) for b in scene.proximal_obbs],
        "distal_templates": [obb_dict(b) for b in scene.distal_templates],
        "thigh": None if scene.thigh is None else {
            "p0_mm": (scene.thigh.p0 * 1000.0).tolist(),
            "p1_mm": (scene.thigh.p1 * 1000.0).tolist(),
            "radius_mm": scene.thigh.radius * 1000.0,
        },
        "fluoro": {"width": scene.fluoro.width, "height": scene.fluoro.height,
                   "mm_per_px": scene.fluoro.mm_per_px},
    }


# ---------------------------------------------------------------------------
# Trajectory CSV

TRAJECTORY_HEADER = (
    "t,hc_px,hc_py,hc_pz,hc_qa,hc_qb,hc_qg,"
    "rsr_t_px,rsr_t_py,rsr_t_pz,rsr_t_qa,rsr_t_qb,rsr_t_qg,"
    "rsr_a_px,rsr_a_py,rsr_a_pz,rsr_a_qa,rsr_a_qb,rsr_a_qg,"
    "d1,d2,d3,th1,th2,th3,fgx,fgy,fgz,collide"
)


def _pose_fields(pose: Pose) -> list[float]:
    e = rotation_to_euler(pose.rotation)
    return [
        float(pose.position[0]) * 1000.0,
        float(pose.position[1]) * 1000.0,
        float(pose.position[2]) * 1000.0,
        math.degrees(e.alpha),
        math.degrees(e.beta),
        math.degrees(e.gamma),
    ]


def sample_row(sample: TrajectorySample) -> list:
    flags = 0
    for i, hit in enumerate(sample.collision_flags):
        if hit:
            flags |= 1 << i
    return (
        [float(sample.t)]
        + _pose_fields(sample.hc_pose)
        + _pose_fields(sample.rsr_target)
        + _pose_fields(sample.rsr_actual)
        + [float(v) * 1000.0 for v in sample.joints.d]
        + [math.degrees(float(v)) for v in sample.joints.theta]
        + [float(v) for v in sample.f_global]
        + [flags]
    )


def write_trajectory_csv(samples: Sequence[TrajectorySample], path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for s in samples:
            row = sample_row(s)
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")


def read_trajectory_csv(path: str) -> list[TrajectorySample]:
    from .kinematics import RsrJointState

    samples: list[TrajectorySample] = []
    with open(path, encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            def pose(prefix: str) -> Pose:
                pos = np.array([float(row[prefix + c]) for c in ("px", "py", "pz")]) / 1000.0
                eul = [math.radians(float(row[prefix + c])) for c in ("qa", "qb", "qg")]
                return Pose(pos, euler_to_rotation(EulerAngles(*eul)))

            flags = int(row["collide"])
            samples.append(
                TrajectorySample(
                    t=float(row["t"]),
                    hc_pose=pose("hc_"),
                    rsr_target=pose("rsr_t_"),
                    rsr_actual=pose("rsr_a_"),
                    joints=RsrJointState(
                        np.array([float(row[k]) for k in ("d1", "d2", "d3")]) / 1000.0,
                        np.radians([float(row[k]) for k in ("th1", "th2", "th3")]),
                    ),
                    f_global=np.array([float(row[k]) for k in ("fgx", "fgy", "fgz")]),
                    collision_flags=tuple(bool(flags >> i & 1) for i in range(4)),
                    faults=FaultFlags(),
                    fk_iterations=0,
                )
            )
    return samples


# ---------------------------------------------------------------------------
# Device-input script CSV

SCRIPT_HEADER = "t,px,py,pz,qa,qb,qg,engaged,grip"


def write_script_csv(rows: Iterable[tuple[float, DeviceInput]], path: str) -> None:
    """Rows are (time s, input); positions written in mm, angles in degrees."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(SCRIPT_HEADER + "\n")
        for t, dev in rows:
            f = _pose_fields(dev.pose)
            fh.write(
                f"{t:.4f},{f[0]:.4f},{f[1]:.4f},{f[2]:.4f},"
                f"{f[3]:.4f},{f[4]:.4f},{f[5]:.4f},{int(dev.engaged)},{dev.grip:.2f}\n"
            )


def read_script_csv(path: str) -> list[tuple[float, DeviceInput]]:
    rows: list[tuple[float, DeviceInput]] = []
    with open(path, encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "t" not in reader.fieldnames:
            raise SceneParseError(f"script {path!r}: missing header row")
        for line in reader:
            pos = np.array([float(line[k]) for k in ("px", "py", "pz")]) / 1000.0
            eul = [math.radians(float(line[k])) for k in ("qa", "qb", "qg")]
            pose = Pose(pos, euler_to_rotation(EulerAngles(*eul)))
            twist = None
            if "vx" in line and line.get("vx") not in (None, ""):
                twist = Twist(
                    np.array([float(line[k]) for k in ("vx", "vy", "vz")]) / 1000.0,
                    np.radians([float(line[k]) for k in ("wx", "wy", "wz")]),
                )
            rows.append(
                (
                    float(line["t"]),
                    DeviceInput(
                        pose=pose,
                        twist=twist,
                        engaged=bool(int(line.get("engaged", "1") or 1)),
                        grip=float(line.get("grip", "0") or 0.0),
                    ),
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Deviation report output


def write_deviation_csv(report, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,err_t_mm,err_r_deg,ex_mm,ey_mm,ez_mm,ea_deg,eb_deg,eg_deg\n")
        for i in range(len(report.times)):
            vals = (
                [report.times[i], report.translation_mm[i], report.rotation_deg[i]]
                + list(report.per_axis_translation_mm[i])
                + list(report.per_axis_rotation_deg[i])
            )
            fh.write(",".join(repr(float(v)) for v in vals))
            fh.write("\n")
