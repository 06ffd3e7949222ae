"""Haptic teleoperation simulator for robot-assisted femur fracture reduction."""

from .collision import BoneSegment, ContactResult, Obb, sat_contact, scene_contacts
from .engine import (
    DeviceInput,
    DriveParams,
    Scene,
    SimState,
    TrajectorySample,
    deviation_report,
    initial_state,
    run_script,
    step,
)
from .forces import ForceParams, ForceResult
from .geometry import EulerAngles, Pose, Twist
from .kinematics import (
    HcGeometry,
    HcJointState,
    RsrGeometry,
    RsrJointState,
    rsr_forward_kinematics,
    rsr_inverse_kinematics,
)
from .teleop import ScaleFactor, ScalingConfig, TeleopState
from .sceneio import load_scene, load_scene_text

__version__ = "0.1.0"

__all__ = [
    "BoneSegment",
    "ContactResult",
    "DeviceInput",
    "DriveParams",
    "EulerAngles",
    "ForceParams",
    "ForceResult",
    "HcGeometry",
    "HcJointState",
    "Obb",
    "Pose",
    "RsrGeometry",
    "RsrJointState",
    "Scene",
    "ScaleFactor",
    "ScalingConfig",
    "SimState",
    "TeleopState",
    "TrajectorySample",
    "Twist",
    "deviation_report",
    "initial_state",
    "load_scene",
    "load_scene_text",
    "rsr_forward_kinematics",
    "rsr_inverse_kinematics",
    "run_script",
    "sat_contact",
    "scene_contacts",
    "step",
]
