"""Generators for the device-input scripts shipped with the repo.

Each generator returns dense (t, DeviceInput) rows on the dt grid. The
motions live inside the leader device's workspace; the push script relies
on zero-order hold for its long steady phase.
"""

from __future__ import annotations

import math

import numpy as np

from .engine import DeviceInput, Scene
from .geometry import EulerAngles, Pose, euler_to_rotation

Script = list[tuple[float, DeviceInput]]

# (amplitude m or rad, frequency Hz) per axis; picked so speeds stay under
# the default teleop limits and servo lag stays inside the deviation bound.
SINUSOID_TRANSLATION = ((0.018, 0.20), (0.015, 0.15), (0.012, 0.25))
SINUSOID_ROTATION = ((math.radians(6.0), 0.12), (math.radians(5.0), 0.17), (math.radians(6.0), 0.10))


def _offset_pose(home: Pose, dpos: np.ndarray, deuler: np.ndarray) -> Pose:
    rot = euler_to_rotation(EulerAngles(*deuler)) @ home.rotation
    return Pose(home.position + dpos, rot)


def sinusoid_6dof_script(scene: Scene, duration: float = 20.0) -> Script:
    """Simultaneous sinusoids on all six axes, zero phase (starts at home)."""
    dt = scene.dt
    n = int(round(duration / dt))
    rows: Script = []
    for k in range(n + 1):
        t = k * dt
        dpos = np.array([a * math.sin(2.0 * math.pi * f * t) for a, f in SINUSOID_TRANSLATION])
        deul = np.array([a * math.sin(2.0 * math.pi * f * t) for a, f in SINUSOID_ROTATION])
        rows.append((t, DeviceInput(_offset_pose(scene.hc_home, dpos, deul))))
    return rows


def push_overlap_script(
    scene: Scene,
    duration: float = 60.0,
    travel: float = 0.18,
    speed: float | None = None,
) -> Script:
    """Drive the distal fragment into the proximal bone and hold.

    Ramp up along +z at the teleop speed limit until ``travel`` is reached
    (well past the follower workspace pin), then hold to the end; the hold
    is two sparse rows resolved by zero-order hold.
    """
    dt = scene.dt
    v = scene.scaling.max_v if speed is None else speed
    ramp_ticks = int(round(travel / (v * dt)))
    rows: Script = []
    for k in range(ramp_ticks + 1):
        t = k * dt
        dpos = np.array([0.0, 0.0, min(travel, v * t)])
        rows.append((t, DeviceInput(_offset_pose(scene.hc_home, dpos, np.zeros(3)))))
    end_tick = int(round(duration / dt))
    if end_tick > ramp_ticks:
        hold = DeviceInput(_offset_pose(scene.hc_home, np.array([0.0, 0.0, travel]), np.zeros(3)))
        rows.append((end_tick * dt, hold))
    return rows


def clamp_adversarial_script(scene: Scene, duration: float = 12.0) -> Script:
    """Clamp stress script: a slow segment (scale must stay exactly 1), then
    translation and rotation oscillations peaking near 10x the speed limits."""
    dt = scene.dt
    max_v = scene.scaling.max_v
    max_w = scene.scaling.max_w
    slow_end = duration / 3.0
    n = int(round(duration / dt))

    # Oscillation sized for ~10x the limits at workspace-safe amplitudes.
    amp_fast = 0.040
    f_fast = 10.0 * max_v / (2.0 * math.pi * amp_fast)
    amp_rot = math.radians(40.0)
    f_rot = 10.0 * max_w / (2.0 * math.pi * amp_rot)

    rows: Script = []
    for k in range(n + 1):
        t = k * dt
        if t < slow_end:
            dpos = np.array([0.010 * math.sin(2.0 * math.pi * 0.1 * t), 0.0, 0.0])
            deul = np.zeros(3)
        else:
            ts = t - slow_end
            dpos = np.array(
                [
                    amp_fast * math.sin(2.0 * math.pi * f_fast * ts),
                    0.5 * amp_fast * math.sin(2.0 * math.pi * f_fast * ts + 1.3),
                    0.0,
                ]
            )
            deul = np.array([0.0, 0.0, amp_rot * math.sin(2.0 * math.pi * f_rot * ts)])
        rows.append((t, DeviceInput(_offset_pose(scene.hc_home, dpos, deul))))
    return rows


SHIPPED_SCRIPTS = {
    "sinusoid_6dof.csv": sinusoid_6dof_script,
    "push_overlap.csv": push_overlap_script,
    "clamp_adversarial.csv": clamp_adversarial_script,
}


def write_shipped_scripts(scene: Scene, out_dir: str) -> list[str]:
    import os

    from .sceneio import write_script_csv

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fname, gen in SHIPPED_SCRIPTS.items():
        path = os.path.join(out_dir, fname)
        write_script_csv(gen(scene), path)
        written.append(path)
    return written
