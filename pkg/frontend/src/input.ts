// Virtual 6-DOF device driven by mouse/keyboard (or gamepad axes): the
// desk-scale stand-in for a grounded haptic handle. Pointer drags move the
// device in the view plane, modifier-drags rotate it, the wheel moves it
// along the view axis. Emission is rate limited and carries the twist the
// client measured between emits.

import { DeviceInputMsg, DevicePose, deviceInputMsg } from "./protocol.js";

export type InputMode = "translate" | "rotate";

export interface InputConfig {
  mmPerPixel: number; // drag scale
  rotDegPerPixel: number;
  scrollMmPerTick: number;
  maxRateHz: number;
}

export const DEFAULT_INPUT: InputConfig = {
  mmPerPixel: 0.1,
  rotDegPerPixel: 0.2,
  scrollMmPerTick: 1.0,
  maxRateHz: 120,
};

// View plane mapping (camera looks along -y at the scene): screen right is
// world +x, screen up is world +z, the wheel pushes along world y.
export function dragToTranslationMm(
  dxPx: number,
  dyPx: number,
  cfg: InputConfig,
): [number, number, number] {
  return [dxPx * cfg.mmPerPixel, 0, -dyPx * cfg.mmPerPixel];
}

export function dragToRotationDeg(
  dxPx: number,
  dyPx: number,
  cfg: InputConfig,
): [number, number, number] {
  // Horizontal drag yaws about world z, vertical drag rolls about world x.
  return [-dyPx * cfg.rotDegPerPixel, 0, -dxPx * cfg.rotDegPerPixel];
}

export class VirtualDevice {
  pose: DevicePose;
  engaged = true;
  grip = 0;
  private cfg: InputConfig;
  private lastEmitPose: DevicePose;
  private lastEmitAt: number | null = null;
  private dirty = true; // first emit announces the home pose

  constructor(homePose: DevicePose, cfg: InputConfig = DEFAULT_INPUT) {
    this.pose = clonePose(homePose);
    this.lastEmitPose = clonePose(homePose);
    this.cfg = cfg;
  }

  applyDrag(dxPx: number, dyPx: number, mode: InputMode): void {
    if (dxPx === 0 && dyPx === 0) return;
    if (mode === "translate") {
      const d = dragToTranslationMm(dxPx, dyPx, this.cfg);
      this.pose.positionMm = [
        this.pose.positionMm[0] + d[0],
        this.pose.positionMm[1] + d[1],
        this.pose.positionMm[2] + d[2],
      ];
    } else {
      const d = dragToRotationDeg(dxPx, dyPx, this.cfg);
      this.pose.eulerDeg = [
        this.pose.eulerDeg[0] + d[0],
        this.pose.eulerDeg[1] + d[1],
        this.pose.eulerDeg[2] + d[2],
      ];
    }
    this.dirty = true;
  }

  applyScroll(ticks: number): void {
    if (ticks === 0) return;
    this.pose.positionMm = [
      this.pose.positionMm[0],
      this.pose.positionMm[1] + ticks * this.cfg.scrollMmPerTick,
      this.pose.positionMm[2],
    ];
    this.dirty = true;
  }

  setEngaged(engaged: boolean): void {
    if (engaged !== this.engaged) {
      this.engaged = engaged;
      this.dirty = true;
    }
  }

  setGamepad(axes: number[], gainMmS: number, gainDegS: number, dtS: number): void {
    // Six axes map straight onto the pose rates (full 6-DOF sticks).
    const a = (i: number) => (Math.abs(axes[i] ?? 0) > 0.08 ? (axes[i] ?? 0) : 0);
    const anyActive = [0, 1, 2, 3, 4, 5].some((i) => a(i) !== 0);
    if (!anyActive) return;
    this.pose.positionMm = [
      this.pose.positionMm[0] + a(0) * gainMmS * dtS,
      this.pose.positionMm[1] + a(1) * gainMmS * dtS,
      this.pose.positionMm[2] - a(2) * gainMmS * dtS,
    ];
    this.pose.eulerDeg = [
      this.pose.eulerDeg[0] + a(3) * gainDegS * dtS,
      this.pose.eulerDeg[1] + a(4) * gainDegS * dtS,
      this.pose.eulerDeg[2] + a(5) * gainDegS * dtS,
    ];
    this.dirty = true;
  }

  /** Rate-limited message emission with client-computed twist; null when
   * idle (no motion since the last emit) or inside the rate window. */
  emit(nowMs: number): DeviceInputMsg | null {
    if (!this.dirty) return null;
    const minIntervalMs = 1000 / this.cfg.maxRateHz;
    if (this.lastEmitAt !== null && nowMs - this.lastEmitAt < minIntervalMs) return null;
    let twist;
    if (this.lastEmitAt !== null) {
      const dtS = Math.max((nowMs - this.lastEmitAt) / 1000, 1e-3);
      twist = {
        linearMmS: sub3(this.pose.positionMm, this.lastEmitPose.positionMm, 1 / dtS),
        angularDegS: sub3(this.pose.eulerDeg, this.lastEmitPose.eulerDeg, 1 / dtS),
      };
    }
    this.lastEmitAt = nowMs;
    this.lastEmitPose = clonePose(this.pose);
    this.dirty = false;
    return deviceInputMsg(clonePose(this.pose), twist, this.engaged, this.grip);
  }
}

function clonePose(pose: DevicePose): DevicePose {
  return {
    positionMm: [...pose.positionMm] as [number, number, number],
    eulerDeg: [...pose.eulerDeg] as [number, number, number],
  };
}

function sub3(
  a: [number, number, number],
  b: [number, number, number],
  scale: number,
): [number, number, number] {
  return [(a[0] - b[0]) * scale, (a[1] - b[1]) * scale, (a[2] - b[2]) * scale];
}
