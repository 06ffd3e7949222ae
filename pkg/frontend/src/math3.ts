// Minimal pose math matching the service convention: extrinsic X-Y-Z Euler
// angles, R = Rz(g) @ Ry(b) @ Rx(a). Everything the UI draws is derived
// from snapshots with these helpers; no physics happens here.

export type Vec3 = [number, number, number];
export type Mat3 = [Vec3, Vec3, Vec3]; // row-major

const DEG = Math.PI / 180;

export function eulerDegToMatrix(eulerDeg: [number, number, number]): Mat3 {
  const [a, b, g] = eulerDeg.map((v) => v * DEG);
  const ca = Math.cos(a), sa = Math.sin(a);
  const cb = Math.cos(b), sb = Math.sin(b);
  const cg = Math.cos(g), sg = Math.sin(g);
  // Rz(g) Ry(b) Rx(a), expanded.
  return [
    [cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa],
    [sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa],
    [-sb, cb * sa, cb * ca],
  ];
}

export function matVec(m: Mat3, v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
    m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
    m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
  ];
}

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out: number[][] = [[0, 0, 0], [0, 0, 0], [0, 0, 0]];
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    }
  }
  return out as Mat3;
}

export interface PoseMm {
  positionMm: Vec3;
  rotation: Mat3;
}

export function poseFromMm(positionMm: number[], eulerDeg: number[]): PoseMm {
  return {
    positionMm: [positionMm[0], positionMm[1], positionMm[2]],
    rotation: eulerDegToMatrix([eulerDeg[0], eulerDeg[1], eulerDeg[2]]),
  };
}

export function applyPose(pose: PoseMm, pointMm: Vec3): Vec3 {
  const r = matVec(pose.rotation, pointMm);
  return [
    r[0] + pose.positionMm[0],
    r[1] + pose.positionMm[1],
    r[2] + pose.positionMm[2],
  ];
}

export function composePose(a: PoseMm, b: PoseMm): PoseMm {
  return { positionMm: applyPose(a, b.positionMm), rotation: matMul(a.rotation, b.rotation) };
}

export function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}
