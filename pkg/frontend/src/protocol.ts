// Wire protocol types and helpers. Mirrors PROTOCOL.md in the repo root:
// JSON text frames, protocol version 1, display units (mm, degrees).

export const PROTOCOL_VERSION = 1;

export interface DevicePose {
  positionMm: [number, number, number];
  eulerDeg: [number, number, number];
}

export interface DeviceTwist {
  linearMmS: [number, number, number];
  angularDegS: [number, number, number];
}

export interface DeviceInputMsg {
  v: number;
  type: "device_input";
  px: number;
  py: number;
  pz: number;
  qa: number;
  qb: number;
  qg: number;
  vx?: number;
  vy?: number;
  vz?: number;
  wx?: number;
  wy?: number;
  wz?: number;
  engaged: boolean;
  grip: number;
}

export interface CArmDeltaMsg {
  v: number;
  type: "carm_delta";
  qa: number;
  qb: number;
  qg: number;
}

export type ControlAction = "pause" | "resume" | "reset" | "set_param";

export interface SessionControlMsg {
  v: number;
  type: "session_control";
  action: ControlAction;
  name?: string;
  value?: number;
}

export type ClientMessage = DeviceInputMsg | CArmDeltaMsg | SessionControlMsg;

export interface Snapshot {
  v: number;
  type: "snapshot";
  tick: number;
  t: number;
  hc_px: number;
  hc_py: number;
  hc_pz: number;
  hc_qa: number;
  hc_qb: number;
  hc_qg: number;
  rsr_t_px: number;
  rsr_t_py: number;
  rsr_t_pz: number;
  rsr_t_qa: number;
  rsr_t_qb: number;
  rsr_t_qg: number;
  rsr_a_px: number;
  rsr_a_py: number;
  rsr_a_pz: number;
  rsr_a_qa: number;
  rsr_a_qb: number;
  rsr_a_qg: number;
  d1: number;
  d2: number;
  d3: number;
  th1: number;
  th2: number;
  th3: number;
  fgx: number;
  fgy: number;
  fgz: number;
  collide: number;
  fault: boolean;
}

export interface FluoroFrame {
  v: number;
  type: "fluoro_frame";
  qa: number;
  qb: number;
  qg: number;
  overlay: { label: string; points: [number, number][] }[];
  raster: { width: number; height: number; mm_per_px: number; rows: number[][] };
}

export interface HelloMsg {
  v: number;
  type: "hello";
  client: string;
  snapshot_rate: number;
  scene: SceneSummary;
}

export interface AckMsg {
  v: number;
  type: "ack";
  action: string;
  name?: string | null;
}

export interface FaultMsg {
  v: number;
  type: "fault";
  code: string;
  detail: string;
}

export type ServerMessage = HelloMsg | Snapshot | FluoroFrame | AckMsg | FaultMsg;

export interface SceneSummary {
  name: string;
  dt: number;
  teleop: { max_v_mm_s: number; max_w_deg_s: number };
  follower: {
    fixed_anchors_mm: number[][];
    moving_anchors_mm: number[][];
    actuator_min_mm: number;
    actuator_max_mm: number;
    home: { position_mm: number[]; euler_deg: number[] };
  };
  leader: { home: { position_mm: number[]; euler_deg: number[] } };
  proximal_obbs: ObbSummary[];
  distal_templates: ObbSummary[];
  thigh: { p0_mm: number[]; p1_mm: number[]; radius_mm: number } | null;
  fluoro: { width: number; height: number; mm_per_px: number };
}

export interface ObbSummary {
  label: string;
  center_mm: number[];
  euler_deg: number[];
  half_extents_mm: number[];
}

export function deviceInputMsg(
  pose: DevicePose,
  twist?: DeviceTwist,
  engaged = true,
  grip = 0,
): DeviceInputMsg {
  const msg: DeviceInputMsg = {
    v: PROTOCOL_VERSION,
    type: "device_input",
    px: pose.positionMm[0],
    py: pose.positionMm[1],
    pz: pose.positionMm[2],
    qa: pose.eulerDeg[0],
    qb: pose.eulerDeg[1],
    qg: pose.eulerDeg[2],
    engaged,
    grip,
  };
  if (twist) {
    [msg.vx, msg.vy, msg.vz] = twist.linearMmS;
    [msg.wx, msg.wy, msg.wz] = twist.angularDegS;
  }
  return msg;
}

export function carmDeltaMsg(qa: number, qb: number, qg: number): CArmDeltaMsg {
  return { v: PROTOCOL_VERSION, type: "carm_delta", qa, qb, qg };
}

export function sessionControlMsg(
  action: ControlAction,
  name?: string,
  value?: number,
): SessionControlMsg {
  const msg: SessionControlMsg = { v: PROTOCOL_VERSION, type: "session_control", action };
  if (name !== undefined) msg.name = name;
  if (value !== undefined) msg.value = value;
  return msg;
}

const FINITE = (v: unknown): v is number => typeof v === "number" && Number.isFinite(v);

/** Schema check used by the tests (and debug builds): every message the UI
 * can emit must come back clean. Returns a list of problems. */
export function validateClientMessage(msg: unknown): string[] {
  const problems: string[] = [];
  if (typeof msg !== "object" || msg === null) return ["message is not an object"];
  const m = msg as Record<string, unknown>;
  if (m.v !== PROTOCOL_VERSION) problems.push(`v must be ${PROTOCOL_VERSION}`);
  switch (m.type) {
    case "device_input": {
      for (const k of ["px", "py", "pz", "qa", "qb", "qg"]) {
        if (!FINITE(m[k])) problems.push(`${k} must be a finite number`);
      }
      const twistKeys = ["vx", "vy", "vz", "wx", "wy", "wz"];
      const present = twistKeys.filter((k) => m[k] !== undefined);
      if (present.length !== 0 && present.length !== twistKeys.length) {
        problems.push("twist must be all six components or none");
      }
      for (const k of present) if (!FINITE(m[k])) problems.push(`${k} must be finite`);
      if (typeof m.engaged !== "boolean") problems.push("engaged must be a boolean");
      if (!FINITE(m.grip) || (m.grip as number) < 0 || (m.grip as number) > 1) {
        problems.push("grip must sit in [0, 1]");
      }
      break;
    }
    case "carm_delta":
      for (const k of ["qa", "qb", "qg"]) {
        if (!FINITE(m[k])) problems.push(`${k} must be a finite number`);
      }
      break;
    case "session_control": {
      const actions = ["pause", "resume", "reset", "set_param"];
      if (!actions.includes(m.action as string)) problems.push("unknown action");
      if (m.action === "set_param") {
        if (typeof m.name !== "string") problems.push("set_param needs a name");
        if (!FINITE(m.value)) problems.push("set_param needs a numeric value");
      }
      break;
    }
    default:
      problems.push(`unknown message type ${String(m.type)}`);
  }
  return problems;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const m = msg as { v?: unknown; type?: unknown };
  if (m.v !== PROTOCOL_VERSION || typeof m.type !== "string") return null;
  return msg as ServerMessage;
}
