// UI session state: a pure reducer over server messages. The UI renders
// only server-confirmed state; reloading the page reproduces the scene
// from the next snapshot.

import { FluoroFrame, ServerMessage, SceneSummary, Snapshot } from "./protocol.js";

export const STALE_AFTER_MS = 500;

export interface UiSessionState {
  connection: "connecting" | "open" | "closed";
  clientId: string | null;
  scene: SceneSummary | null;
  snapshot: Snapshot | null;
  snapshotAtMs: number | null;
  fluoro: FluoroFrame | null;
  inputDenied: boolean; // another client holds the token
  lastFault: string | null;
  lastAck: string | null;
}

export function initialState(): UiSessionState {
  return {
    connection: "connecting",
    clientId: null,
    scene: null,
    snapshot: null,
    snapshotAtMs: null,
    fluoro: null,
    inputDenied: false,
    lastFault: null,
    lastAck: null,
  };
}

export function onServerMessage(
  state: UiSessionState,
  msg: ServerMessage,
  nowMs: number,
): UiSessionState {
  switch (msg.type) {
    case "hello":
      return { ...state, connection: "open", clientId: msg.client, scene: msg.scene };
    case "snapshot":
      return { ...state, snapshot: msg, snapshotAtMs: nowMs };
    case "fluoro_frame":
      return { ...state, fluoro: msg };
    case "ack":
      return { ...state, lastAck: msg.action };
    case "fault":
      if (msg.code === "input_token_held") {
        return { ...state, inputDenied: true, lastFault: msg.code };
      }
      return { ...state, lastFault: `${msg.code}: ${msg.detail}` };
    default:
      return state;
  }
}

export function isStale(state: UiSessionState, nowMs: number): boolean {
  if (state.snapshotAtMs === null) return true;
  return nowMs - state.snapshotAtMs > STALE_AFTER_MS;
}

/** Arrow length is strictly linear in the force magnitude (doubling the
 * force doubles the arrow). Lengths in scene millimeters. */
export function forceArrowMm(f: [number, number, number], mmPerNewton = 2.0): {
  dir: [number, number, number];
  lengthMm: number;
} {
  const mag = Math.hypot(f[0], f[1], f[2]);
  if (mag < 1e-9) return { dir: [0, 0, 1], lengthMm: 0 };
  return { dir: [f[0] / mag, f[1] / mag, f[2] / mag], lengthMm: mag * mmPerNewton };
}

export function formatForceN(f: [number, number, number]): string {
  return `${Math.hypot(f[0], f[1], f[2]).toFixed(2)} N`;
}

export function collidingPairs(snapshot: Snapshot | null): number[] {
  if (!snapshot) return [];
  const out: number[] = [];
  for (let i = 0; i < 4; i++) if ((snapshot.collide >> i) & 1) out.push(i);
  return out;
}
