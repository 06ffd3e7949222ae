// Browser bootstrap: wires the WebSocket session, the virtual device, the
// 3D view, the fluoro panel and the control strip together.

import * as THREE from "three";

import { drawFluoroFrame } from "./fluoroPanel.js";
import { DEFAULT_INPUT, InputMode, VirtualDevice } from "./input.js";
import {
  carmDeltaMsg,
  parseServerMessage,
  sessionControlMsg,
  validateClientMessage,
} from "./protocol.js";
import { SceneView, makeCamera } from "./sceneView.js";
import {
  formatForceN,
  initialState,
  isStale,
  onServerMessage,
  UiSessionState,
} from "./state.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function send(ws: WebSocket, msg: unknown): void {
  const problems = validateClientMessage(msg);
  if (problems.length > 0) {
    console.error("refusing to send malformed message", msg, problems);
    return;
  }
  if (ws.readyState === WebSocket.OPEN) ws.send(JSON.stringify(msg));
}

async function start(): Promise<void> {
  let state: UiSessionState = initialState();
  const status = byId<HTMLSpanElement>("status");
  const forceGauge = byId<HTMLSpanElement>("force");
  const poseReadout = byId<HTMLSpanElement>("pose");
  const viewport = byId<HTMLDivElement>("viewport");
  const fluoroCanvas = byId<HTMLCanvasElement>("fluoro");
  const engageBox = byId<HTMLInputElement>("engaged");

  const ws = new WebSocket(`ws://${location.host}/ws`);
  let device: VirtualDevice | null = null;
  let view: SceneView | null = null;
  let renderer: THREE.WebGLRenderer | null = null;
  let camera: THREE.PerspectiveCamera | null = null;

  ws.onmessage = (event) => {
    const msg = parseServerMessage(String(event.data));
    if (!msg) return;
    state = onServerMessage(state, msg, performance.now());
    if (msg.type === "hello" && !view) {
      device = new VirtualDevice({
        positionMm: msg.scene.leader.home.position_mm as [number, number, number],
        eulerDeg: msg.scene.leader.home.euler_deg as [number, number, number],
      });
      view = new SceneView(msg.scene);
      renderer = new THREE.WebGLRenderer({ antialias: true });
      renderer.setSize(viewport.clientWidth, viewport.clientHeight);
      viewport.appendChild(renderer.domElement);
      camera = makeCamera(viewport.clientWidth / viewport.clientHeight);
    }
    if (msg.type === "fluoro_frame") drawFluoroFrame(fluoroCanvas, msg);
  };
  ws.onclose = () => {
    state = { ...state, connection: "closed" };
  };

  // Pointer input on the 3D viewport.
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  viewport.addEventListener("pointerdown", (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    viewport.setPointerCapture(e.pointerId);
  });
  viewport.addEventListener("pointermove", (e) => {
    if (!dragging || !device) return;
    const mode: InputMode = e.shiftKey ? "rotate" : "translate";
    device.applyDrag(e.clientX - lastX, e.clientY - lastY, mode);
    lastX = e.clientX;
    lastY = e.clientY;
  });
  viewport.addEventListener("pointerup", () => {
    dragging = false;
  });
  viewport.addEventListener("wheel", (e) => {
    device?.applyScroll(Math.sign(e.deltaY));
    e.preventDefault();
  });

  engageBox.addEventListener("change", () => device?.setEngaged(engageBox.checked));
  byId<HTMLButtonElement>("pause").addEventListener("click", () =>
    send(ws, sessionControlMsg("pause")));
  byId<HTMLButtonElement>("resume").addEventListener("click", () =>
    send(ws, sessionControlMsg("resume")));
  byId<HTMLButtonElement>("reset").addEventListener("click", () =>
    send(ws, sessionControlMsg("reset")));

  // C-arm sliders emit deltas relative to their previous value; the panel
  // rate-limits by waiting for the resulting frame (last one wins).
  const sliderValues: Record<string, number> = { ca: 0, cb: 0, cg: 0 };
  for (const axis of ["ca", "cb", "cg"] as const) {
    const slider = byId<HTMLInputElement>(axis);
    slider.addEventListener("change", () => {
      const value = Number(slider.value);
      const delta = value - sliderValues[axis];
      sliderValues[axis] = value;
      send(ws, carmDeltaMsg(
        axis === "ca" ? delta : 0,
        axis === "cb" ? delta : 0,
        axis === "cg" ? delta : 0,
      ));
    });
  }
  byId<HTMLButtonElement>("carm-reset").addEventListener("click", () => {
    send(ws, carmDeltaMsg(-sliderValues.ca, -sliderValues.cb, -sliderValues.cg));
    for (const axis of ["ca", "cb", "cg"] as const) {
      sliderValues[axis] = 0;
      byId<HTMLInputElement>(axis).value = "0";
    }
  });

  // Gamepad polling piggybacks on the render loop.
  let lastFrameMs = performance.now();
  function frame(nowMs: number): void {
    const dtS = Math.min((nowMs - lastFrameMs) / 1000, 0.1);
    lastFrameMs = nowMs;
    const pads = navigator.getGamepads ? navigator.getGamepads() : [];
    const pad = pads && pads[0];
    if (pad && device) device.setGamepad([...pad.axes], 120, 60, dtS);

    if (device) {
      const msg = device.emit(nowMs);
      if (msg) send(ws, msg);
    }
    if (state.snapshot && view && renderer && camera) {
      view.update(state.snapshot);
      renderer.render(view.root, camera);
      forceGauge.textContent = formatForceN([
        state.snapshot.fgx,
        state.snapshot.fgy,
        state.snapshot.fgz,
      ]);
      poseReadout.textContent =
        `ring z ${state.snapshot.rsr_a_pz.toFixed(1)} mm, ` +
        `d = [${state.snapshot.d1.toFixed(1)}, ${state.snapshot.d2.toFixed(1)}, ` +
        `${state.snapshot.d3.toFixed(1)}] mm`;
    }
    const stale = isStale(state, performance.now());
    status.textContent = state.connection !== "open"
      ? state.connection
      : stale
        ? "stale (no snapshots)"
        : state.inputDenied
          ? "watching (input token held elsewhere)"
          : "live";
    status.className = stale || state.connection !== "open" ? "bad" : "ok";
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

start().catch((err) => console.error("ui start failed", err));
