"""WebSocket service exposing the live engine to interactive clients.

One engine thread advances the simulation at the scene timestep; network
threads only touch it through a latest-wins device-input slot, an ordered
control queue, and immutable state snapshots. Wire messages are JSON text
frames in display units (mm, degrees) with a protocol version field; the
full schema lives in PROTOCOL.md. Plain HTTP GETs on the same port serve
the scene summary and optional static UI files.

Multiple clients may watch; the first client to send device input holds the
input token until it disconnects.
"""

from __future__ import annotations

import dataclasses
import json
import math
import threading
import time
from collections import deque
from dataclasses import dataclass
from http import HTTPStatus
from typing import Any

import numpy as np
from websockets.datastructures import Headers
from websockets.http11 import Response
from websockets.sync.server import Server, ServerConnection, serve as ws_serve

from .engine import DeviceInput, Scene, SimState, initial_state, step, fluoro_objects
from .fluoro import capture, set_carm
from .geometry import EulerAngles, Pose, Twist, euler_to_rotation, rotation_to_euler
from .sceneio import sample_row, scene_to_dict, TRAJECTORY_HEADER

PROTOCOL_VERSION = 1
SNAPSHOT_FIELDS = TRAJECTORY_HEADER.split(",")


class ProtocolError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


def snapshot_message(state: SimState, tick: int) -> dict:
    sample = state.sample
    msg: dict[str, Any] = {"v": PROTOCOL_VERSION, "type": "snapshot", "tick": tick}
    if sample is None:
        return msg
    for name, value in zip(SNAPSHOT_FIELDS, sample_row(sample)):
        msg[name] = value
    msg["fault"] = sample.faults.any()
    msg["fk_iterations"] = sample.fk_iterations
    return msg


def parse_client_message(raw: str | bytes) -> dict:
    try:
        msg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError("bad_json", str(exc)) from exc
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("bad_message", "expected an object with a 'type' field")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ProtocolError("bad_version", f"expected v={PROTOCOL_VERSION}")
    return msg


def device_input_from_wire(msg: dict) -> DeviceInput:
    try:
        pos = np.array([float(msg[k]) for k in ("px", "py", "pz")]) / 1000.0
        eul = EulerAngles(*[math.radians(float(msg[k])) for k in ("qa", "qb", "qg")])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError("bad_device_input", f"missing or non-numeric pose field: {exc}")
    twist = None
    if all(k in msg for k in ("vx", "vy", "vz", "wx", "wy", "wz")):
        try:
            twist = Twist(
                np.array([float(msg[k]) for k in ("vx", "vy", "vz")]) / 1000.0,
                np.radians([float(msg[k]) for k in ("wx", "wy", "wz")]),
            )
        except (TypeError, ValueError) as exc:
            raise ProtocolError("bad_device_input", f"non-numeric twist field: {exc}")
    try:
        grip = float(msg.get("grip", 0.0))
    except (TypeError, ValueError) as exc:
        raise ProtocolError("bad_device_input", f"non-numeric grip: {exc}")
    return DeviceInput(
        pose=Pose(pos, euler_to_rotation(eul)),
        twist=twist,
        engaged=bool(msg.get("engaged", True)),
        grip=min(1.0, max(0.0, grip)),
    )


# Parameters adjustable over the wire (wire units noted).
_PARAM_APPLIERS = {
    "teleop.max_v_mm_s": lambda s, v: dataclasses.replace(
        s, scaling=dataclasses.replace(s.scaling, max_v=v / 1000.0)),
    "teleop.max_w_deg_s": lambda s, v: dataclasses.replace(
        s, scaling=dataclasses.replace(s.scaling, max_w=math.radians(v))),
    "contact.spring_k": lambda s, v: dataclasses.replace(
        s, force_params=dataclasses.replace(s.force_params, spring_k=v)),
    "contact.damping_c": lambda s, v: dataclasses.replace(
        s, force_params=dataclasses.replace(s.force_params, damping_c=v)),
    "contact.f_max": lambda s, v: dataclasses.replace(
        s, force_params=dataclasses.replace(s.force_params, f_max=v if v > 0 else None)),
    "drives.linear.stiffness": lambda s, v: dataclasses.replace(
        s, linear_drive=dataclasses.replace(s.linear_drive, stiffness=v)),
    "drives.rotary.stiffness": lambda s, v: dataclasses.replace(
        s, rotary_drive=dataclasses.replace(s.rotary_drive, stiffness=v)),
}


class EngineLoop(threading.Thread):
    """Owns the SimState; the only thread that advances it."""

    def __init__(self, scene: Scene, realtime: bool = True, record_path: str | None = None):
        super().__init__(daemon=True, name="fracsim-engine")
        self.scene = scene
        self.realtime = realtime
        self._state = initial_state(scene)
        self._tick = 0
        self._lock = threading.Lock()
        self._input: DeviceInput | None = None
        self._last_input = DeviceInput(scene.hc_home, Twist.zero())
        self._controls: deque[tuple[dict, threading.Event, dict]] = deque()
        self._paused = False
        self._stop_event = threading.Event()
        self._record = open(record_path, "w", encoding="ascii", newline="\n") if record_path else None
        if self._record:
            self._record.write("t,px,py,pz,qa,qb,qg,engaged,grip\n")
        self.input_owner: str | None = None

    # -- cross-thread API -------------------------------------------------

    def latest(self) -> tuple[SimState, int]:
        with self._lock:
            return self._state, self._tick

    def submit_input(self, device: DeviceInput, client_id: str) -> bool:
        """Latest-wins input slot; False when another client holds the token."""
        with self._lock:
            if self.input_owner is None:
                self.input_owner = client_id
            if self.input_owner != client_id:
                return False
            self._input = device
            return True

    def release_input(self, client_id: str) -> None:
        with self._lock:
            if self.input_owner == client_id:
                self.input_owner = None
                self._input = None

    def submit_control(self, control: dict, timeout: float = 2.0) -> dict:
        """Enqueue a control command and wait for the engine to apply it."""
        done = threading.Event()
        result: dict = {}
        with self._lock:
            self._controls.append((control, done, result))
        if not done.wait(timeout):
            return {"ok": False, "detail": "engine did not acknowledge in time"}
        return result

    def stop(self) -> None:
        self._stop_event.set()

    def step_once(self) -> None:
        """Advance exactly one tick (test hook; engine must be paused)."""
        with self._lock:
            if self._input is not None:
                self._last_input = self._input
            self._advance_locked()

    # -- engine thread ----------------------------------------------------

    def _apply_control_locked(self, control: dict, result: dict) -> None:
        action = control.get("action")
        if action == "pause":
            self._paused = True
            result.update(ok=True, action=action)
        elif action == "resume":
            self._paused = False
            result.update(ok=True, action=action)
        elif action == "reset":
            self._state = initial_state(self.scene)
            self._tick = 0
            self._input = None
            self._last_input = DeviceInput(self.scene.hc_home, Twist.zero())
            result.update(ok=True, action=action)
        elif action == "set_param":
            name = control.get("name")
            applier = _PARAM_APPLIERS.get(name)
            try:
                value = float(control.get("value"))
            except (TypeError, ValueError):
                result.update(ok=False, action=action, detail=f"non-numeric value for {name!r}")
                return
            if applier is None:
                result.update(ok=False, action=action,
                              detail=f"unknown parameter {name!r}")
                return
            self.scene = applier(self.scene, value)
            result.update(ok=True, action=action, name=name)
        else:
            result.update(ok=False, detail=f"unknown action {action!r}")

    def _advance_locked(self) -> None:
        self._state = step(self._state, self.scene, self._last_input)
        self._tick += 1
        if self._record and self._state.sample is not None:
            dev = self._last_input
            e = rotation_to_euler(dev.pose.rotation)
            self._record.write(
                f"{self._state.sample.t:.4f},"
                f"{1000.0 * float(dev.pose.position[0]):.4f},"
                f"{1000.0 * float(dev.pose.position[1]):.4f},"
                f"{1000.0 * float(dev.pose.position[2]):.4f},"
                f"{math.degrees(e.alpha):.4f},{math.degrees(e.beta):.4f},"
                f"{math.degrees(e.gamma):.4f},{int(dev.engaged)},{dev.grip:.2f}\n"
            )

    def run(self) -> None:
        dt = self.scene.dt
        anchor = time.monotonic()
        owed = 0.0
        try:
            while not self._stop_event.is_set():
                with self._lock:
                    while self._controls:
                        control, done, result = self._controls.popleft()
                        self._apply_control_locked(control, result)
                        done.set()
                    paused = self._paused
                if paused:
                    time.sleep(0.005)
                    anchor = time.monotonic()
                    owed = 0.0
                    continue
                if self.realtime:
                    now = time.monotonic()
                    owed += now - anchor
                    anchor = now
                    if owed > 0.25:  # fell behind badly: drop the backlog
                        owed = 0.25
                    ticks = int(owed / dt)
                    owed -= ticks * dt
                else:
                    ticks = 1
                for _ in range(ticks):
                    with self._lock:
                        if self._input is not None:
                            self._last_input = self._input
                        self._advance_locked()
                if self.realtime and ticks == 0:
                    time.sleep(dt / 2)
        finally:
            if self._record:
                self._record.close()


def _fluoro_message(scene: Scene, state: SimState, carm, angles_deg) -> dict:
    objects, lines = fluoro_objects(scene, state)
    image = capture(objects, carm, scene.fluoro, opacity=scene.opacity, lines=lines)
    stride = max(1, image.width // 128, image.height // 128)
    raster = np.rint(image.intensity[::stride, ::stride] * 255.0).astype(int)
    return {
        "v": PROTOCOL_VERSION,
        "type": "fluoro_frame",
        "qa": angles_deg[0],
        "qb": angles_deg[1],
        "qg": angles_deg[2],
        "overlay": [
            {"label": label, "points": [[float(x), float(y)] for x, y in pts]}
            for label, pts in image.overlay
        ],
        "raster": {
            "width": int(raster.shape[1]),
            "height": int(raster.shape[0]),
            "mm_per_px": image.mm_per_px * stride,
            "rows": raster.tolist(),
        },
    }


class FracsimService:
    def __init__(self, scene: Scene, snapshot_rate: float = 60.0, realtime: bool = True,
                 record_path: str | None = None, static_dir: str | None = None):
        self.loop = EngineLoop(scene, realtime=realtime, record_path=record_path)
        self.snapshot_rate = snapshot_rate
        self.static_dir = static_dir
        self._clients: dict[str, tuple[ServerConnection, threading.Lock]] = {}
        self._clients_lock = threading.Lock()
        self._carm = scene.carm_home
        self._carm_angles = [0.0, 0.0, 0.0]
        self._carm_lock = threading.Lock()
        self._next_id = 0

    # -- plumbing ----------------------------------------------------------

    def _register(self, connection: ServerConnection) -> tuple[str, threading.Lock]:
        with self._clients_lock:
            self._next_id += 1
            cid = f"client-{self._next_id}"
            lock = threading.Lock()
            self._clients[cid] = (connection, lock)
        return cid, lock

    def _unregister(self, cid: str) -> None:
        with self._clients_lock:
            self._clients.pop(cid, None)
        self.loop.release_input(cid)

    def _send(self, connection: ServerConnection, lock: threading.Lock, msg: dict) -> bool:
        try:
            with lock:
                connection.send(json.dumps(msg))
            return True
        except Exception:
            return False

    def _broadcast(self, msg: dict) -> None:
        with self._clients_lock:
            targets = list(self._clients.values())
        for connection, lock in targets:
            self._send(connection, lock, msg)

    # -- request handling ---------------------------------------------------

    def process_request(self, connection: ServerConnection, request) -> Response | None:
        path = request.path.split("?", 1)[0]
        if path == "/ws":
            return None  # continue with the WebSocket handshake
        if path == "/scene":
            body = json.dumps(scene_to_dict(self.loop.scene)).encode()
            return _http_response(HTTPStatus.OK, "application/json", body)
        if self.static_dir is not None:
            return _static_response(self.static_dir, path)
        return _http_response(HTTPStatus.NOT_FOUND, "text/plain", b"not found\n")

    def handle(self, connection: ServerConnection) -> None:
        cid, lock = self._register(connection)
        state, tick = self.loop.latest()
        self._send(connection, lock, {"v": PROTOCOL_VERSION, "type": "hello", "client": cid,
                                      "snapshot_rate": self.snapshot_rate,
                                      "scene": scene_to_dict(self.loop.scene)})
        with self._carm_lock:
            self._send(connection, lock,
                       _fluoro_message(self.loop.scene, state, self._carm, self._carm_angles))

        sender = threading.Thread(
            target=self._snapshot_sender, args=(connection, lock), daemon=True,
            name=f"{cid}-sender",
        )
        sender.start()
        try:
            for raw in connection:
                try:
                    self._dispatch(cid, connection, lock, raw)
                except ProtocolError as exc:
                    self._send(connection, lock, {
                        "v": PROTOCOL_VERSION, "type": "fault",
                        "code": exc.code, "detail": exc.detail,
                    })
        except Exception:
            pass
        finally:
            self._unregister(cid)

    def _dispatch(self, cid: str, connection, lock, raw) -> None:
        msg = parse_client_message(raw)
        kind = msg["type"]
        if kind == "device_input":
            device = device_input_from_wire(msg)
            if not self.loop.submit_input(device, cid):
                raise ProtocolError("input_token_held",
                                    "another client is driving the device")
        elif kind == "carm_delta":
            try:
                deltas = [float(msg.get(k, 0.0)) for k in ("qa", "qb", "qg")]
            except (TypeError, ValueError) as exc:
                raise ProtocolError("bad_carm_delta", str(exc))
            with self._carm_lock:
                self._carm = set_carm(self._carm, EulerAngles(*np.deg2rad(deltas)))
                self._carm_angles = [a + d for a, d in zip(self._carm_angles, deltas)]
                carm = self._carm
                angles = list(self._carm_angles)
            state, _ = self.loop.latest()
            self._broadcast(_fluoro_message(self.loop.scene, state, carm, angles))
        elif kind == "session_control":
            result = self.loop.submit_control(msg)
            if result.get("ok"):
                self._send(connection, lock, {"v": PROTOCOL_VERSION, "type": "ack",
                                              "action": result.get("action"),
                                              "name": result.get("name")})
            else:
                raise ProtocolError("control_rejected", result.get("detail", "rejected"))
        else:
            raise ProtocolError("unknown_type", f"unknown message type {kind!r}")

    def _snapshot_sender(self, connection, lock) -> None:
        # The latest snapshot goes out every period even when the engine is
        # paused (same tick): watching clients stay hydrated either way.
        period = 1.0 / self.snapshot_rate
        while True:
            start = time.monotonic()
            state, tick = self.loop.latest()
            if state.sample is not None:
                if not self._send(connection, lock, snapshot_message(state, tick)):
                    return
            elapsed = time.monotonic() - start
            time.sleep(max(0.0, period - elapsed))


def _http_response(status: HTTPStatus, ctype: str, body: bytes) -> Response:
    headers = Headers([
        ("Content-Type", ctype),
        ("Content-Length", str(len(body))),
        ("Cache-Control", "no-store"),
    ])
    return Response(status.value, status.phrase, headers, body)


_MIME = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


def _static_response(root: str, path: str) -> Response:
    import os

    rel = path.lstrip("/") or "index.html"
    full = os.path.realpath(os.path.join(root, rel))
    if not full.startswith(os.path.realpath(root) + os.sep) and full != os.path.realpath(root):
        return _http_response(HTTPStatus.FORBIDDEN, "text/plain", b"forbidden\n")
    if os.path.isdir(full):
        full = os.path.join(full, "index.html")
    if not os.path.isfile(full):
        return _http_response(HTTPStatus.NOT_FOUND, "text/plain", b"not found\n")
    ext = os.path.splitext(full)[1].lower()
    with open(full, "rb") as fh:
        return _http_response(HTTPStatus.OK, _MIME.get(ext, "application/octet-stream"), fh.read())


@dataclass
class ServiceHandle:
    service: FracsimService
    server: Server
    thread: threading.Thread
    host: str
    port: int

    @property
    def ws_url(self) -> str:
        return f"ws://{self.host}:{self.port}/ws"

    @property
    def http_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def close(self) -> None:
        self.service.loop.stop()
        self.server.shutdown()
        self.thread.join(timeout=5.0)
        self.service.loop.join(timeout=5.0)


def start_service(scene: Scene, host: str = "127.0.0.1", port: int = 0,
                  snapshot_rate: float = 60.0, realtime: bool = True,
                  record_path: str | None = None,
                  static_dir: str | None = None) -> ServiceHandle:
    """Start the engine and server threads; returns a handle for shutdown."""
    service = FracsimService(scene, snapshot_rate=snapshot_rate, realtime=realtime,
                             record_path=record_path, static_dir=static_dir)
    server = ws_serve(service.handle, host, port,
                      process_request=service.process_request)
    bound_port = server.socket.getsockname()[1]
    service.loop.start()
    thread = threading.Thread(target=server.serve_forever, daemon=True,
                              name="fracsim-server")
    thread.start()
    return ServiceHandle(service, server, thread, host, bound_port)


def serve(scene: Scene, host: str, port: int, snapshot_rate: float = 60.0,
          realtime: bool = True, record_path: str | None = None,
          static_dir: str | None = None) -> None:
    """Blocking entry point used by the CLI."""
    handle = start_service(scene, host, port, snapshot_rate=snapshot_rate,
                           realtime=realtime, record_path=record_path,
                           static_dir=static_dir)
    print(f"fracsim service on {handle.http_url} (ws at {handle.ws_url})")
    try:
        while True:
            time.sleep(1.0)
    finally:
        handle.close()
