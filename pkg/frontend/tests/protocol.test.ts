import { describe, expect, it } from "vitest";

import {
  carmDeltaMsg,
  deviceInputMsg,
  parseServerMessage,
  PROTOCOL_VERSION,
  sessionControlMsg,
  validateClientMessage,
} from "../src/protocol.js";

const POSE = { positionMm: [0, 0, -350] as [number, number, number],
               eulerDeg: [0, 0, 0] as [number, number, number] };

describe("client message builders", () => {
  it("device input validates clean", () => {
    const msg = deviceInputMsg(POSE);
    expect(msg.v).toBe(PROTOCOL_VERSION);
    expect(validateClientMessage(msg)).toEqual([]);
  });

  it("device input with twist validates clean", () => {
    const msg = deviceInputMsg(POSE, {
      linearMmS: [10, 0, 0],
      angularDegS: [0, 0, 5],
    });
    expect(validateClientMessage(msg)).toEqual([]);
    expect(msg.vx).toBe(10);
    expect(msg.wz).toBe(5);
  });

  it("carm delta and session control validate clean", () => {
    expect(validateClientMessage(carmDeltaMsg(0, 0, 90))).toEqual([]);
    expect(validateClientMessage(sessionControlMsg("pause"))).toEqual([]);
    expect(
      validateClientMessage(sessionControlMsg("set_param", "contact.spring_k", 1500)),
    ).toEqual([]);
  });
});

describe("schema validation catches malformed messages", () => {
  it("rejects missing pose fields", () => {
    const broken = { ...deviceInputMsg(POSE) } as Record<string, unknown>;
    delete broken.px;
    expect(validateClientMessage(broken)).not.toEqual([]);
  });

  it("rejects non-finite numbers", () => {
    const broken = { ...deviceInputMsg(POSE), py: Number.NaN };
    expect(validateClientMessage(broken)).not.toEqual([]);
  });

  it("rejects partial twist", () => {
    const broken = { ...deviceInputMsg(POSE), vx: 1.0 };
    expect(validateClientMessage(broken).join(" ")).toContain("twist");
  });

  it("rejects grip outside [0, 1]", () => {
    const broken = { ...deviceInputMsg(POSE), grip: 1.5 };
    expect(validateClientMessage(broken)).not.toEqual([]);
  });

  it("rejects wrong version and unknown type", () => {
    expect(validateClientMessage({ v: 99, type: "device_input" })).not.toEqual([]);
    expect(validateClientMessage({ v: PROTOCOL_VERSION, type: "mystery" })).not.toEqual([]);
  });

  it("rejects set_param without a numeric value", () => {
    const broken = { v: PROTOCOL_VERSION, type: "session_control", action: "set_param",
                     name: "contact.spring_k" };
    expect(validateClientMessage(broken)).not.toEqual([]);
  });
});

describe("server message parsing", () => {
  it("accepts versioned objects", () => {
    const msg = parseServerMessage(JSON.stringify({ v: 1, type: "snapshot", tick: 3 }));
    expect(msg?.type).toBe("snapshot");
  });

  it("returns null for garbage, arrays and wrong versions", () => {
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage("[1,2,3]")).toBeNull();
    expect(parseServerMessage(JSON.stringify({ v: 2, type: "snapshot" }))).toBeNull();
  });
});
