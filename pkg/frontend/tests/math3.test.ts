import { describe, expect, it } from "vitest";

import { applyPose, composePose, eulerDegToMatrix, matVec, poseFromMm } from "../src/math3.js";

describe("euler convention (extrinsic X-Y-Z)", () => {
  it("identity at zero angles", () => {
    const m = eulerDegToMatrix([0, 0, 0]);
    expect(m[0]).toEqual([1, 0, 0]);
    expect(m[1][1]).toBe(1);
    expect(m[2][2]).toBe(1);
  });

  it("90 deg about z maps x to y", () => {
    const m = eulerDegToMatrix([0, 0, 90]);
    const v = matVec(m, [1, 0, 0]);
    expect(v[0]).toBeCloseTo(0, 12);
    expect(v[1]).toBeCloseTo(1, 12);
  });

  it("90 deg about x maps y to z", () => {
    const m = eulerDegToMatrix([90, 0, 0]);
    const v = matVec(m, [0, 1, 0]);
    expect(v[2]).toBeCloseTo(1, 12);
  });

  it("applies alpha about x first, gamma about z last", () => {
    // With a = 90, g = 90: x-hat is untouched by Rx, then Rz sends it to y.
    const m = eulerDegToMatrix([90, 0, 90]);
    const v = matVec(m, [1, 0, 0]);
    expect(v[0]).toBeCloseTo(0, 12);
    expect(v[1]).toBeCloseTo(1, 12);
    // z-hat: Rx(90) sends z to -y, Rz leaves... Rz(90) sends -y to x.
    const w = matVec(m, [0, 0, 1]);
    expect(w[0]).toBeCloseTo(1, 12);
  });
});

describe("pose composition", () => {
  it("compose then apply equals apply twice", () => {
    const a = poseFromMm([10, -5, 3], [20, 10, -30]);
    const b = poseFromMm([-2, 8, 1], [0, 45, 5]);
    const p: [number, number, number] = [3, 4, 5];
    const viaCompose = applyPose(composePose(a, b), p);
    const viaChain = applyPose(a, applyPose(b, p));
    for (let i = 0; i < 3; i++) expect(viaCompose[i]).toBeCloseTo(viaChain[i], 9);
  });
});
