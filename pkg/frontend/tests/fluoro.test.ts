import { describe, expect, it } from "vitest";

import { overlayToCanvas, panelTransform, rasterToRgba } from "../src/fluoroPanel.js";

describe("overlay transform", () => {
  it("centers the field and flips y", () => {
    const t = panelTransform(512, 512, 512, 512); // 1 px/mm
    const [[x, y]] = overlayToCanvas([[10, 20]], t);
    expect(x).toBe(256 + 10);
    expect(y).toBe(256 - 20);
  });

  it("fits the larger field dimension", () => {
    const t = panelTransform(512, 512, 1024, 512);
    expect(t.pxPerMm).toBe(0.5);
  });
});

describe("raster conversion", () => {
  it("expands rows into opaque grayscale RGBA", () => {
    const rgba = rasterToRgba([
      [0, 128],
      [255, 64],
    ]);
    expect(rgba.length).toBe(16);
    expect([rgba[0], rgba[3]]).toEqual([0, 255]);
    expect(rgba[4]).toBe(128);
    expect(rgba[8]).toBe(255);
    expect(rgba[12]).toBe(64);
  });
});
