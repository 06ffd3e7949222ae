// Fluoroscopic panel: draws the raster underlay and the overlay polylines
// of a fluoro_frame into a 2D canvas. The coordinate transforms are plain
// functions so the tests can check them without a DOM.

import { FluoroFrame } from "./protocol.js";

export interface PanelTransform {
  pxPerMm: number;
  centerXPx: number;
  centerYPx: number;
}

export function panelTransform(
  canvasW: number,
  canvasH: number,
  fieldWMm: number,
  fieldHMm: number,
): PanelTransform {
  const pxPerMm = Math.min(canvasW / fieldWMm, canvasH / fieldHMm);
  return { pxPerMm, centerXPx: canvasW / 2, centerYPx: canvasH / 2 };
}

/** Image-plane mm -> canvas px; canvas y grows downward. */
export function overlayToCanvas(
  points: [number, number][],
  t: PanelTransform,
): [number, number][] {
  return points.map(([x, y]) => [
    t.centerXPx + x * t.pxPerMm,
    t.centerYPx - y * t.pxPerMm,
  ]);
}

/** Downsampled intensity rows (0-255) -> RGBA pixels, x-ray style
 * (bright bone on dark field). */
export function rasterToRgba(rows: number[][]): Uint8ClampedArray<ArrayBuffer> {
  const h = rows.length;
  const w = h > 0 ? rows[0].length : 0;
  const out = new Uint8ClampedArray(new ArrayBuffer(w * h * 4));
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) {
      const v = rows[i][j];
      const k = (i * w + j) * 4;
      out[k] = v;
      out[k + 1] = v;
      out[k + 2] = v;
      out[k + 3] = 255;
    }
  }
  return out;
}

export function drawFluoroFrame(
  canvas: HTMLCanvasElement,
  frame: FluoroFrame,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  const { width, height, mm_per_px, rows } = frame.raster;
  if (width > 0 && height > 0) {
    const rgba = rasterToRgba(rows);
    const image = new ImageData(rgba, width, height);
    // Offscreen scratch canvas so the raster can scale to the panel.
    const scratch = document.createElement("canvas");
    scratch.width = width;
    scratch.height = height;
    scratch.getContext("2d")?.putImageData(image, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(scratch, 0, 0, canvas.width, canvas.height);
  }

  const fieldW = width * mm_per_px;
  const fieldH = height * mm_per_px;
  const t = panelTransform(canvas.width, canvas.height, fieldW, fieldH);
  ctx.lineWidth = 1.2;
  for (const { label, points } of frame.overlay) {
    if (points.length < 2) continue;
    ctx.strokeStyle = label.startsWith("leg") ? "#4fc3f7" : "#e8f2e8";
    const px = overlayToCanvas(points, t);
    ctx.beginPath();
    ctx.moveTo(px[0][0], px[0][1]);
    for (const [x, y] of px.slice(1)) ctx.lineTo(x, y);
    if (!label.startsWith("leg")) ctx.closePath();
    ctx.stroke();
  }
}
