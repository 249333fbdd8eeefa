/** Canvas drawing for the patch overlay and the spectrum plot. */

import type { ResultViewModel, SpectrumPoint } from "./viewmodel.js";

const SCALE = 8; // screen pixels per image pixel

export function drawOverlay(
  canvas: HTMLCanvasElement,
  baseImage: HTMLImageElement | null,
  model: ResultViewModel | null,
  origin: [number, number],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.imageSmoothingEnabled = false;
  ctx.fillStyle = "#202020";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (baseImage && baseImage.complete && baseImage.naturalWidth > 0) {
    canvas.width = baseImage.naturalWidth * SCALE;
    canvas.height = baseImage.naturalHeight * SCALE;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(baseImage, 0, 0, canvas.width, canvas.height);
  }
  if (!model) return;
  const [ox, oy] = origin;
  for (const p of model.points) {
    const [r, g, b] = p.color;
    ctx.fillStyle = p.noise
      ? `rgba(${r},${g},${b},0.55)`
      : `rgb(${r},${g},${b})`;
    ctx.fillRect((p.x - ox) * SCALE, (p.y - oy) * SCALE, SCALE, SCALE);
  }
}

export function drawSpectrum(
  canvas: HTMLCanvasElement,
  points: SpectrumPoint[],
  threshold: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  const pad = 28;
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad / 2, w - 1.5 * pad, h - 1.5 * pad);
  const plotW = w - 1.5 * pad;
  const plotH = h - 1.5 * pad;
  const yFor = (v: number) => pad / 2 + (1 - v) * plotH;
  const n = Math.max(points.length, 1);
  // threshold line (value supplied by the engine)
  ctx.strokeStyle = "#d03030";
  ctx.beginPath();
  ctx.moveTo(pad, yFor(threshold));
  ctx.lineTo(pad + plotW, yFor(threshold));
  ctx.stroke();
  for (const p of points) {
    const x = pad + ((p.index - 0.5) / n) * plotW;
    ctx.fillStyle = p.selected ? "#2040c0" : "#777";
    ctx.beginPath();
    ctx.arc(x, yFor(Math.max(0, Math.min(1, p.value))), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText("1.0", 4, yFor(1) + 4);
  ctx.fillText("0.0", 4, yFor(0) + 4);
}
