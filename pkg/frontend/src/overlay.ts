// Overlay compositing. Pure functions produce RGBA buffers so rendering is
// testable without a DOM; the canvas glue at the bottom is the only part that
// touches one. Oversized images degrade to tile-wise painting rather than
// allocating one huge buffer per frame.

import type { BranchRow, Segmentation } from './api.js';
import type { FloatImage } from './rawfloat.js';
import { rleIndices } from './rle.js';

export interface OverlayLayers {
  segmentation: boolean;
  uncertainty: boolean;
}

export const TILE_LIMIT = 4 << 20; // pixels per compositing pass

const SEG_TINT: [number, number, number] = [64, 160, 255];
const HOVER_TINT: [number, number, number] = [255, 255, 160];

/** Blue -> yellow -> red ramp over uncertainty in [0, 0.5]. */
export function uncertaintyColor(u: number): [number, number, number] {
  const t = Math.max(0, Math.min(1, u / 0.5));
  if (t < 0.5) {
    const s = t * 2;
    return [Math.round(60 + 195 * s), Math.round(90 + 165 * s), Math.round(200 - 140 * s)];
  }
  const s = (t - 0.5) * 2;
  return [255, Math.round(255 - 195 * s), Math.round(60 - 40 * s)];
}

export function compositeTile(
  field: FloatImage,
  segmentation: Segmentation | null,
  branches: BranchRow[],
  layers: OverlayLayers,
  hovered: number | null,
  offset = 0,
  limit = TILE_LIMIT,
): Uint8ClampedArray<ArrayBuffer> {
  const size = field.width * field.height;
  const end = Math.min(size, offset + limit);
  const n = end - offset;
  const rgba = new Uint8ClampedArray(n * 4);
  for (let i = 0; i < n; i++) {
    const g = Math.round(field.values[offset + i] * 255);
    rgba[i * 4] = g;
    rgba[i * 4 + 1] = g;
    rgba[i * 4 + 2] = g;
    rgba[i * 4 + 3] = 255;
  }
  const blend = (idx: number, tint: [number, number, number], alpha: number) => {
    if (idx < offset || idx >= end) return;
    const o = (idx - offset) * 4;
    rgba[o] = Math.round(rgba[o] * (1 - alpha) + tint[0] * alpha);
    rgba[o + 1] = Math.round(rgba[o + 1] * (1 - alpha) + tint[1] * alpha);
    rgba[o + 2] = Math.round(rgba[o + 2] * (1 - alpha) + tint[2] * alpha);
  };
  if (layers.segmentation && segmentation) {
    for (const idx of rleIndices(segmentation.rle)) blend(idx, SEG_TINT, 0.45);
  }
  if (layers.uncertainty) {
    for (const row of branches) {
      if (!row.included && row.decision !== 'undecided') continue;
      const tint = uncertaintyColor(row.uncertainty);
      for (const idx of rleIndices(row.pixels)) blend(idx, tint, 0.8);
    }
  }
  if (hovered !== null) {
    const row = branches.find((b) => b.id === hovered);
    if (row) {
      for (const idx of rleIndices(row.pixels)) blend(idx, HOVER_TINT, 0.95);
    }
  }
  return rgba;
}

export function composite(
  field: FloatImage,
  segmentation: Segmentation | null,
  branches: BranchRow[],
  layers: OverlayLayers,
  hovered: number | null = null,
): Uint8ClampedArray<ArrayBuffer> {
  return compositeTile(field, segmentation, branches, layers, hovered, 0, Infinity);
}

/** Paint onto a canvas, tile-wise when the image exceeds TILE_LIMIT. */
export function paint(
  canvas: HTMLCanvasElement,
  field: FloatImage,
  segmentation: Segmentation | null,
  branches: BranchRow[],
  layers: OverlayLayers,
  hovered: number | null,
  scale: number,
): void {
  canvas.width = field.width;
  canvas.height = field.height;
  canvas.style.width = `${field.width * scale}px`;
  canvas.style.height = `${field.height * scale}px`;
  canvas.style.imageRendering = 'pixelated';
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const size = field.width * field.height;
  for (let offset = 0; offset < size; offset += TILE_LIMIT) {
    const rgba = compositeTile(field, segmentation, branches, layers, hovered, offset);
    const rows = rgba.length / 4 / field.width;
    const image = new ImageData(rgba, field.width, rows);
    ctx.putImageData(image, 0, Math.floor(offset / field.width));
  }
}
