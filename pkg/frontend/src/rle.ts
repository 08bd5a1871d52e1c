// Run-length payload helpers. Runs are [start, length] over row-major flat
// indices, matching the service encoding.

import type { Rle } from './api.js';

export function rleDecode(runs: Rle, size: number): Uint8Array {
  const bits = new Uint8Array(size);
  for (const [start, length] of runs) {
    if (start < 0 || start + length > size) {
      throw new RangeError(`run [${start}, ${length}] exceeds buffer of ${size}`);
    }
    bits.fill(1, start, start + length);
  }
  return bits;
}

export function rleEncode(bits: Uint8Array): Rle {
  const runs: Rle = [];
  let start = -1;
  for (let i = 0; i < bits.length; i++) {
    if (bits[i] && start < 0) start = i;
    if (!bits[i] && start >= 0) {
      runs.push([start, i - start]);
      start = -1;
    }
  }
  if (start >= 0) runs.push([start, bits.length - start]);
  return runs;
}

export function rleCount(runs: Rle): number {
  return runs.reduce((acc, [, length]) => acc + length, 0);
}

/** Flat index of every pixel in the runs, in order. */
export function rleIndices(runs: Rle): number[] {
  const out: number[] = [];
  for (const [start, length] of runs) {
    for (let i = 0; i < length; i++) out.push(start + i);
  }
  return out;
}
