import { describe, expect, it } from 'vitest';

import type { BranchRow, Segmentation } from '../src/api.js';
import { composite, compositeTile, uncertaintyColor } from '../src/overlay.js';
import type { FloatImage } from '../src/rawfloat.js';

const field: FloatImage = {
  width: 4,
  height: 2,
  values: new Float32Array([0, 0.5, 1, 0.25, 0, 0, 1, 1]),
};

function branch(id: number, pixels: [number, number][], uncertainty = 0.3): BranchRow {
  return {
    id,
    persistence: 0.2,
    probability: 0.6,
    uncertainty,
    decision: 'undecided',
    included: true,
    pixels,
  };
}

const seg: Segmentation = {
  width: 4,
  height: 2,
  rle: [[2, 2]],
  voi: null,
  clicks: 0,
};

describe('composite', () => {
  it('base layer is the grayscale field', () => {
    const rgba = composite(field, null, [], { segmentation: false, uncertainty: false });
    expect(rgba).toHaveLength(4 * 2 * 4);
    expect(rgba[0]).toBe(0);
    expect(rgba[2 * 4]).toBe(255);
    expect(rgba[3]).toBe(255); // opaque
  });

  it('segmentation layer tints only run pixels', () => {
    const plain = composite(field, seg, [], { segmentation: false, uncertainty: false });
    const tinted = composite(field, seg, [], { segmentation: true, uncertainty: false });
    for (let i = 0; i < 4 * 2; i++) {
      const changed = tinted.slice(i * 4, i * 4 + 3).join() !== plain.slice(i * 4, i * 4 + 3).join();
      expect(changed).toBe(i === 2 || i === 3);
    }
  });

  it('hover highlights exactly the branch pixels', () => {
    const rows = [branch(7, [[0, 1], [5, 1]])];
    const base = composite(field, null, rows, { segmentation: false, uncertainty: false });
    const hover = composite(field, null, rows, { segmentation: false, uncertainty: false }, 7);
    const diff: number[] = [];
    for (let i = 0; i < 4 * 2; i++) {
      if (hover.slice(i * 4, i * 4 + 3).join() !== base.slice(i * 4, i * 4 + 3).join()) {
        diff.push(i);
      }
    }
    expect(diff).toEqual([0, 5]);
  });

  it('tile-wise compositing matches the single pass', () => {
    const rows = [branch(1, [[1, 3]], 0.45)];
    const whole = composite(field, seg, rows, { segmentation: true, uncertainty: true });
    const tiles = [
      compositeTile(field, seg, rows, { segmentation: true, uncertainty: true }, null, 0, 4),
      compositeTile(field, seg, rows, { segmentation: true, uncertainty: true }, null, 4, 4),
    ];
    const stitched = new Uint8ClampedArray([...tiles[0], ...tiles[1]]);
    expect(Array.from(stitched)).toEqual(Array.from(whole));
  });

  it('uncertainty colors ramp from cool to hot', () => {
    const cold = uncertaintyColor(0);
    const hot = uncertaintyColor(0.5);
    expect(cold[2]).toBeGreaterThan(cold[0]); // blue-ish
    expect(hot[0]).toBeGreaterThan(hot[2]); // red-ish
  });
});
