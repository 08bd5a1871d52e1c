import { describe, expect, it } from 'vitest';

import type {
  BranchRow,
  History,
  RawFloatPayload,
  Segmentation,
  ServiceClient,
} from '../src/api.js';
import { ServiceError } from '../src/api.js';
import { SessionView } from '../src/state.js';

function rawFloat(width: number, height: number): RawFloatPayload {
  const header = Buffer.from(JSON.stringify({ w: width, h: height }) + '\n');
  const payload = Buffer.alloc(width * height * 4);
  return {
    format: 'raw-float',
    base64: Buffer.concat([header, payload]).toString('base64'),
  };
}

class FakeService implements ServiceClient {
  rows: BranchRow[];
  seg: Segmentation;
  hist: History = { click_log: [], voi_history: [1.5] };
  failNext = false;

  constructor() {
    // server queue order: by uncertainty descending
    this.rows = [
      { id: 3, persistence: 0.21, probability: 0.52, uncertainty: 0.48, decision: 'undecided', included: true, pixels: [[0, 2]] },
      { id: 1, persistence: 0.4, probability: 0.9, uncertainty: 0.1, decision: 'undecided', included: true, pixels: [[4, 1]] },
      { id: 2, persistence: 'inf', probability: 1, uncertainty: 0, decision: 'undecided', included: true, pixels: [[5, 1]] },
    ];
    this.seg = { width: 3, height: 2, rle: [[0, 6]], voi: 1.5, clicks: 0 };
  }

  async listImages() {
    return [{ id: 'img', width: 3, height: 2, branches: 3, has_gt: true }];
  }
  async branches() {
    return structuredClone(this.rows);
  }
  async segmentation() {
    return structuredClone(this.seg);
  }
  async history() {
    return structuredClone(this.hist);
  }
  async field() {
    return rawFloat(3, 2);
  }
  async uncertainty() {
    return rawFloat(3, 2);
  }
  async decide(_: string, branchId: number, action: 'keep' | 'drop') {
    if (this.failNext) {
      this.failNext = false;
      throw new ServiceError(409, 'no-op');
    }
    const row = this.rows.find((r) => r.id === branchId)!;
    row.decision = action;
    row.included = action === 'keep';
    this.seg = { ...this.seg, clicks: this.seg.clicks + 1, voi: 1.2 };
    this.hist = {
      click_log: [...this.hist.click_log, [branchId, action]],
      voi_history: [...this.hist.voi_history, 1.2],
    };
    return structuredClone(this.seg);
  }
}

describe('SessionView', () => {
  it('preserves server queue order without re-sorting', async () => {
    const service = new FakeService();
    const view = new SessionView(service, 'img');
    await view.load();
    expect(view.branches.map((b) => b.id)).toEqual([3, 1, 2]);
    expect(view.branches[0].uncertainty).toBeCloseTo(0.48);
  });

  it('applies a decision and refreshes queue and history in one cycle', async () => {
    const service = new FakeService();
    const view = new SessionView(service, 'img');
    await view.load();
    const seg = await view.decide(3, 'drop');
    expect(seg.clicks).toBe(1);
    expect(view.segmentation?.clicks).toBe(1);
    expect(view.branches.find((b) => b.id === 3)?.decision).toBe('drop');
    expect(view.history.voi_history).toEqual([1.5, 1.2]);
  });

  it('rolls back the optimistic update when the POST fails', async () => {
    const service = new FakeService();
    const view = new SessionView(service, 'img');
    await view.load();
    const before = JSON.stringify(view.snapshot());
    service.failNext = true;
    await expect(view.decide(3, 'drop')).rejects.toThrow('no-op');
    expect(JSON.stringify(view.snapshot())).toBe(before);
  });

  it('a reloaded view reproduces the identical snapshot', async () => {
    const service = new FakeService();
    const first = new SessionView(service, 'img');
    await first.load();
    await first.decide(3, 'drop');

    const reloaded = new SessionView(service, 'img');
    await reloaded.load();
    expect(reloaded.signature()).toBe(first.signature());
  });

  it('suggests the toggle action for a row', async () => {
    const service = new FakeService();
    const view = new SessionView(service, 'img');
    await view.load();
    expect(view.actionFor(view.branches[0])).toBe('drop');
    view.branches[0].included = false;
    expect(view.actionFor(view.branches[0])).toBe('keep');
  });
});
