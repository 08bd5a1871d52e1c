// View model for one proofreading session. All numbers displayed come from
// the service; the model only tracks in-flight optimism so a failed POST can
// roll back cleanly. A full reload reconstructs the identical view because
// nothing here is derived client-side.

import type {
  BranchRow,
  History,
  Segmentation,
  ServiceClient,
} from './api.js';
import { decodeRawFloat, type FloatImage } from './rawfloat.js';

export interface SessionSnapshot {
  imageId: string;
  branches: BranchRow[];
  segmentation: Segmentation;
  history: History;
}

export class SessionView {
  branches: BranchRow[] = [];
  segmentation: Segmentation | null = null;
  history: History = { click_log: [], voi_history: [] };
  field: FloatImage | null = null;
  uncertaintyMap: FloatImage | null = null;
  hovered: number | null = null;
  pendingBranch: number | null = null;

  constructor(
    private readonly api: ServiceClient,
    readonly imageId: string,
  ) {}

  async load(): Promise<void> {
    const [branches, segmentation, history, field, uncertainty] =
      await Promise.all([
        this.api.branches(this.imageId),
        this.api.segmentation(this.imageId),
        this.api.history(this.imageId),
        this.api.field(this.imageId),
        this.api.uncertainty(this.imageId),
      ]);
    // server order is authoritative; never re-sort
    this.branches = branches;
    this.segmentation = segmentation;
    this.history = history;
    this.field = decodeRawFloat(field.base64);
    this.uncertaintyMap = decodeRawFloat(uncertainty.base64);
  }

  /** The control shown on a row toggles its current inclusion. */
  actionFor(row: BranchRow): 'keep' | 'drop' {
    return row.included ? 'drop' : 'keep';
  }

  /** Apply one decision: optimistic row update, server POST, then refresh of
   * the queue and history within the same cycle; rollback on failure. */
  async decide(branchId: number, action: 'keep' | 'drop'): Promise<Segmentation> {
    const index = this.branches.findIndex((b) => b.id === branchId);
    if (index < 0) {
      throw new Error(`unknown branch ${branchId}`);
    }
    const before = this.branches[index];
    this.pendingBranch = branchId;
    this.branches[index] = {
      ...before,
      decision: action,
      included: action === 'keep',
    };
    try {
      const segmentation = await this.api.decide(this.imageId, branchId, action);
      const [branches, history] = await Promise.all([
        this.api.branches(this.imageId),
        this.api.history(this.imageId),
      ]);
      this.segmentation = segmentation;
      this.branches = branches;
      this.history = history;
      return segmentation;
    } catch (err) {
      this.branches[index] = before; // optimistic update rolled back
      throw err;
    } finally {
      this.pendingBranch = null;
    }
  }

  nextUndecided(): BranchRow | undefined {
    return this.branches.find((b) => b.decision === 'undecided');
  }

  /** Everything the screen shows, in canonical form; two views with equal
   * signatures render identically. */
  snapshot(): SessionSnapshot {
    if (!this.segmentation) {
      throw new Error('snapshot before load()');
    }
    return {
      imageId: this.imageId,
      branches: this.branches,
      segmentation: this.segmentation,
      history: this.history,
    };
  }

  signature(): string {
    return JSON.stringify(this.snapshot());
  }
}
