// Typed client for the structseg HTTP/JSON service. The service is the single
// source of truth: the UI never recomputes probabilities, ordering, or VOI.

export type Rle = [number, number][]; // [start, length] runs over flat indices

export interface ImageInfo {
  id: string;
  width: number;
  height: number;
  branches: number;
  has_gt: boolean;
}

export interface BranchRow {
  id: number;
  persistence: number | 'inf';
  probability: number;
  uncertainty: number;
  decision: 'keep' | 'drop' | 'undecided';
  included: boolean;
  pixels: Rle;
}

export interface Segmentation {
  width: number;
  height: number;
  rle: Rle;
  voi: number | null;
  clicks: number;
}

export interface History {
  click_log: [number, string][];
  voi_history: number[];
}

export interface RawFloatPayload {
  format: string;
  base64: string;
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** What the view model needs from a service client; ServiceApi is the fetch
 * implementation, tests substitute fakes. */
export interface ServiceClient {
  listImages(): Promise<ImageInfo[]>;
  branches(imageId: string): Promise<BranchRow[]>;
  segmentation(imageId: string): Promise<Segmentation>;
  history(imageId: string): Promise<History>;
  field(imageId: string): Promise<RawFloatPayload>;
  uncertainty(imageId: string): Promise<RawFloatPayload>;
  decide(imageId: string, branchId: number, action: 'keep' | 'drop'): Promise<Segmentation>;
}

export class ServiceApi implements ServiceClient {
  constructor(readonly baseUrl: string, private readonly token?: string) {}

  private headers(json = false): Record<string, string> {
    const out: Record<string, string> = {};
    if (json) out['Content-Type'] = 'application/json';
    if (this.token) out['Authorization'] = `Bearer ${this.token}`;
    return out;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      headers: this.headers(),
    });
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  listImages(): Promise<ImageInfo[]> {
    return this.get('/images');
  }

  branches(imageId: string): Promise<BranchRow[]> {
    return this.get(`/images/${imageId}/branches`);
  }

  segmentation(imageId: string): Promise<Segmentation> {
    return this.get(`/images/${imageId}/segmentation`);
  }

  history(imageId: string): Promise<History> {
    return this.get(`/images/${imageId}/history`);
  }

  field(imageId: string): Promise<RawFloatPayload> {
    return this.get(`/images/${imageId}/field`);
  }

  uncertainty(imageId: string): Promise<RawFloatPayload> {
    return this.get(`/images/${imageId}/uncertainty`);
  }

  async decide(
    imageId: string,
    branchId: number,
    action: 'keep' | 'drop',
  ): Promise<Segmentation> {
    const response = await fetch(`${this.baseUrl}/images/${imageId}/decisions`, {
      method: 'POST',
      headers: this.headers(true),
      body: JSON.stringify({ branch_id: branchId, action }),
    });
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    return (await response.json()) as Segmentation;
  }
}
