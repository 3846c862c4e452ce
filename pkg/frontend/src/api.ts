// Typed client for the sevenpoint scoring API. All scoring math lives on
// the server; this module only moves JSON.

export interface WeightsInfo {
  traditional: number[];
  learned: number[];
  threshold: number;
}

export interface ScoreRequest {
  attrs: number[];
}

export interface ScoreResponse {
  traditional_score: number;
  weighted_average: number;
  melanoma_probability: number;
  referral: { traditional: boolean; learned: boolean };
  weights_used: number[];
  threshold_used: number;
}

export interface GraphDump {
  nodes: string[];
  internal: number[][];
  external: number[][];
  combined: number[][];
  proximity: Record<string, number[][]>;
  stationary: number[];
}

export interface FieldError {
  field: string;
  message: string;
}

export class ApiValidationError extends Error {
  constructor(public errors: FieldError[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
    this.name = "ApiValidationError";
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(private baseUrl: string = "") {}

  async getWeights(): Promise<WeightsInfo> {
    const res = await fetch(`${this.baseUrl}/api/weights`);
    if (!res.ok) {
      throw new Error(`weights request failed: ${res.status}`);
    }
    return res.json();
  }

  async getGraph(): Promise<GraphDump> {
    const res = await fetch(`${this.baseUrl}/api/graph`);
    if (!res.ok) {
      throw new Error(`graph request failed: ${res.status}`);
    }
    return res.json();
  }

  /** POST one attribute vector; a newer call aborts any in-flight one. */
  async score(attrs: number[]): Promise<ScoreResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const res = await fetch(`${this.baseUrl}/api/score`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ attrs } satisfies ScoreRequest),
        signal: controller.signal,
      });
      if (res.status === 400) {
        const body = await res.json();
        throw new ApiValidationError(body.errors ?? []);
      }
      if (!res.ok) {
        throw new Error(`score request failed: ${res.status}`);
      }
      return res.json();
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
  }
}
