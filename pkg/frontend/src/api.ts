/** Typed client for the gridsight service. The UI computes no domain math
 * of its own: every number it shows comes back from these calls. */

import type {
  FeatureCollection,
  JobSnapshot,
  PoiRecord,
  ReportDoc,
  SearchConfigDoc,
  SessionInfo,
  WhatifResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface AnalyzeRequest {
  pois: PoiRecord[];
  radii?: number[];
  tau?: number;
}

export type WhatifMove =
  | { poi: string; vertex: number }
  | { poi: string; lat: number; lon: number };

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let code = "error";
      let message = text || response.statusText;
      try {
        const doc = JSON.parse(text);
        code = doc.error ?? code;
        message = doc.message ?? message;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(response.status, code, message);
    }
    return JSON.parse(text) as T;
  }

  healthz(): Promise<{ status: string }> {
    return this.request("/healthz");
  }

  loadSession(document: string, profile = "drive"): Promise<SessionInfo> {
    return this.request(`/sessions?profile=${profile}`, {
      method: "POST",
      body: document,
    });
  }

  analyze(sessionId: string, body: AnalyzeRequest): Promise<ReportDoc> {
    return this.request(`/sessions/${sessionId}/analyze`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  whatif(sessionId: string, move: WhatifMove): Promise<WhatifResponse> {
    return this.request(`/sessions/${sessionId}/whatif`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(move),
    });
  }

  optimize(sessionId: string, config: SearchConfigDoc): Promise<{ job: string }> {
    return this.request(`/sessions/${sessionId}/optimize`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
  }

  jobStatus(jobId: string): Promise<JobSnapshot> {
    return this.request(`/jobs/${jobId}`);
  }

  cancelJob(jobId: string): Promise<{ job: string; cancelled: boolean }> {
    return this.request(`/jobs/${jobId}/cancel`, { method: "POST" });
  }

  exportGeojson(sessionId: string): Promise<FeatureCollection> {
    return this.request(`/sessions/${sessionId}/export?format=geojson`);
  }
}
