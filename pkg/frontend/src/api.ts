// Thin HTTP client for the triage service. All classification happens on
// the server; this module only moves JSON.

import type { ClassifyResponse, LabelsResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    reason: string,
  ) {
    super(reason);
    this.name = "ApiError";
  }
}

async function errorReason(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: unknown };
    if (typeof body.error === "string" && body.error !== "") return body.error;
  } catch {
    // fall through to the generic reason
  }
  return `HTTP ${resp.status}`;
}

export class ApiClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  async classify(description: string, threshold?: number): Promise<ClassifyResponse> {
    const body: Record<string, unknown> = { description };
    if (threshold !== undefined) body["threshold"] = threshold;
    const resp = await this.fetchFn(`${this.base}/api/v1/classify`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorReason(resp));
    return (await resp.json()) as ClassifyResponse;
  }

  async labels(): Promise<LabelsResponse> {
    const resp = await this.fetchFn(`${this.base}/api/v1/labels`);
    if (!resp.ok) throw new ApiError(resp.status, await errorReason(resp));
    return (await resp.json()) as LabelsResponse;
  }

  async health(): Promise<{ status: string; model_version: string }> {
    const resp = await this.fetchFn(`${this.base}/api/v1/health`);
    if (!resp.ok) throw new ApiError(resp.status, await errorReason(resp));
    return (await resp.json()) as { status: string; model_version: string };
  }
}
