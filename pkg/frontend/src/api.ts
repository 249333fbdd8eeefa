/** Thin typed client over the engine HTTP API. */

import type { ClusterParams, ClusterResponse, PatchListResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function expectOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && body.detail) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response;
}

export class EngineClient {
  constructor(readonly baseUrl: string) {}

  async listPatches(): Promise<PatchListResponse> {
    const r = await expectOk(await fetch(`${this.baseUrl}/patches`));
    return (await r.json()) as PatchListResponse;
  }

  patchImageUrl(patchId: number): string {
    return `${this.baseUrl}/patch/${patchId}/image`;
  }

  kernelPreviewUrl(params: ClusterParams): string {
    const q = new URLSearchParams();
    for (const key of ["H", "sigma", "n_paths", "n_theta", "delta_s", "seed"] as const) {
      const v = params[key];
      if (v !== undefined) q.set(key, String(v));
    }
    return `${this.baseUrl}/kernel/preview?${q.toString()}`;
  }

  async clusterPatch(patchId: number, params: ClusterParams): Promise<ClusterResponse> {
    const r = await expectOk(
      await fetch(`${this.baseUrl}/patch/${patchId}/cluster`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(params),
      }),
    );
    return (await r.json()) as ClusterResponse;
  }
}
