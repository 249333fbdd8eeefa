/** Tuning-session state: current patch, parameters, result and history. */

import type { ClusterParams, ClusterResponse } from "./types.js";

export interface HistoryEntry {
  params: ClusterParams;
  k: number;
  clusterCount: number;
}

export class TunerSession {
  patchId: number | null = null;
  params: ClusterParams = {};
  lastResult: ClusterResponse | null = null;
  private readonly history: HistoryEntry[] = [];
  private requestSeq = 0;
  private appliedSeq = 0;

  selectPatch(patchId: number): void {
    this.patchId = patchId;
    this.lastResult = null;
  }

  setParam<K extends keyof ClusterParams>(key: K, value: ClusterParams[K]): void {
    this.params = { ...this.params, [key]: value };
  }

  /** Ticket for an outgoing request; stale responses are discarded. */
  nextRequest(): number {
    this.requestSeq += 1;
    return this.requestSeq;
  }

  /**
   * Record a response if it is not stale.  Returns true when applied.
   * History is append-only: one entry per applied result.
   */
  applyResult(seq: number, params: ClusterParams, response: ClusterResponse): boolean {
    if (seq <= this.appliedSeq) return false;
    this.appliedSeq = seq;
    this.lastResult = response;
    this.history.push({
      params: { ...params },
      k: response.K,
      clusterCount: response.n_clusters,
    });
    return true;
  }

  getHistory(): readonly HistoryEntry[] {
    return this.history;
  }

  get hasResult(): boolean {
    return this.lastResult !== null;
  }
}
