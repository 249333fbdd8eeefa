/** Wire types of the engine HTTP API. */

export interface PatchSummary {
  id: number;
  center: [number, number];
  size: number;
  junctions: [number, number][];
}

export interface PatchListResponse {
  patches: PatchSummary[];
}

/** Engine parameters accepted by POST /patch/{id}/cluster. */
export interface ClusterParams {
  H?: number;
  n_paths?: number;
  sigma?: number;
  sigma2?: number;
  delta_s?: number;
  epsilon?: number;
  tau?: number;
  min_size?: number;
  n_theta?: number;
  seed?: number;
}

export interface ClusterResponse {
  patch_id: number;
  K: number;
  n_clusters: number;
  cluster_sizes: Record<string, number>;
  kernel_H: number;
  /** [x, y, label] per lifted point; label -1 marks noise. */
  labels: [number, number, number][];
  eigenvalues: number[];
  /** Exponentiated spectrum, computed by the engine. */
  eigenvalues_pow: number[];
  /** Selection threshold 1 - epsilon, computed by the engine. */
  threshold: number;
  params_used: Required<ClusterParams>;
}

export const NOISE_LABEL = -1;
