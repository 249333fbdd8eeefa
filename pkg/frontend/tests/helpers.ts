import type { ClusterResponse } from "../src/types.js";

export function fakeResponse(
  overrides: Partial<ClusterResponse> = {},
): ClusterResponse {
  return {
    patch_id: 0,
    K: 2,
    n_clusters: 2,
    cluster_sizes: { "1": 120, "2": 111 },
    kernel_H: 7,
    labels: [
      [3, 4, 1],
      [5, 6, 2],
      [7, 8, -1],
    ],
    eigenvalues: [1.0, 0.9999, 0.5],
    eigenvalues_pow: [1.0, 0.985, 0.0001],
    threshold: 0.9,
    params_used: {
      H: 7, n_paths: 100000, sigma: 0.05, sigma2: 0.1, delta_s: 1.0,
      epsilon: 0.1, tau: 150, min_size: 5, n_theta: 8, seed: 7,
    },
    ...overrides,
  };
}
