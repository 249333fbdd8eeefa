/** Pure transforms from engine responses to display models.
 *
 * Every number shown by the UI is taken verbatim from a response; nothing
 * numerical is recomputed here beyond picking colors and layout.
 */

import type { ClusterResponse } from "./types.js";
import { NOISE_LABEL } from "./types.js";

/** Widget ranges mirroring the engine's parameter validation. */
export const PARAM_RANGES = {
  H: { min: 1, max: 40, step: 1 },
  n_paths: { min: 1000, max: 500000, step: 1000 },
  sigma: { min: 0.01, max: 0.5, step: 0.005 },
  sigma2: { min: 0.05, max: 1.5, step: 0.05 },
  delta_s: { min: 0.25, max: 2.0, step: 0.25 },
  epsilon: { min: 0.01, max: 0.95, step: 0.01 },
  tau: { min: 1, max: 500, step: 1 },
  min_size: { min: 1, max: 30, step: 1 },
  seed: { min: 0, max: 9999, step: 1 },
} as const;

export const N_THETA_CHOICES = [8, 12, 16, 24, 36] as const;

/** Overlay palette; clusters are colored by decreasing size for stability. */
export const PALETTE: ReadonlyArray<readonly [number, number, number]> = [
  [230, 60, 60],
  [60, 120, 230],
  [60, 200, 90],
  [240, 180, 40],
  [170, 80, 220],
  [70, 210, 220],
  [240, 110, 180],
  [150, 220, 60],
  [250, 140, 50],
  [110, 110, 250],
];
export const NOISE_COLOR: readonly [number, number, number] = [120, 120, 120];

export interface ColoredPoint {
  x: number;
  y: number;
  color: readonly [number, number, number];
  noise: boolean;
}

export interface SpectrumPoint {
  index: number;
  value: number;
  selected: boolean;
}

export interface ResultViewModel {
  k: number;
  clusterCount: number;
  clusterSizesRanked: { id: number; size: number }[];
  points: ColoredPoint[];
  /** Exponentiated spectrum by default; raw on toggle. */
  spectrum: SpectrumPoint[];
  rawSpectrum: SpectrumPoint[];
  threshold: number;
  kernelH: number;
}

/** Cluster ids ordered by decreasing size (ties by id). */
export function sizeRankedIds(sizes: Record<string, number>): number[] {
  return Object.keys(sizes)
    .map(Number)
    .sort((a, b) => sizes[String(b)] - sizes[String(a)] || a - b);
}

export function colorForRank(rank: number): readonly [number, number, number] {
  return PALETTE[rank % PALETTE.length];
}

export function buildViewModel(response: ClusterResponse): ResultViewModel {
  const ranked = sizeRankedIds(response.cluster_sizes);
  const colorById = new Map<number, readonly [number, number, number]>();
  ranked.forEach((id, rank) => colorById.set(id, colorForRank(rank)));
  const points: ColoredPoint[] = response.labels.map(([x, y, label]) => ({
    x,
    y,
    color: colorById.get(label) ?? NOISE_COLOR,
    noise: label === NOISE_LABEL,
  }));
  const spectrum = response.eigenvalues_pow.map((value, i) => ({
    index: i + 1,
    value,
    selected: i < response.K,
  }));
  const rawSpectrum = response.eigenvalues.map((value, i) => ({
    index: i + 1,
    value,
    selected: i < response.K,
  }));
  return {
    k: response.K,
    clusterCount: response.n_clusters,
    clusterSizesRanked: ranked.map((id) => ({
      id,
      size: response.cluster_sizes[String(id)],
    })),
    points,
    spectrum,
    rawSpectrum,
    threshold: response.threshold,
    kernelH: response.kernel_H,
  };
}
