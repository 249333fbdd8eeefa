/** Config-fragment export: per-patch overrides in the engine's INI grammar. */

import type { ClusterParams } from "./types.js";

/** Defaults the engine applies when a field was never touched in the UI. */
export const ENGINE_DEFAULTS: Required<ClusterParams> = {
  H: 0, // placeholder; the actually-used H always comes from the response
  n_paths: 100000,
  sigma: 0.05,
  sigma2: 0.1,
  delta_s: 1.0,
  epsilon: 0.1,
  tau: 150,
  min_size: 5,
  n_theta: 24,
  seed: 0,
};

/**
 * Render a pasteable per-patch override section.
 *
 * The key set and order match the engine's own exporter; `kernelH` pins the
 * step count that was actually used (the engine otherwise derives it from
 * the patch size).
 */
export function exportFragment(
  patchId: number,
  params: ClusterParams,
  kernelH: number,
): string {
  const v = { ...ENGINE_DEFAULTS, ...params };
  const lines = [
    `[patch.${patchId}]`,
    `H = ${kernelH}`,
    `n_paths = ${v.n_paths}`,
    `sigma = ${v.sigma}`,
    `sigma2 = ${v.sigma2}`,
    `delta_s = ${v.delta_s}`,
    `epsilon = ${v.epsilon}`,
    `tau = ${v.tau}`,
    `min_size = ${v.min_size}`,
    `n_theta = ${v.n_theta}`,
    `seed = ${v.seed}`,
  ];
  return lines.join("\n") + "\n";
}

/** Trigger a browser download of the fragment. */
export function downloadFragment(text: string, filename: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
