"""Whole-image orchestration: junction patches and per-patch grouping.

The hard segmentation is skeletonized, skeleton crossing points become
junction candidates, nearby junctions agglomerate into square patches, and
each patch runs the full chain: local threshold, orientation lift,
connectivity kernel, spectral clustering.  Per-patch failures are recorded,
never fatal for the image run.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from skimage.morphology import skeletonize as _sk_skeletonize

from .imageio import Image2D, SoftSegmentation, otsu_threshold
from .kernel import IntensityParams, KernelParams, load_or_estimate
from .lifting import build_cake_wavelets, dominant_orientations, lift
from .spectral import (
    NOISE,
    assign_clusters,
    build_affinity,
    eigs,
    normalize,
)


class PatchError(RuntimeError):
    """A single patch could not be analyzed (degenerate or too small)."""


@dataclass(frozen=True)
class EngineParams:
    """Full parameter set of one clustering run.

    ``H`` falls back to round(size/3) of the patch being analyzed, the rule
    of thumb for connecting interrupted segments without bridging distinct
    vessels.
    """

    n_theta: int = 24
    H: Optional[int] = None
    n_paths: int = 100000
    sigma: float = 0.05
    sigma2: float = 0.1
    delta_s: float = 1.0
    epsilon: float = 0.1
    tau: int = 150
    min_size: int = 5
    seed: int = 0
    wavelet_order: int = 3
    inflection: float = 0.8
    backend: str = "auto"

    def __post_init__(self):
        if self.H is not None and self.H < 1:
            raise ValueError("H must be >= 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")
        if not self.delta_s > 0:
            raise ValueError("delta_s must be > 0")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.tau < 1:
            raise ValueError("tau must be a positive integer")
        if self.min_size < 1:
            raise ValueError("min_size must be >= 1")
        if self.n_theta < 4 or self.n_theta % 2:
            raise ValueError("n_theta must be even and >= 4")

    def kernel_params(self, patch_size: float) -> KernelParams:
        H = self.H if self.H is not None else max(1, round(patch_size / 3))
        return KernelParams(
            H=H,
            n_paths=self.n_paths,
            sigma=self.sigma,
            delta_s=self.delta_s,
            n_theta=self.n_theta,
            seed=self.seed,
        )

    def intensity_params(self) -> IntensityParams:
        return IntensityParams(sigma2=self.sigma2)


@dataclass(frozen=True)
class PatchSpec:
    """Square analysis window around one or more junctions."""

    center: tuple
    size: float
    junctions: tuple = ()

    def rect(self, width: int, height: int):
        """Pixel rectangle (x0, y0, x1, y1), clipped to the image bounds."""
        cx, cy = self.center
        half = self.size / 2.0
        x0 = max(0, int(math.floor(cx - half + 0.5)))
        y0 = max(0, int(math.floor(cy - half + 0.5)))
        x1 = min(width, int(math.floor(cx + half + 0.5)) + 1)
        y1 = min(height, int(math.floor(cy + half + 0.5)) + 1)
        return x0, y0, x1, y1


@dataclass(frozen=True)
class PatchResult:
    """Clustering outcome of one patch, in absolute image coordinates."""

    spec: PatchSpec
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    cluster_sizes: dict
    eigenvalues: np.ndarray
    K: int
    params: EngineParams
    kernel_H: int

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)


def skeletonize(mask: np.ndarray) -> np.ndarray:
    """One-pixel-wide 8-connected medial skeleton (topology preserving)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("cannot skeletonize an empty mask")
    return _sk_skeletonize(mask)


# 8-neighborhood ring in cyclic order, as (dy, dx)
_RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def detect_junctions(skeleton: np.ndarray) -> list:
    """Junction centroids of a thin skeleton via crossing-number analysis.

    A skeleton pixel whose 8-neighborhood ring shows three or more 0-to-1
    transitions touches at least three branches.  Adjacent junction pixels
    (within 2 px) fuse into their centroid, absorbing the double-Y artifact
    thinning produces at crossings.
    """
    sk = np.asarray(skeleton, dtype=bool)
    padded = np.pad(sk, 1)
    ring = np.stack(
        [padded[1 + dy : padded.shape[0] - 1 + dy, 1 + dx : padded.shape[1] - 1 + dx]
         for dy, dx in _RING]
    )
    transitions = (ring.astype(np.int8) - np.roll(ring, 1, axis=0) == 1).sum(axis=0)
    junction_px = sk & (transitions >= 3)
    ys, xs = np.nonzero(junction_px)
    if len(xs) == 0:
        return []
    # fuse pixels closer than 2 px (single-linkage over the candidate set)
    coords = np.stack([xs, ys], axis=1).astype(np.float64)
    n = len(coords)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.hypot(*(coords[i] - coords[j])) <= 2.0:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    centroids = [tuple(coords[idx].mean(axis=0)) for idx in groups.values()]
    centroids.sort()
    return centroids


def build_patches(
    junctions: list, initial_size: float = 10.0, max_size: float = 100.0
) -> list:
    """Agglomerate junction windows until no near pair remains.

    Two patches merge when their centers are closer than half the larger
    size; the merged patch sits at the midpoint with size three times the
    distance, never smaller than either parent (a merge must not lose
    analysis context) and at least large enough to keep every member
    junction inside, clamped to ``max_size``.  A pair whose members cannot
    fit the clamped size is left unmerged so the junction-coverage
    invariant always holds.
    """
    patches = [
        PatchSpec(center=(float(x), float(y)), size=float(initial_size),
                  junctions=((float(x), float(y)),))
        for x, y in junctions
    ]
    while len(patches) > 1:
        candidates = []
        for i in range(len(patches)):
            for j in range(i + 1, len(patches)):
                a, b = patches[i], patches[j]
                dist = math.hypot(
                    a.center[0] - b.center[0], a.center[1] - b.center[1]
                )
                if dist < max(a.size, b.size) / 2.0:
                    candidates.append((dist, i, j))
        candidates.sort()
        merged_any = False
        for dist, i, j in candidates:
            a, b = patches[i], patches[j]
            cx = (a.center[0] + b.center[0]) / 2.0
            cy = (a.center[1] + b.center[1]) / 2.0
            members = a.junctions + b.junctions
            cover = 2.0 * max(
                max(abs(x - cx), abs(y - cy)) for x, y in members
            )
            if cover > max_size:
                continue  # cannot cover the member junctions within the clamp
            size = min(max(3.0 * dist, a.size, b.size, cover), max_size)
            merged = PatchSpec(center=(cx, cy), size=size, junctions=members)
            patches = [p for k, p in enumerate(patches) if k not in (i, j)]
            patches.append(merged)
            merged_any = True
            break
        if not merged_any:
            break
    return sorted(patches, key=lambda p: (p.center[1], p.center[0]))


def run_patch(
    img: Image2D,
    seg: SoftSegmentation,
    spec: PatchSpec,
    params: EngineParams,
    cache_dir=None,
) -> PatchResult:
    """Analyze one patch: local threshold, lift, kernel, spectral grouping."""
    x0, y0, x1, y1 = spec.rect(img.width, img.height)
    if x1 - x0 < 7 or y1 - y0 < 7:
        raise PatchError(f"patch at {spec.center} too small after clipping")
    img_crop = Image2D(img.data[y0:y1, x0:x1])
    seg_crop = Image2D(seg.data[y0:y1, x0:x1])

    try:
        mask = otsu_threshold(seg_crop)
    except ValueError as exc:
        raise PatchError(f"local threshold failed: {exc}") from exc
    if int(mask.sum()) < 2:
        raise PatchError("fewer than 2 vessel pixels in patch")

    wavelet_size = min(img_crop.height, img_crop.width)
    if wavelet_size % 2 == 0:
        wavelet_size -= 1
    stack = build_cake_wavelets(
        params.n_theta,
        wavelet_size,
        spatial_order=params.wavelet_order,
        inflection=params.inflection,
    )
    score = lift(img_crop, stack)
    points = dominant_orientations(score, mask, img_crop)

    kp = params.kernel_params(spec.size)
    grid = load_or_estimate(kp, cache_dir=cache_dir, backend=params.backend)

    aff = build_affinity(points, grid, params.intensity_params(),
                         backend=params.backend)
    degrees = aff.matrix.sum(axis=1)
    keep = degrees > 0.0
    if int(keep.sum()) < 2:
        raise PatchError("fewer than 2 connectable vessel pixels in patch")

    sub = aff.matrix[np.ix_(keep, keep)]
    result = eigs(normalize(sub)).select(params.tau, params.epsilon)
    labeling = assign_clusters(result, params.min_size)

    labels = np.full(points.n, NOISE, dtype=np.int64)
    labels[keep] = labeling.labels
    return PatchResult(
        spec=spec,
        xs=points.xs + x0,
        ys=points.ys + y0,
        labels=labels,
        cluster_sizes=labeling.cluster_sizes,
        eigenvalues=result.eigenvalues,
        K=result.K,
        params=params,
        kernel_H=kp.H,
    )


@dataclass(frozen=True)
class PatchOutcome:
    """Result or failure of one patch within an image run."""

    patch_id: int
    spec: PatchSpec
    result: Optional[PatchResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def run_image(
    img: Image2D,
    seg: SoftSegmentation,
    params: EngineParams,
    cache_dir=None,
    initial_patch_size: float = 10.0,
    max_patch_size: float = 100.0,
    overrides: Optional[dict] = None,
) -> list:
    """Full chain over a whole image; one outcome per junction patch.

    ``overrides`` maps patch ids to EngineParams replacing the defaults for
    that patch (the per-patch tuning hook).
    """
    if img.shape != seg.shape:
        raise ValueError("image and segmentation dimensions disagree")
    try:
        hard = otsu_threshold(seg)
    except ValueError:
        return []
    if not hard.any():
        return []
    skel = skeletonize(hard)
    junctions = detect_junctions(skel)
    patches = build_patches(junctions, initial_patch_size, max_patch_size)
    outcomes = []
    for pid, spec in enumerate(patches):
        p = overrides.get(pid, params) if overrides else params
        try:
            result = run_patch(img, seg, spec, p, cache_dir=cache_dir)
            outcomes.append(PatchOutcome(patch_id=pid, spec=spec, result=result))
        except PatchError as exc:
            outcomes.append(PatchOutcome(patch_id=pid, spec=spec, error=str(exc)))
    return outcomes
