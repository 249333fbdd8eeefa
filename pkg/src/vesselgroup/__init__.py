"""Perceptual grouping of retinal vessel pixels.

Pixels of a segmented patch are lifted to positions-plus-orientations,
scored pairwise with a stochastically estimated connectivity kernel
combined with intensity similarity, and grouped by spectral clustering of
the normalized affinity matrix.  Each surviving group is one vessel.
"""

from .imageio import (
    Image2D,
    SoftSegmentation,
    load_grayscale,
    normalize_luminosity,
    otsu_threshold,
    save_grayscale,
)
from .kernel import (
    IntensityParams,
    KernelGrid,
    KernelParams,
    estimate_kernel,
    load_or_estimate,
    omega1,
    omega2,
    omega_f,
    pairwise_omega_f,
)
from .lifting import (
    LiftedPointSet,
    OrientationScore,
    WaveletStack,
    build_cake_wavelets,
    dominant_orientations,
    lift,
)
from .pipeline import (
    EngineParams,
    PatchError,
    PatchOutcome,
    PatchResult,
    PatchSpec,
    build_patches,
    detect_junctions,
    run_image,
    run_patch,
    skeletonize,
)
from .spectral import (
    NOISE,
    AffinityMatrix,
    ClusterLabeling,
    SpectralResult,
    assign_clusters,
    build_affinity,
    eigs,
    normalize,
    select_k,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "ClusterLabeling",
    "EngineParams",
    "Image2D",
    "IntensityParams",
    "KernelGrid",
    "KernelParams",
    "LiftedPointSet",
    "NOISE",
    "OrientationScore",
    "PatchError",
    "PatchOutcome",
    "PatchResult",
    "PatchSpec",
    "SoftSegmentation",
    "SpectralResult",
    "WaveletStack",
    "assign_clusters",
    "build_affinity",
    "build_cake_wavelets",
    "build_patches",
    "detect_junctions",
    "dominant_orientations",
    "eigs",
    "estimate_kernel",
    "lift",
    "load_grayscale",
    "load_or_estimate",
    "normalize",
    "normalize_luminosity",
    "omega1",
    "omega2",
    "omega_f",
    "otsu_threshold",
    "pairwise_omega_f",
    "run_image",
    "run_patch",
    "save_grayscale",
    "select_k",
    "skeletonize",
]
