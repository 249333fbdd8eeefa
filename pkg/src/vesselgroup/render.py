"""Rendering and run artifacts: overlays, label maps, spectrum plots, manifest.

Everything here is presentation; the engine modules stay free of I/O so
these writers can be exercised independently.
"""

import json
from dataclasses import asdict
from pathlib import Path

import matplotlib
import numpy as np
from PIL import Image as PILImage

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (needs the Agg backend set first)

from .imageio import Image2D
from .kernel import KernelGrid
from .spectral import NOISE

# distinct overlay colors, assigned to clusters by decreasing size
PALETTE = (
    (230, 60, 60),
    (60, 120, 230),
    (60, 200, 90),
    (240, 180, 40),
    (170, 80, 220),
    (70, 210, 220),
    (240, 110, 180),
    (150, 220, 60),
    (250, 140, 50),
    (110, 110, 250),
)
NOISE_COLOR = (120, 120, 120)
NOISE_PIXEL_VALUE = 255  # labels-map code for removed points


def color_for_rank(rank: int) -> tuple:
    return PALETTE[rank % len(PALETTE)]


def size_ranked_ids(cluster_sizes: dict) -> list:
    """Cluster ids ordered by decreasing size (ties by id) for stable colors."""
    return sorted(cluster_sizes, key=lambda cid: (-cluster_sizes[cid], cid))


def save_kernel_projection(grid: KernelGrid, path) -> None:
    """Write the max-over-angles projection of the kernel as a PNG."""
    proj = grid.projection().astype(np.float64)
    peak = proj.max()
    if peak > 0:
        proj = proj / peak
    PILImage.fromarray((proj * 255).astype(np.uint8), mode="L").save(path)


def cluster_overlay(img: Image2D, xs, ys, labels, cluster_sizes: dict) -> np.ndarray:
    """RGB overlay: grayscale base with cluster-colored points."""
    base = (img.data * 255).astype(np.uint8)
    rgb = np.stack([base] * 3, axis=2)
    colors = {
        cid: color_for_rank(rank)
        for rank, cid in enumerate(size_ranked_ids(cluster_sizes))
    }
    for x, y, lab in zip(xs, ys, labels):
        rgb[y, x] = colors.get(int(lab), NOISE_COLOR)
    return rgb


def save_cluster_overlay(img, xs, ys, labels, cluster_sizes, path) -> None:
    rgb = cluster_overlay(img, xs, ys, labels, cluster_sizes)
    PILImage.fromarray(rgb, mode="RGB").save(path)


def save_labels_map(shape, xs, ys, labels, path) -> None:
    """Machine-readable label image: 0 background, ids 1.., 255 noise."""
    out = np.zeros(shape, dtype=np.uint8)
    for x, y, lab in zip(xs, ys, labels):
        out[y, x] = NOISE_PIXEL_VALUE if lab == NOISE else int(lab)
    PILImage.fromarray(out, mode="L").save(path)


def save_orientation_map(shape, xs, ys, thetas, path) -> None:
    """Angle-colored map of dominant orientations (hue = angle / pi)."""
    from matplotlib.colors import hsv_to_rgb

    hsv = np.zeros(shape + (3,))
    for x, y, th in zip(xs, ys, thetas):
        hsv[y, x] = ((th % np.pi) / np.pi, 1.0, 1.0)
    rgb = (hsv_to_rgb(hsv) * 255).astype(np.uint8)
    PILImage.fromarray(rgb, mode="RGB").save(path)


def save_score_slices(score, directory) -> list:
    """Dump |Re| of every orientation slice as PNGs; returns file names."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    mags = np.abs(score.volume.real)
    peak = mags.max() or 1.0
    for k in range(score.n_orientations):
        name = f"slice-{k:02d}.png"
        arr = (mags[:, :, k] / peak * 255).astype(np.uint8)
        PILImage.fromarray(arr, mode="L").save(directory / name)
        names.append(name)
    return names


def save_spectrum_plot(eigenvalues, tau, epsilon, path, exponentiate=True) -> None:
    """Plot the (exponentiated) spectrum with the selection threshold line."""
    lam = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
    values = lam ** int(tau) if exponentiate else lam
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(np.arange(1, len(values) + 1), values, "o", markersize=3)
    ax.axhline(1.0 - epsilon, color="red", linewidth=1)
    ax.set_xlabel("index")
    ax.set_ylabel(f"eigenvalue^{tau}" if exponentiate else "eigenvalue")
    ax.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_eigenvalues_csv(eigenvalues, path) -> None:
    lines = ["index,eigenvalue"]
    lines += [f"{i + 1},{float(v)!r}" for i, v in enumerate(eigenvalues)]
    Path(path).write_text("\n".join(lines) + "\n")


def save_labels_json(xs, ys, labels, path) -> None:
    """Point-to-label map as JSON, keyed "x,y"."""
    mapping = {
        f"{int(x)},{int(y)}": int(lab) for x, y, lab in zip(xs, ys, labels)
    }
    Path(path).write_text(json.dumps(mapping, sort_keys=True, indent=1))


MANIFEST_EIGENVALUES_TOP = 50


def outcome_record(outcome) -> dict:
    """Manifest entry for one patch outcome (stable field order via sort)."""
    spec = outcome.spec
    rec = {
        "id": outcome.patch_id,
        "center": [float(spec.center[0]), float(spec.center[1])],
        "size": float(spec.size),
        "junctions": [[float(x), float(y)] for x, y in spec.junctions],
    }
    if outcome.ok:
        res = outcome.result
        rec.update(
            status="ok",
            K=int(res.K),
            n_clusters=int(res.n_clusters),
            cluster_sizes={str(k): int(v) for k, v in res.cluster_sizes.items()},
            kernel_H=int(res.kernel_H),
            n_points=int(len(res.xs)),
            eigenvalues_top=[
                float(v) for v in res.eigenvalues[:MANIFEST_EIGENVALUES_TOP]
            ],
        )
    else:
        rec.update(status="error", error=outcome.error)
    return rec


def write_run_outputs(outcomes, img: Image2D, params, out_dir) -> Path:
    """Write manifest.json plus per-patch overlay and label-map PNGs.

    Returns the manifest path.  The manifest is serialized with sorted keys
    so identical runs produce byte-identical files.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for outcome in outcomes:
        rec = outcome_record(outcome)
        if outcome.ok:
            res = outcome.result
            overlay_name = f"patch-{outcome.patch_id:03d}-overlay.png"
            labels_name = f"patch-{outcome.patch_id:03d}-labels.png"
            save_cluster_overlay(
                img, res.xs, res.ys, res.labels, res.cluster_sizes,
                out_dir / overlay_name,
            )
            save_labels_map(img.shape, res.xs, res.ys, res.labels,
                            out_dir / labels_name)
            rec["overlay_png"] = overlay_name
            rec["labels_png"] = labels_name
        records.append(rec)
    manifest = {
        "engine": asdict(params),
        "image": {"width": img.width, "height": img.height},
        "patches": records,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2))
    return path
