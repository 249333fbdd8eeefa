"""HTTP API exposing the engine to scripts and the parameter-tuning UI.

The service loads one image/segmentation pair at startup, derives the
junction patches once, and then answers stateless clustering requests
against them.  Responses are serialized with sorted keys so identical
requests yield byte-identical JSON.
"""

import io
import json
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field
from PIL import Image as PILImage

from .config import apply_params
from .imageio import Image2D, otsu_threshold
from .kernel import KernelParams, load_or_estimate
from .pipeline import (
    EngineParams,
    PatchError,
    PatchSpec,
    build_patches,
    detect_junctions,
    run_patch,
    skeletonize,
)


class ClusterRequest(BaseModel):
    """Per-request engine parameters; omitted fields take server defaults."""

    H: Optional[int] = Field(default=None, ge=1)
    n_paths: Optional[int] = Field(default=None, ge=1)
    sigma: Optional[float] = Field(default=None, gt=0)
    sigma2: Optional[float] = Field(default=None, gt=0)
    delta_s: Optional[float] = Field(default=None, gt=0)
    epsilon: Optional[float] = Field(default=None, gt=0, lt=1)
    tau: Optional[int] = Field(default=None, ge=1)
    min_size: Optional[int] = Field(default=None, ge=1)
    n_theta: Optional[int] = Field(default=None, ge=4)
    seed: Optional[int] = Field(default=None, ge=0)


def _json_response(payload: dict) -> Response:
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return Response(content=body, media_type="application/json")


def _png_response(array_u8: np.ndarray, mode: str = "L") -> Response:
    buf = io.BytesIO()
    PILImage.fromarray(array_u8, mode=mode).save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def compute_patches(seg: Image2D, initial_size: float, max_size: float):
    """Junction patches of the loaded pair (empty when nothing is found)."""
    try:
        hard = otsu_threshold(seg)
    except ValueError:
        return []
    if not hard.any():
        return []
    return build_patches(
        detect_junctions(skeletonize(hard)), initial_size, max_size
    )


def create_app(
    img: Image2D,
    seg: Image2D,
    defaults: EngineParams,
    cache_dir=None,
    initial_patch_size: float = 10.0,
    max_patch_size: float = 100.0,
    patches=None,
) -> FastAPI:
    """Build the service around one loaded image pair.

    ``patches`` may be supplied directly (e.g. one whole-image patch for a
    fixture); otherwise they come from the junction pipeline.
    """
    if img.shape != seg.shape:
        raise ValueError("image and segmentation dimensions disagree")
    if patches is None:
        patches = compute_patches(seg, initial_patch_size, max_patch_size)
    app = FastAPI(title="vesselgroup", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = {"img": img, "seg": seg, "defaults": defaults,
             "patches": list(patches), "cache_dir": cache_dir}

    def get_patch(patch_id: int) -> PatchSpec:
        if not 0 <= patch_id < len(state["patches"]):
            raise HTTPException(status_code=404, detail="no such patch")
        return state["patches"][patch_id]

    @app.get("/patches")
    def list_patches():
        records = [
            {
                "id": i,
                "center": [float(p.center[0]), float(p.center[1])],
                "size": float(p.size),
                "junctions": [[float(x), float(y)] for x, y in p.junctions],
            }
            for i, p in enumerate(state["patches"])
        ]
        return _json_response({"patches": records})

    @app.get("/patch/{patch_id}/image")
    def patch_image(patch_id: int):
        spec = get_patch(patch_id)
        x0, y0, x1, y1 = spec.rect(state["img"].width, state["img"].height)
        crop = (state["img"].data[y0:y1, x0:x1] * 255).astype(np.uint8)
        return _png_response(crop)

    @app.post("/patch/{patch_id}/cluster")
    def cluster_patch(patch_id: int, req: ClusterRequest):
        spec = get_patch(patch_id)
        updates = {k: v for k, v in req.model_dump().items() if v is not None}
        try:
            params = apply_params(state["defaults"], updates)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            res = run_patch(state["img"], state["seg"], spec, params,
                            cache_dir=state["cache_dir"])
        except PatchError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        lam = np.clip(res.eigenvalues[:50], 0.0, None)
        payload = {
            "patch_id": patch_id,
            "K": int(res.K),
            "n_clusters": int(res.n_clusters),
            "cluster_sizes": {str(k): int(v) for k, v in res.cluster_sizes.items()},
            "kernel_H": int(res.kernel_H),
            "labels": [
                [int(x), int(y), int(lab)]
                for x, y, lab in zip(res.xs, res.ys, res.labels)
            ],
            "eigenvalues": [float(v) for v in res.eigenvalues[:50]],
            "eigenvalues_pow": [float(v) for v in lam ** params.tau],
            "threshold": 1.0 - params.epsilon,
            "params_used": {
                "H": int(res.kernel_H),
                "n_paths": params.n_paths,
                "sigma": params.sigma,
                "sigma2": params.sigma2,
                "delta_s": params.delta_s,
                "epsilon": params.epsilon,
                "tau": params.tau,
                "min_size": params.min_size,
                "n_theta": params.n_theta,
                "seed": params.seed,
            },
        }
        return _json_response(payload)

    @app.get("/kernel/preview")
    def kernel_preview(
        H: int = 7,
        sigma: float = 0.05,
        n_paths: int = 100000,
        n_theta: int = 24,
        delta_s: float = 1.0,
        seed: int = 0,
    ):
        try:
            kp = KernelParams(H=H, n_paths=n_paths, sigma=sigma,
                              delta_s=delta_s, n_theta=n_theta, seed=seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        grid = load_or_estimate(kp, cache_dir=state["cache_dir"])
        proj = grid.projection().astype(np.float64)
        peak = proj.max()
        if peak > 0:
            proj = proj / peak
        return _png_response((proj * 255).astype(np.uint8))

    return app
