"""Command-line entry points: run, kernel, serve."""

import argparse
import os
import sys
from pathlib import Path

from .config import apply_params, load_config
from .imageio import load_grayscale
from .kernel import KernelParams, load_or_estimate
from .pipeline import EngineParams, run_image
from .render import save_kernel_projection, write_run_outputs

_PARAM_FLAGS = (
    # (flag, key, type, help)
    ("--n-theta", "n_theta", int, "orientations over [0, pi)"),
    ("--H", "H", int, "random-path steps (default: round(patch size / 3))"),
    ("--n-paths", "n_paths", int, "Monte-Carlo path count"),
    ("--sigma", "sigma", float, "heading diffusion per step"),
    ("--sigma2", "sigma2", float, "intensity kernel bandwidth"),
    ("--delta-s", "delta_s", float, "step length in pixels"),
    ("--epsilon", "epsilon", float, "spectrum selection threshold"),
    ("--tau", "tau", int, "spectrum exponent"),
    ("--min-size", "min_size", int, "minimum surviving cluster size"),
    ("--seed", "seed", int, "RNG seed"),
    ("--backend", "backend", str, "numba | numpy | auto"),
)


def _add_param_flags(parser):
    for flag, key, typ, help_text in _PARAM_FLAGS:
        parser.add_argument(flag, dest=key, type=typ, default=None, help=help_text)


def _collect_params(args, file_defaults):
    updates = dict(file_defaults)
    for _, key, _, _ in _PARAM_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            updates[key] = value
    return apply_params(EngineParams(), updates)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vesselgroup",
        description="Group retinal vessel pixels into perceptual units",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="analyze a whole image pair")
    run.add_argument("--image", required=True, help="enhanced grayscale image")
    run.add_argument("--seg", required=True, help="soft segmentation image")
    run.add_argument(
        "--out",
        default=None,
        help="output directory (default: $VESSELGROUP_OUT or ./vesselgroup-out)",
    )
    run.add_argument("--config", default=None, help="config file (INI grammar)")
    run.add_argument("--cache-dir", default=None, help="kernel cache directory")
    run.add_argument("--initial-patch-size", type=float, default=10.0)
    run.add_argument("--max-patch-size", type=float, default=100.0)
    _add_param_flags(run)

    ker = sub.add_parser("kernel", help="estimate and cache a connectivity kernel")
    ker.add_argument("--H", dest="H", type=int, required=True)
    ker.add_argument("--sigma", type=float, required=True)
    ker.add_argument("--n", dest="n_paths", type=int, default=100000)
    ker.add_argument("--n-theta", dest="n_theta", type=int, default=24)
    ker.add_argument("--delta-s", dest="delta_s", type=float, default=1.0)
    ker.add_argument("--grid-radius", type=int, default=0)
    ker.add_argument("--seed", type=int, default=0)
    ker.add_argument("--cache-dir", default="kernel-cache")
    ker.add_argument("--png", default=None, help="write a max-projection PNG")
    ker.add_argument("--backend", default="auto")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--image", required=True)
    srv.add_argument("--seg", required=True)
    srv.add_argument("--config", default=None)
    srv.add_argument("--cache-dir", default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--initial-patch-size", type=float, default=10.0)
    srv.add_argument("--max-patch-size", type=float, default=100.0)
    _add_param_flags(srv)
    return parser


def cmd_run(args) -> int:
    out_dir = args.out or os.environ.get("VESSELGROUP_OUT") or "vesselgroup-out"
    try:
        file_defaults, per_patch_raw = (
            load_config(args.config) if args.config else ({}, {})
        )
        params = _collect_params(args, file_defaults)
        img = load_grayscale(args.image)
        seg = load_grayscale(args.seg)
        overrides = {
            pid: apply_params(params, upd) for pid, upd in per_patch_raw.items()
        }
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outcomes = run_image(
        img,
        seg,
        params,
        cache_dir=args.cache_dir,
        initial_patch_size=args.initial_patch_size,
        max_patch_size=args.max_patch_size,
        overrides=overrides,
    )
    manifest = write_run_outputs(outcomes, img, params, out_dir)
    failed = [o for o in outcomes if not o.ok]
    print(f"wrote {manifest} ({len(outcomes)} patches, {len(failed)} failed)")
    for o in failed:
        print(f"  patch {o.patch_id} at {o.spec.center}: {o.error}", file=sys.stderr)
    return 1 if failed else 0


def cmd_kernel(args) -> int:
    try:
        kp = KernelParams(
            H=args.H,
            n_paths=args.n_paths,
            sigma=args.sigma,
            delta_s=args.delta_s,
            n_theta=args.n_theta,
            grid_radius=args.grid_radius,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    grid = load_or_estimate(kp, cache_dir=args.cache_dir, backend=args.backend)
    cache_file = Path(args.cache_dir) / f"kernel-{kp.cache_key()}.npz"
    print(f"kernel {kp.cache_key()}: mass {grid.normalization} at {cache_file}")
    if args.png:
        save_kernel_projection(grid, args.png)
        print(f"projection written to {args.png}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        file_defaults, _ = load_config(args.config) if args.config else ({}, {})
        params = _collect_params(args, file_defaults)
        img = load_grayscale(args.image)
        seg = load_grayscale(args.seg)
        app = create_app(
            img,
            seg,
            params,
            cache_dir=args.cache_dir,
            initial_patch_size=args.initial_patch_size,
            max_patch_size=args.max_patch_size,
        )
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "kernel":
        return cmd_kernel(args)
    return cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
