"""Stochastic connectivity kernel over relative poses, plus intensity kernel.

The geometric kernel is the path-histogram estimate of the fundamental
solution of the direction process: particles advance along their current
heading while the heading diffuses.  Each of ``n_paths`` forward paths from
the origin pose deposits one count per step into the nearest
(dx, dy, angle) bin; the symmetrized, direction-folded lookup of that
histogram scores how well two oriented pixels continue each other.  The
intensity kernel is a Gaussian in the intensity difference, and the combined
kernel is their product.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit, resolve_backend

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the Monte-Carlo kernel estimate.

    ``sigma`` is the per-step heading diffusion (the angle increment per step
    is ``delta_s * N(0, sigma^2)``); ``grid_radius`` defaults to the maximal
    reach ``ceil(H * delta_s)`` so no path mass escapes the histogram.
    """

    H: int
    n_paths: int
    sigma: float
    delta_s: float = 1.0
    n_theta: int = 24
    grid_radius: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("H must be >= 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.delta_s > 0:
            raise ValueError("delta_s must be > 0")
        if self.n_theta < 2:
            raise ValueError("n_theta must be >= 2")
        if self.grid_radius == 0:
            object.__setattr__(
                self, "grid_radius", int(math.ceil(self.H * self.delta_s))
            )
        if self.grid_radius < 1:
            raise ValueError("grid_radius must be >= 1")
        if self.grid_radius < self.H * self.delta_s:
            warnings.warn(
                "grid_radius below H*delta_s: path mass will be truncated",
                stacklevel=2,
            )

    def cache_key(self) -> str:
        blob = json.dumps(
            {
                "H": self.H,
                "n_paths": self.n_paths,
                "sigma": self.sigma,
                "delta_s": self.delta_s,
                "n_theta": self.n_theta,
                "grid_radius": self.grid_radius,
                "seed": self.seed,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IntensityParams:
    """Bandwidth of the Gaussian intensity-similarity kernel."""

    sigma2: float = 0.1

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")


@dataclass(frozen=True)
class KernelGrid:
    """Path histogram over (dx, dy, angle) with the source fixed at the origin.

    ``histogram[dx + R, dy + R, m]`` counts path samples; the angular axis
    has ``2 * n_theta`` bins of width ``pi / n_theta`` covering the full
    circle (bin m centered at ``m * pi / n_theta``).
    """

    histogram: np.ndarray
    params: KernelParams
    normalization: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "normalization", int(self.histogram.sum()))

    @property
    def radius(self) -> int:
        return self.params.grid_radius

    def projection(self) -> np.ndarray:
        """Max over angles, transposed to image layout (rows = dy)."""
        return self.histogram.max(axis=2).T

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            histogram=self.histogram,
            params=json.dumps(
                {
                    "H": self.params.H,
                    "n_paths": self.params.n_paths,
                    "sigma": self.params.sigma,
                    "delta_s": self.params.delta_s,
                    "n_theta": self.params.n_theta,
                    "grid_radius": self.params.grid_radius,
                    "seed": self.params.seed,
                }
            ),
        )

    @staticmethod
    def load(path) -> "KernelGrid":
        with np.load(path, allow_pickle=False) as data:
            params = KernelParams(**json.loads(str(data["params"])))
            return KernelGrid(histogram=data["histogram"], params=params)


@njit(cache=True)
def _simulate_loop(normals, delta_s, sigma, radius, n_bins, hist):
    n, steps = normals.shape
    dtheta = TWO_PI / n_bins
    for i in range(n):
        x = 0.0
        y = 0.0
        th = 0.0
        for s in range(steps):
            x += delta_s * math.cos(th)
            y += delta_s * math.sin(th)
            th += delta_s * sigma * normals[i, s]
            ix = int(math.floor(x + 0.5))
            iy = int(math.floor(y + 0.5))
            if -radius <= ix <= radius and -radius <= iy <= radius:
                it = int(math.floor((th % TWO_PI) / dtheta + 0.5)) % n_bins
                hist[ix + radius, iy + radius, it] += 1


def _simulate_numpy(normals, delta_s, sigma, radius, n_bins):
    n, steps = normals.shape
    dtheta = TWO_PI / n_bins
    inc = delta_s * sigma * normals
    th_after = np.cumsum(inc, axis=1)
    th_move = np.concatenate([np.zeros((n, 1)), th_after[:, :-1]], axis=1)
    x = np.cumsum(delta_s * np.cos(th_move), axis=1)
    y = np.cumsum(delta_s * np.sin(th_move), axis=1)
    ix = np.floor(x + 0.5).astype(np.int64)
    iy = np.floor(y + 0.5).astype(np.int64)
    it = np.floor((th_after % TWO_PI) / dtheta + 0.5).astype(np.int64) % n_bins
    keep = (np.abs(ix) <= radius) & (np.abs(iy) <= radius)
    side = 2 * radius + 1
    flat = ((ix[keep] + radius) * side + (iy[keep] + radius)) * n_bins + it[keep]
    counts = np.bincount(flat, minlength=side * side * n_bins)
    return counts.reshape(side, side, n_bins)


def estimate_kernel(params: KernelParams, backend: str = "auto") -> KernelGrid:
    """Run the forward path simulation and histogram every visited pose.

    Deterministic for a fixed seed: the Gaussian increments are drawn up
    front from one generator, so the numba and numpy backends bin exactly
    the same paths.
    """
    rng = np.random.default_rng(params.seed)
    normals = rng.standard_normal((params.n_paths, params.H))
    n_bins = 2 * params.n_theta
    if resolve_backend(backend) == "numba":
        side = 2 * params.grid_radius + 1
        hist = np.zeros((side, side, n_bins), dtype=np.int64)
        _simulate_loop(
            normals, params.delta_s, params.sigma, params.grid_radius, n_bins, hist
        )
    else:
        hist = _simulate_numpy(
            normals, params.delta_s, params.sigma, params.grid_radius, n_bins
        )
    return KernelGrid(histogram=hist, params=params)


def load_or_estimate(params: KernelParams, cache_dir=None, backend: str = "auto"):
    """Fetch the grid from the cache directory, estimating and storing on miss."""
    if cache_dir is None:
        return estimate_kernel(params, backend)
    from pathlib import Path

    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"kernel-{params.cache_key()}.npz"
    if path.is_file():
        return KernelGrid.load(path)
    grid = estimate_kernel(params, backend)
    grid.save(path)
    return grid


def _gamma(hist, radius, n_bins, dx, dy, dir_a, dir_b):
    """Directed histogram lookup of pose b relative to pose a (nearest bin)."""
    ca = math.cos(dir_a)
    sa = math.sin(dir_a)
    rx = ca * dx + sa * dy
    ry = -sa * dx + ca * dy
    ix = int(math.floor(rx + 0.5))
    iy = int(math.floor(ry + 0.5))
    if ix < -radius or ix > radius or iy < -radius or iy > radius:
        return 0.0
    rt = (dir_b - dir_a) % TWO_PI
    it = int(math.floor(rt / (TWO_PI / n_bins) + 0.5)) % n_bins
    return float(hist[ix + radius, iy + radius, it])


def _omega1_counts(hist, radius, n_bins, xa, ya, tha, xb, yb, thb):
    """Symmetrized, direction-folded kernel value in raw counts.

    Dominant angles are pi-periodic while the process is directed, so the
    best of the four direction assignments is kept; each candidate is the
    symmetrized average of the two travel directions.
    """
    best = 0.0
    for da in (0.0, math.pi):
        for db in (0.0, math.pi):
            fwd = _gamma(hist, radius, n_bins, xb - xa, yb - ya, tha + da, thb + db)
            bwd = _gamma(hist, radius, n_bins, xa - xb, ya - yb, thb + db, tha + da)
            v = 0.5 * (fwd + bwd)
            if v > best:
                best = v
    return best


def omega1(grid: KernelGrid, a, b) -> float:
    """Geometric connectivity of two lifted points (x, y, theta); symmetric."""
    xa, ya, tha = a[0], a[1], a[2]
    xb, yb, thb = b[0], b[1], b[2]
    counts = _omega1_counts(
        grid.histogram, grid.radius, grid.histogram.shape[2],
        float(xa), float(ya), float(tha), float(xb), float(yb), float(thb),
    )
    return counts / grid.normalization


def omega2(f_i: float, f_j: float, p: IntensityParams) -> float:
    """Gaussian similarity of two intensities; 1 iff they are equal."""
    df = f_i - f_j
    return math.exp(-(df * df) / (2.0 * p.sigma2 * p.sigma2))


def omega_f(grid: KernelGrid, a, b, p: IntensityParams) -> float:
    """Combined kernel: product of the geometric and intensity components."""
    w1 = omega1(grid, a, b)
    if w1 == 0.0:
        return 0.0
    return w1 * omega2(float(a[3]), float(b[3]), p)


@njit(cache=True)
def _pairwise_omega1_loop(hist, radius, n_bins, xs, ys, ths, out):
    n = xs.shape[0]
    dtheta = TWO_PI / n_bins
    for i in range(n):
        for j in range(i + 1, n):
            best = 0.0
            for da in (0.0, math.pi):
                for db in (0.0, math.pi):
                    dir_a = ths[i] + da
                    dir_b = ths[j] + db
                    v = 0.0
                    # forward: j in i's frame
                    ca = math.cos(dir_a)
                    sa = math.sin(dir_a)
                    dx = xs[j] - xs[i]
                    dy = ys[j] - ys[i]
                    rx = ca * dx + sa * dy
                    ry = -sa * dx + ca * dy
                    ix = int(math.floor(rx + 0.5))
                    iy = int(math.floor(ry + 0.5))
                    if -radius <= ix <= radius and -radius <= iy <= radius:
                        rt = (dir_b - dir_a) % TWO_PI
                        it = int(math.floor(rt / dtheta + 0.5)) % n_bins
                        v += float(hist[ix + radius, iy + radius, it])
                    # backward: i in j's frame
                    cb = math.cos(dir_b)
                    sb = math.sin(dir_b)
                    rx = cb * (-dx) + sb * (-dy)
                    ry = -sb * (-dx) + cb * (-dy)
                    ix = int(math.floor(rx + 0.5))
                    iy = int(math.floor(ry + 0.5))
                    if -radius <= ix <= radius and -radius <= iy <= radius:
                        rt = (dir_a - dir_b) % TWO_PI
                        it = int(math.floor(rt / dtheta + 0.5)) % n_bins
                        v += float(hist[ix + radius, iy + radius, it])
                    v *= 0.5
                    if v > best:
                        best = v
            out[i, j] = best
            out[j, i] = best


def _gamma_vec(hist, radius, n_bins, dx, dy, dir_a, dir_b):
    ca = np.cos(dir_a)
    sa = np.sin(dir_a)
    rx = ca * dx + sa * dy
    ry = -sa * dx + ca * dy
    ix = np.floor(rx + 0.5).astype(np.int64)
    iy = np.floor(ry + 0.5).astype(np.int64)
    ok = (np.abs(ix) <= radius) & (np.abs(iy) <= radius)
    rt = (dir_b - dir_a) % TWO_PI
    it = np.floor(rt / (TWO_PI / n_bins) + 0.5).astype(np.int64) % n_bins
    ix = np.where(ok, ix, 0)
    iy = np.where(ok, iy, 0)
    vals = hist[ix + radius, iy + radius, it].astype(np.float64)
    return np.where(ok, vals, 0.0)


def _pairwise_omega1_numpy(hist, radius, n_bins, xs, ys, ths):
    n = xs.shape[0]
    dx = xs[None, :] - xs[:, None]
    dy = ys[None, :] - ys[:, None]
    best = np.zeros((n, n))
    for da in (0.0, math.pi):
        for db in (0.0, math.pi):
            dir_a = (ths + da)[:, None]
            dir_b = (ths + db)[None, :]
            fwd = _gamma_vec(hist, radius, n_bins, dx, dy, dir_a, dir_b)
            bwd = _gamma_vec(hist, radius, n_bins, -dx, -dy, dir_b, dir_a)
            np.maximum(best, 0.5 * (fwd + bwd), out=best)
    np.fill_diagonal(best, 0.0)
    return best


def pairwise_omega_f(
    grid: KernelGrid,
    xs: np.ndarray,
    ys: np.ndarray,
    thetas: np.ndarray,
    intensities: np.ndarray,
    ip: IntensityParams,
    backend: str = "auto",
) -> np.ndarray:
    """Dense matrix of combined kernel values (zero diagonal), normalized.

    Hot path of the whole engine: O(n^2) histogram lookups.  Only the
    geometric lookups run in the selected backend; the intensity factor is
    applied by shared numpy code, so both backends return the same matrix.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    ths = np.ascontiguousarray(thetas, dtype=np.float64)
    fs = np.ascontiguousarray(intensities, dtype=np.float64)
    if resolve_backend(backend) == "numba":
        best = np.zeros((len(xs), len(xs)))
        _pairwise_omega1_loop(
            grid.histogram, grid.radius, grid.histogram.shape[2],
            xs, ys, ths, best,
        )
    else:
        best = _pairwise_omega1_numpy(
            grid.histogram, grid.radius, grid.histogram.shape[2], xs, ys, ths
        )
    df = fs[:, None] - fs[None, :]
    inv_two_s2 = 1.0 / (2.0 * ip.sigma2 * ip.sigma2)
    out = np.where(best > 0.0, best * np.exp(-(df * df) * inv_two_s2), 0.0)
    return out / grid.normalization
