"""Affinity construction, random-walk normalization and spectral grouping.

The pairwise connectivity of all lifted points forms a dense symmetric
affinity matrix; its row-normalized version is a random-walk transition
matrix whose leading eigenvectors mark the salient groups.  The number of
informative eigenvectors is chosen by thresholding the exponentiated
spectrum, points take the label of their strongest eigenvector, and groups
below a minimum size are declared noise.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, qr

from .kernel import IntensityParams, KernelGrid, pairwise_omega_f
from .lifting import LiftedPointSet

NOISE = -1
# eigenvalues closer than this are treated as one degenerate group whose
# eigenbasis is only defined up to rotation
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class AffinityMatrix:
    """Dense symmetric nonnegative pairwise-connectivity matrix."""

    matrix: np.ndarray
    points: LiftedPointSet = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_affinity(
    points: LiftedPointSet,
    grid: KernelGrid,
    ip: IntensityParams,
    backend: str = "auto",
) -> AffinityMatrix:
    """Evaluate the combined kernel for every point pair.

    Off-diagonal entries are the kernel values; each diagonal entry is set
    to the row maximum (self-affinity at least as strong as the best
    neighbor), which keeps the degree matrix invertible for all but fully
    isolated points.
    """
    if points.n < 2:
        raise ValueError("affinity needs at least 2 lifted points")
    mat = pairwise_omega_f(
        grid,
        points.xs,
        points.ys,
        points.thetas,
        points.intensities,
        ip,
        backend=backend,
    )
    np.fill_diagonal(mat, mat.max(axis=1))
    return AffinityMatrix(matrix=mat, points=points)


@dataclass(frozen=True)
class NormalizedAffinity:
    """Row-stochastic matrix P = D^-1 A together with the degrees."""

    P: np.ndarray
    degrees: np.ndarray
    affinity: np.ndarray


def normalize(A) -> NormalizedAffinity:
    """Row-normalize an affinity matrix into a random-walk transition matrix."""
    mat = A.matrix if isinstance(A, AffinityMatrix) else np.asarray(A, dtype=np.float64)
    degrees = mat.sum(axis=1)
    if np.any(degrees <= 0.0):
        idx = np.nonzero(degrees <= 0.0)[0]
        raise ValueError(
            f"zero affinity row(s) {idx.tolist()}: drop the isolated point(s) "
            "before normalizing"
        )
    return NormalizedAffinity(P=mat / degrees[:, None], degrees=degrees, affinity=mat)


@dataclass(frozen=True)
class SpectralResult:
    """Descending spectrum of P plus, after selection, the first K eigenvectors.

    Eigenvectors are returned in the random-walk basis (``P u = lambda u``),
    sign-fixed so every column has nonnegative sum.
    """

    eigenvalues: np.ndarray
    degrees: np.ndarray
    vectors_sym: np.ndarray = field(repr=False)
    K: int = 0
    tau: int = 0
    epsilon: float = 0.0
    eigenvectors: np.ndarray = None

    def select(self, tau: int, epsilon: float) -> "SpectralResult":
        """Pick K by the exponentiated-spectrum rule and materialize vectors."""
        K = select_k(self.eigenvalues, tau, epsilon)
        V = self.vectors_sym[:, :K].copy()
        for a, b in _degenerate_groups(self.eigenvalues, K):
            V[:, a:b] = _canonical_basis(V[:, a:b])
        u = V / np.sqrt(self.degrees)[:, None]
        flips = u.sum(axis=0) < 0.0
        u[:, flips] *= -1.0
        return SpectralResult(
            eigenvalues=self.eigenvalues,
            degrees=self.degrees,
            vectors_sym=self.vectors_sym,
            K=K,
            tau=tau,
            epsilon=epsilon,
            eigenvectors=u,
        )


def eigs(norm: NormalizedAffinity) -> SpectralResult:
    """Full real spectrum of P via the symmetric similarity transform.

    P is similar to S = D^-1/2 A D^-1/2, so a symmetric solver gives the
    real eigenvalues directly and the eigenvectors map back through
    D^-1/2.  Never eigendecomposes P itself.
    """
    d = norm.degrees
    S = norm.affinity / np.sqrt(np.outer(d, d))
    try:
        w, v = eigh(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver failed on {S.shape[0]} points: {exc}") from exc
    order = np.argsort(w)[::-1]
    return SpectralResult(
        eigenvalues=w[order], degrees=d, vectors_sym=v[:, order]
    )


def select_k(eigenvalues: np.ndarray, tau: int, epsilon: float) -> int:
    """Largest K with lambda_i^tau above 1 - epsilon for all i <= K.

    Raising the spectrum to a large integer power widens the gap between
    eigenvalues near one and the rest, so the threshold can sit anywhere in
    a wide band without changing K.
    """
    if tau < 1 or int(tau) != tau:
        raise ValueError("tau must be a positive integer")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    lam = np.clip(np.asarray(eigenvalues, dtype=np.float64), 0.0, None)
    above = lam**int(tau) > 1.0 - epsilon
    K = int(np.sum(above))  # descending spectrum makes the set a prefix
    return max(K, 1)


def _degenerate_groups(eigenvalues, K):
    """Index ranges [a, b) of numerically equal eigenvalues within the top K."""
    groups = []
    start = 0
    for i in range(1, K + 1):
        if i == K or abs(eigenvalues[i] - eigenvalues[i - 1]) > DEGENERACY_TOL:
            if i - start > 1:
                groups.append((start, i))
            start = i
    return groups


def _canonical_basis(V: np.ndarray) -> np.ndarray:
    """Rotate a degenerate orthonormal eigenbasis to a pivot-anchored one.

    Within a degenerate eigenspace the returned basis is arbitrary up to
    rotation, which breaks per-point argmax assignment.  Projector columns
    at pivot points (chosen by rank-revealing QR) localize the basis: for
    exactly disconnected groups each canonical vector is supported on one
    component.
    """
    g = V.shape[1]
    _, _, piv = qr(V.T, pivoting=True)
    anchors = piv[:g]
    W = V @ V[anchors].T
    Q, _ = np.linalg.qr(W)
    return Q


@dataclass(frozen=True)
class ClusterLabeling:
    """Per-point cluster ids (1-based) with NOISE = -1 for dropped groups."""

    labels: np.ndarray
    cluster_sizes: dict
    min_size: int

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)


def assign_clusters(result: SpectralResult, min_size: int = 5) -> ClusterLabeling:
    """Label each point by its strongest selected eigenvector.

    Ties go to the smaller eigenvector index.  Groups smaller than
    ``min_size`` are relabeled NOISE.
    """
    if result.K < 1 or result.eigenvectors is None:
        raise ValueError("run select() before assigning clusters")
    labels = np.argmax(result.eigenvectors, axis=1).astype(np.int64) + 1
    sizes = {}
    for cid in range(1, result.K + 1):
        count = int(np.sum(labels == cid))
        if 0 < count < min_size:
            labels[labels == cid] = NOISE
        elif count > 0:
            sizes[cid] = count
    return ClusterLabeling(labels=labels, cluster_sizes=sizes, min_size=min_size)
