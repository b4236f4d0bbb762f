"""Distribution distances over externally extracted feature sets.

Fréchet distance between Gaussian fits (FID-style) and the unbiased
polynomial-kernel MMD^2 block estimator (KID-style). Feature extraction
happens elsewhere; arrays arrive via CEMB files or directly as (N, D) data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BlockTooLarge, DimMismatch, NotSymmetric, TooFewSamples

SYMMETRY_TOL = 1e-9
SQRT_RESIDUAL_TOL = 1e-4
JITTER = 1e-6


@dataclass(frozen=True)
class FeatureSet:
    """N samples of D-dimensional features, row-major (N, D)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise DimMismatch(f"expected (N, D) array, got shape {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValueError("feature values must be finite")

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class KernelConfig:
    """Cubic polynomial kernel with block-wise unbiased estimation."""

    degree: int = 3
    gamma: float | None = None  # defaults to 1/D at call time
    coef0: float = 1.0
    block_size: int | None = None  # defaults to min(1000, N)
    blocks: int = 10
    seed: int = 0


@dataclass(frozen=True)
class KidResult:
    mean: float
    stddev: float
    block_size: int
    blocks: int
    seed: int


def gaussian_stats(features: FeatureSet) -> GaussianStats:
    """Sample mean and unbiased covariance, symmetry enforced."""
    if features.count < 2:
        raise TooFewSamples(f"need at least 2 samples, got {features.count}")
    data = features.data.astype(np.float64)
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (features.count - 1)
    cov = (cov + cov.T) / 2
    return GaussianStats(mean=mean, covariance=cov)


def matrix_sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Negative eigenvalues (numerical noise on PSD inputs) are clamped to zero.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected square matrix, got shape {m.shape}")
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    scale = max(float(np.abs(m).max()), 1.0)
    if asym > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"matrix asymmetry {asym:g} exceeds tolerance")
    sym = (m + m.T) / 2
    eigvals, eigvecs = np.linalg.eigh(sym)
    eigvals = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def _trace_sqrt_product(cov1: np.ndarray, cov2: np.ndarray) -> float:
    """Tr(sqrt(cov1 @ cov2)) through the symmetric form sqrt(cov1) cov2 sqrt(cov1).

    The similarity transform keeps the eigenproblem symmetric so the stable
    eigh solver applies; the trace is invariant under it.
    """
    a = matrix_sqrt_psd(cov1)
    inner = a @ cov2 @ a
    inner = (inner + inner.T) / 2
    eigvals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sqrt(eigvals).sum())


def _sqrt_residual(cov1: np.ndarray, cov2: np.ndarray) -> float:
    a = matrix_sqrt_psd(cov1)
    inner = a @ cov2 @ a
    s = matrix_sqrt_psd((inner + inner.T) / 2)
    scale = max(float(np.abs(inner).max()), 1.0)
    return float(np.abs(s @ s - inner).max()) / scale


def frechet_distance(s1: GaussianStats, s2: GaussianStats) -> float:
    """||mu1 - mu2||^2 + Tr(C1 + C2 - 2 sqrt(C1 C2)), clamped at zero.

    When the product square root reconstructs poorly (near-singular
    covariances), a small diagonal jitter is added to both and the distance
    recomputed.
    """
    if s1.mean.shape != s2.mean.shape or s1.covariance.shape != s2.covariance.shape:
        raise DimMismatch("statistics dimensions differ")
    cov1 = s1.covariance
    cov2 = s2.covariance
    if _sqrt_residual(cov1, cov2) > SQRT_RESIDUAL_TOL:
        eye = np.eye(cov1.shape[0])
        cov1 = cov1 + JITTER * eye
        cov2 = cov2 + JITTER * eye
    diff = s1.mean - s2.mean
    dist = float(diff @ diff) + float(
        np.trace(cov1) + np.trace(cov2) - 2 * _trace_sqrt_product(cov1, cov2)
    )
    return max(dist, 0.0)


def polynomial_kernel(x: np.ndarray, y: np.ndarray, degree: int, gamma: float,
                      coef0: float) -> np.ndarray:
    return (gamma * (x @ y.T) + coef0) ** degree


def _mmd2_unbiased(kx: np.ndarray, ky: np.ndarray, kxy: np.ndarray) -> float:
    m = kx.shape[0]
    n = ky.shape[0]
    sum_x = (kx.sum() - np.trace(kx)) / (m * (m - 1))
    sum_y = (ky.sum() - np.trace(ky)) / (n * (n - 1))
    return float(sum_x + sum_y - 2 * kxy.mean())


def kid_mmd2(x: FeatureSet, y: FeatureSet, cfg: KernelConfig = KernelConfig()) -> KidResult:
    """Block-averaged unbiased MMD^2 under the polynomial kernel.

    Each block draws block_size samples without replacement from each set;
    mean and population stddev over blocks are reported. Negative values are
    legitimate for the unbiased estimator and are not clamped.
    """
    if x.dim != y.dim:
        raise DimMismatch(f"feature dims differ: {x.dim} vs {y.dim}")
    n_min = min(x.count, y.count)
    block_size = cfg.block_size if cfg.block_size is not None else min(1000, n_min)
    if block_size < 2:
        raise BlockTooLarge("block_size must be >= 2")
    if block_size > n_min:
        raise BlockTooLarge(
            f"block_size {block_size} exceeds smallest set size {n_min}"
        )
    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / x.dim
    xd = x.data.astype(np.float64)
    yd = y.data.astype(np.float64)
    rng = np.random.default_rng(cfg.seed)
    values = []
    for _ in range(cfg.blocks):
        if block_size == x.count and block_size == y.count:
            xb, yb = xd, yd  # full sets: sampling is a no-op permutation
        else:
            xb = xd[rng.choice(x.count, size=block_size, replace=False)]
            yb = yd[rng.choice(y.count, size=block_size, replace=False)]
        kx = polynomial_kernel(xb, xb, cfg.degree, gamma, cfg.coef0)
        ky = polynomial_kernel(yb, yb, cfg.degree, gamma, cfg.coef0)
        kxy = polynomial_kernel(xb, yb, cfg.degree, gamma, cfg.coef0)
        values.append(_mmd2_unbiased(kx, ky, kxy))
    arr = np.array(values, dtype=np.float64)
    return KidResult(
        mean=float(arr.mean()),
        stddev=float(arr.std()),
        block_size=block_size,
        blocks=cfg.blocks,
        seed=cfg.seed,
    )
