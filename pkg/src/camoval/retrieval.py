"""Texture-oriented background retrieval over a pooled-embedding knowledge base.

The query embedding is the masked average pool of the target's encoder token
grid; candidates are pre-pooled whole-image embeddings scored by cosine
similarity, with exact top-k selection (ties broken by ascending id).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import RegionMask, SampleRecord
from .errors import DimMismatch, EmptyMask, KOutOfRange, ZeroVector

COVERAGE_THRESHOLD = 0.5


@dataclass(frozen=True)
class FeatureGrid:
    """Encoder token grid, row-major (grid_h, grid_w, dim)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3:
            raise DimMismatch(f"expected (grid_h, grid_w, dim), got {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DimMismatch("grid must have at least one cell")
        if not np.isfinite(self.data).all():
            raise ValueError("grid values must be finite")

    @property
    def grid_h(self) -> int:
        return self.data.shape[0]

    @property
    def grid_w(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class KnowledgeBase:
    """Candidate embeddings (K, D) with unique string ids."""

    ids: tuple[str, ...]
    embeddings: np.ndarray

    def __post_init__(self):
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] != len(self.ids):
            raise DimMismatch(
                f"{len(self.ids)} ids vs embeddings shape {self.embeddings.shape}"
            )
        if len(self.ids) < 1:
            raise DimMismatch("knowledge base must hold at least one candidate")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate candidate ids")

    @property
    def size(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class RetrievalResult:
    ranked: tuple[tuple[str, float], ...]  # (id, score), descending score

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(rid for rid, _ in self.ranked)


def _overlap_weights(n_pixels: int, n_cells: int) -> np.ndarray:
    """(n_cells, n_pixels) fractional row/column coverage of each grid cell.

    Each row sums to 1; entry (c, p) is the fraction of cell c's extent
    covered by pixel p along that axis.
    """
    weights = np.zeros((n_cells, n_pixels), dtype=np.float64)
    step = n_pixels / n_cells
    for c in range(n_cells):
        lo = c * step
        hi = (c + 1) * step
        p0 = int(np.floor(lo))
        p1 = min(int(np.ceil(hi)), n_pixels)
        for p in range(p0, p1):
            overlap = min(hi, p + 1) - max(lo, p)
            if overlap > 0:
                weights[c, p] = overlap / step
    return weights


def mask_coverage(mask: RegionMask, grid_h: int, grid_w: int) -> np.ndarray:
    """Area-weighted foreground coverage of each grid cell, in [0, 1]."""
    rows = _overlap_weights(mask.height, grid_h)
    cols = _overlap_weights(mask.width, grid_w)
    return rows @ mask.data.astype(np.float64) @ cols.T


def mask_to_grid(mask: RegionMask, grid_h: int, grid_w: int) -> np.ndarray:
    """Binary per-cell mask: 1 where coverage exceeds the 0.5 threshold."""
    return (mask_coverage(mask, grid_h, grid_w) > COVERAGE_THRESHOLD).astype(np.float64)


def _cell_mean(cells: np.ndarray) -> np.ndarray:
    return cells.mean(axis=0)


def global_avg_pool(grid: FeatureGrid) -> np.ndarray:
    """Mean over all grid cells."""
    return _cell_mean(grid.data.reshape(-1, grid.dim))


def masked_avg_pool(grid: FeatureGrid, mask: RegionMask) -> np.ndarray:
    """Mean of the grid cells the mask covers.

    The pixel mask is reduced to the token grid by area coverage; cells above
    0.5 coverage are averaged. If the target is too small to dominate any
    cell, a coverage-weighted mean over all touched cells is used instead.
    """
    if mask.foreground_count == 0:
        raise EmptyMask("mask has no foreground pixels")
    coverage = mask_coverage(mask, grid.grid_h, grid.grid_w)
    cells = grid.data.reshape(-1, grid.dim)
    selected = (coverage > COVERAGE_THRESHOLD).reshape(-1)
    if selected.any():
        return _cell_mean(cells[selected])
    weights = coverage.reshape(-1)
    positive = weights > 0
    weights = weights[positive]
    return (weights[:, None] * cells[positive]).sum(axis=0) / weights.sum()


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine similarity undefined for zero-norm vectors")
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return min(1.0, max(-1.0, value))


def retrieve_topk(target: np.ndarray, base: KnowledgeBase, k: int) -> RetrievalResult:
    """The k highest-cosine candidates, descending; ties by ascending id.

    Equivalent to repeatedly taking the argmax and removing it.
    """
    if k < 1 or k > base.size:
        raise KOutOfRange(f"k={k} outside [1, {base.size}]")
    scores = [cosine_similarity(target, base.embeddings[i]) for i in range(base.size)]
    order = sorted(range(base.size), key=lambda i: (-scores[i], base.ids[i]))
    ranked = tuple((base.ids[i], scores[i]) for i in order[:k])
    return RetrievalResult(ranked=ranked)


def build_target_embedding(sample: SampleRecord, grid: FeatureGrid) -> np.ndarray:
    """Masked average pool of the sample's token grid (the query embedding)."""
    if sample.mask.foreground_count == 0:
        raise EmptyMask(f"sample {sample.id}: mask has no foreground pixels")
    return masked_avg_pool(grid, sample.mask)
