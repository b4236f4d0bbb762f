"""Segmentation scoring suite: MAE, S-measure, mean E-measure, F-measure,
weighted F-measure.

Predictions are real-valued maps in [0, 1]; ground truth is a binary mask.
Conventions follow the metrics' original definitions (alpha = 0.5 for S,
beta^2 = 0.3 for F, beta^2 = 1 for weighted F, 256-threshold mean for E),
with the E-measure alignment score averaged over pixels so every metric
stays inside [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve, distance_transform_edt

from .corpus import RegionMask
from .errors import DimensionMismatch, EmptyGroundTruth, EmptyList

S_ALPHA = 0.5
F_BETA2 = 0.3
WF_BETA2 = 1.0
E_THRESHOLDS = 256

_EPS = np.spacing(1)


@dataclass(frozen=True)
class CodScores:
    mae: float
    s_alpha: float
    e_phi: float
    f_beta: float
    f_beta_w: float


def _check_pred(pred: np.ndarray, gt: RegionMask) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != gt.data.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs gt {gt.data.shape}")
    if pred.min() < 0 or pred.max() > 1:
        raise ValueError("prediction values must lie in [0, 1]")
    return pred


def mae(pred: np.ndarray, gt: RegionMask) -> float:
    """Mean absolute error between the prediction and the binary mask."""
    pred = _check_pred(pred, gt)
    return float(np.abs(pred - gt.data.astype(np.float64)).mean())


def _adaptive_binarize(pred: np.ndarray) -> np.ndarray:
    # threshold 0 would mark everything foreground; an empty prediction must
    # stay empty, so the degenerate threshold falls back to strict positivity
    threshold = min(2 * pred.mean(), 1.0)
    if threshold > 0:
        return pred >= threshold
    return pred > 0


def f_measure(pred: np.ndarray, gt: RegionMask) -> float:
    """Adaptive-threshold F-measure with beta^2 = 0.3."""
    pred = _check_pred(pred, gt)
    if gt.foreground_count == 0:
        raise EmptyGroundTruth("F-measure needs a non-empty ground truth")
    binary = _adaptive_binarize(pred)
    gt_fg = gt.data == 1
    tp = float(np.count_nonzero(binary & gt_fg))
    if tp == 0:
        return 0.0
    precision = tp / np.count_nonzero(binary)
    recall = tp / gt.foreground_count
    return float((1 + F_BETA2) * precision * recall / (F_BETA2 * precision + recall))


def _s_object_score(values: np.ndarray) -> float:
    x = values.mean()
    sigma_x = values.std(ddof=1) if values.size > 1 else 0.0
    return float(2 * x / (x * x + 1 + sigma_x + _EPS))


def _gt_centroid(gt: np.ndarray) -> tuple[int, int]:
    # 1-based split point, matching the original structure-measure code
    rows, cols = np.argwhere(gt).mean(axis=0).round()
    return int(cols) + 1, int(rows) + 1


def _region_ssim(pred: np.ndarray, gt: np.ndarray) -> float:
    n = pred.size
    x = pred.mean()
    y = gt.mean()
    sigma_x = np.square(pred - x).sum() / (n - 1) if n > 1 else 0.0
    sigma_y = np.square(gt - y).sum() / (n - 1) if n > 1 else 0.0
    sigma_xy = ((pred - x) * (gt - y)).sum() / (n - 1) if n > 1 else 0.0
    alpha = 4 * x * y * sigma_xy
    beta = (x * x + y * y) * (sigma_x + sigma_y)
    if alpha != 0:
        return float(alpha / (beta + _EPS))
    return 1.0 if beta == 0 else 0.0


def s_measure(pred: np.ndarray, gt: RegionMask) -> float:
    """Structure measure: object-level and quadrant-region similarity.

    Degenerate masks use the mean fallback: empty gt scores 1 - mean(pred),
    full gt scores mean(pred).
    """
    pred = _check_pred(pred, gt)
    gtf = gt.data.astype(np.float64)
    fg_count = gt.foreground_count
    if fg_count == 0:
        return float(1 - pred.mean())
    if fg_count == gtf.size:
        return float(pred.mean())

    u = gtf.mean()
    fg_score = _s_object_score(pred[gt.data == 1])
    bg_score = _s_object_score(1 - pred[gt.data == 0])
    s_object = u * fg_score + (1 - u) * bg_score

    cx, cy = _gt_centroid(gt.data)
    h, w = gtf.shape
    area = h * w
    s_region = 0.0
    for rows, cols, weight in (
        (slice(0, cy), slice(0, cx), cx * cy / area),
        (slice(0, cy), slice(cx, w), cy * (w - cx) / area),
        (slice(cy, h), slice(0, cx), (h - cy) * cx / area),
        (slice(cy, h), slice(cx, w), (h - cy) * (w - cx) / area),
    ):
        if weight > 0:
            s_region += weight * _region_ssim(pred[rows, cols], gtf[rows, cols])

    return float(max(S_ALPHA * s_object + (1 - S_ALPHA) * s_region, 0.0))


def _enhanced_alignment(n_total: int, n_gt: int, n_pred: np.ndarray,
                        n_tp: np.ndarray) -> np.ndarray:
    """Per-threshold alignment score from the four pred/gt combination counts.

    The alignment matrix is piecewise constant over (pred fg/bg x gt fg/bg),
    so the pixel mean reduces to a count-weighted sum.
    """
    mu_pred = n_pred / n_total
    mu_gt = n_gt / n_total
    combos = (
        (1 - mu_pred, 1 - mu_gt, n_tp),                               # pred fg, gt fg
        (1 - mu_pred, 0 - mu_gt, n_pred - n_tp),                      # pred fg, gt bg
        (0 - mu_pred, 1 - mu_gt, n_gt - n_tp),                        # pred bg, gt fg
        (0 - mu_pred, 0 - mu_gt, n_total - n_pred - n_gt + n_tp),     # pred bg, gt bg
    )
    total = np.zeros_like(n_pred, dtype=np.float64)
    for a, b, count in combos:
        denom = a * a + b * b
        phi = np.where(denom > 0, 2 * a * b / np.where(denom > 0, denom, 1), 0.0)
        total += count * np.square(1 + phi) / 4
    return total / n_total


def e_measure(pred: np.ndarray, gt: RegionMask) -> float:
    """Mean enhanced-alignment measure over 256 thresholds in [0, 1].

    Degenerate ground truths score the fraction of agreeing pixels:
    1 - mean(binarized pred) for an empty mask, mean for a full one.
    """
    pred = _check_pred(pred, gt)
    thresholds = np.arange(E_THRESHOLDS, dtype=np.float64) / 255.0
    n_total = pred.size
    n_gt = gt.foreground_count
    gt_fg = gt.data == 1

    # counts of pred >= t via suffix sums on the sorted values; threshold 0
    # uses strict positivity (same zero guard as the adaptive F threshold)
    fg_sorted = np.sort(pred[gt_fg])
    all_sorted = np.sort(pred, axis=None)
    n_tp = fg_sorted.size - np.searchsorted(fg_sorted, thresholds, side="left")
    n_pred = all_sorted.size - np.searchsorted(all_sorted, thresholds, side="left")
    n_tp[0] = fg_sorted.size - np.searchsorted(fg_sorted, 0.0, side="right")
    n_pred[0] = all_sorted.size - np.searchsorted(all_sorted, 0.0, side="right")
    n_tp = n_tp.astype(np.float64)
    n_pred = n_pred.astype(np.float64)

    if n_gt == 0:
        scores = (n_total - n_pred) / n_total
    elif n_gt == n_total:
        scores = n_pred / n_total
    else:
        scores = _enhanced_alignment(n_total, n_gt, n_pred, n_tp)
    return float(scores.mean())


def _gaussian_kernel_7x7(sigma: float = 5.0) -> np.ndarray:
    coords = np.arange(7) - 3
    g = np.exp(-(coords ** 2) / (2 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def weighted_f(pred: np.ndarray, gt: RegionMask) -> float:
    """Weighted F-measure with dependency and distance error weighting.

    Background errors inherit the error at the nearest foreground pixel
    before blurring, are down-weighted by distance decay exp(ln(0.5)/5 * d),
    and combine into weighted precision/recall with beta^2 = 1.
    """
    pred = _check_pred(pred, gt)
    if gt.foreground_count == 0:
        raise EmptyGroundTruth("weighted F-measure needs a non-empty ground truth")
    gtb = gt.data == 1
    gtf = gt.data.astype(np.float64)

    error = np.abs(pred - gtf)
    if gt.foreground_count < gtf.size:
        dist, indices = distance_transform_edt(~gtb, return_indices=True)
        edge_fixed = error.copy()
        edge_fixed[~gtb] = error[indices[0][~gtb], indices[1][~gtb]]
    else:
        dist = np.zeros_like(gtf)
        edge_fixed = error.copy()

    blurred = convolve(edge_fixed, _gaussian_kernel_7x7(), mode="constant", cval=0.0)
    min_error = np.where(gtb & (blurred < error), blurred, error)

    importance = np.where(gtb, 1.0, 2 - np.exp(np.log(0.5) / 5 * dist))
    weighted_error = min_error * importance

    tp_w = gt.foreground_count - weighted_error[gtb].sum()
    fp_w = weighted_error[~gtb].sum()
    recall = 1 - weighted_error[gtb].mean()
    precision = tp_w / (tp_w + fp_w + _EPS)
    return float(
        (1 + WF_BETA2) * recall * precision / (recall + WF_BETA2 * precision + _EPS)
    )


def cod_evaluate(pairs: list[tuple[np.ndarray, RegionMask]]) -> CodScores:
    """Arithmetic mean of the per-image scores over a dataset."""
    if not pairs:
        raise EmptyList("no prediction/ground-truth pairs")
    rows = [score_pair(pred, gt) for pred, gt in pairs]
    return CodScores(
        mae=float(np.mean([r.mae for r in rows])),
        s_alpha=float(np.mean([r.s_alpha for r in rows])),
        e_phi=float(np.mean([r.e_phi for r in rows])),
        f_beta=float(np.mean([r.f_beta for r in rows])),
        f_beta_w=float(np.mean([r.f_beta_w for r in rows])),
    )


def score_pair(pred: np.ndarray, gt: RegionMask) -> CodScores:
    return CodScores(
        mae=mae(pred, gt),
        s_alpha=s_measure(pred, gt),
        e_phi=e_measure(pred, gt),
        f_beta=f_measure(pred, gt),
        f_beta_w=weighted_f(pred, gt),
    )
