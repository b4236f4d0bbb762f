"""Background-foreground pixel-distribution divergence (the camouflage score).

Per RGB channel, the pixel values inside and outside the foreground mask are
histogrammed over the 8-bit range, Laplace-smoothed, and compared with KL
divergence (background distribution first). The per-channel divergences are
averaged into a single scalar; lower means the foreground blends better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import ImageBuffer, RegionMask
from .errors import DimensionMismatch, EmptyList, EmptyRegion

DEFAULT_BINS = 256
DEFAULT_EPSILON = 1e-10

CHANNELS = ("R", "G", "B")

_CHANNEL_INDEX = {"R": 0, "G": 1, "B": 2}


@dataclass(frozen=True)
class ChannelHistogram:
    """Smoothed, normalized pixel-value distribution of one channel region."""

    bins: np.ndarray  # probabilities, all > 0, sum to 1
    sample_count: int

    def __post_init__(self):
        if not np.all(self.bins > 0):
            raise ValueError("smoothed histogram must have no zero bins")
        if abs(float(self.bins.sum()) - 1.0) > 1e-9:
            raise ValueError("histogram bins must sum to 1")


@dataclass(frozen=True)
class KlbfResult:
    kl_r: float
    kl_g: float
    kl_b: float
    kl_bf: float
    foreground_pixels: int
    background_pixels: int


def _smooth(counts: np.ndarray, epsilon: float) -> np.ndarray:
    smoothed = counts.astype(np.float64) + epsilon
    return smoothed / smoothed.sum()


def region_histogram(image: ImageBuffer, mask: RegionMask, region: str, channel: str,
                     bins: int = DEFAULT_BINS,
                     epsilon: float = DEFAULT_EPSILON) -> ChannelHistogram:
    """Histogram of one channel restricted to the pixels of one mask region.

    region is "foreground" (mask == 1) or "background" (mask == 0). Every bin
    receives epsilon before normalization so downstream log ratios stay finite.
    """
    if image.data.shape[:2] != mask.data.shape:
        raise DimensionMismatch(
            f"image {image.data.shape[:2]} vs mask {mask.data.shape}"
        )
    if region == "foreground":
        selector = mask.data == 1
    elif region == "background":
        selector = mask.data == 0
    else:
        raise ValueError(f"unknown region {region!r}")
    values = image.data[:, :, _CHANNEL_INDEX[channel]][selector]
    if values.size == 0:
        raise EmptyRegion(f"{region} region has no pixels")
    counts, _ = np.histogram(values, bins=bins, range=(0, 256))
    return ChannelHistogram(bins=_smooth(counts, epsilon), sample_count=int(values.size))


def kl_divergence(p: ChannelHistogram, q: ChannelHistogram) -> float:
    """Sum of p_i * ln(p_i / q_i) in nats; finite because bins are smoothed."""
    if p.bins.shape != q.bins.shape:
        raise DimensionMismatch("histograms must share support")
    return float(np.sum(p.bins * np.log(p.bins / q.bins)))


def klbf(image: ImageBuffer, mask: RegionMask, bins: int = DEFAULT_BINS,
         epsilon: float = DEFAULT_EPSILON) -> KlbfResult:
    """Per-channel KL(background, foreground), averaged over R, G, B."""
    fg = mask.foreground_count
    total = mask.width * mask.height
    if fg == 0:
        raise EmptyRegion("mask has no foreground pixels")
    if fg == total:
        raise EmptyRegion("mask has no background pixels")
    per_channel = []
    for channel in CHANNELS:
        p = region_histogram(image, mask, "background", channel, bins, epsilon)
        q = region_histogram(image, mask, "foreground", channel, bins, epsilon)
        per_channel.append(kl_divergence(p, q))
    kl_r, kl_g, kl_b = per_channel
    return KlbfResult(
        kl_r=kl_r,
        kl_g=kl_g,
        kl_b=kl_b,
        kl_bf=(kl_r + kl_g + kl_b) / 3,
        foreground_pixels=fg,
        background_pixels=total - fg,
    )


def klbf_aggregate(results: list[KlbfResult]) -> dict[str, dict[str, float]]:
    """Mean/median/stddev for every component over a batch of results."""
    if not results:
        raise EmptyList("no results to aggregate")
    out: dict[str, dict[str, float]] = {}
    for component in ("kl_r", "kl_g", "kl_b", "kl_bf"):
        values = np.array([getattr(r, component) for r in results], dtype=np.float64)
        out[component] = {
            "mean": float(values.mean()),
            "median": float(np.median(values)),
            "stddev": float(values.std()),
        }
    return out
