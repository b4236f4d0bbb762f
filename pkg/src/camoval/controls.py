"""Layout-control images: the computable contrast control plus pass-through
validation of externally produced depth and edge maps.

The contrast control preserves the foreground target exactly. At training
time, background contrast is reduced toward the per-channel background mean;
at inference the background becomes plain white. The contraction factor is a
documented stand-in (the upstream formulation is not public) and is recorded
in every report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .corpus import ImageBuffer, SampleRecord
from .errors import DecodeError, EmptyMask

CONTRAST_LAMBDA = 0.5
INFERENCE_BACKGROUND = (255, 255, 255)

CONTROL_KINDS = ("contrast", "depth", "hed")
MODES = ("training", "inference")


@dataclass(frozen=True)
class ControlImage:
    kind: str
    image: ImageBuffer
    mode: str

    def __post_init__(self):
        if self.kind not in CONTROL_KINDS:
            raise ValueError(f"unknown control kind {self.kind!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


def contrast_control(sample: SampleRecord, mode: str) -> ControlImage:
    """Contrast layout control for one sample.

    training: background channel values move halfway toward the background
    channel mean (rounded); inference: background set to white. Foreground
    pixels are copied verbatim in both modes.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if sample.mask.foreground_count == 0:
        raise EmptyMask(f"sample {sample.id}: empty mask")
    out = sample.image.data.copy()
    background = sample.mask.data == 0
    if background.any():
        if mode == "inference":
            out[background] = INFERENCE_BACKGROUND
        else:
            bg_pixels = sample.image.data[background].astype(np.float64)
            mean = bg_pixels.mean(axis=0)
            contracted = np.rint(mean + CONTRAST_LAMBDA * (bg_pixels - mean))
            out[background] = contracted.astype(np.uint8)
    return ControlImage(kind="contrast", image=ImageBuffer(out), mode=mode)


def validate_control(image_path: str, kind: str, sample: SampleRecord,
                     mode: str = "inference") -> ControlImage:
    """Wrap an externally produced depth or HED map for the pipeline.

    The map is resized (bilinear) to the sample's dimensions; single-channel
    inputs are replicated to three channels. No content checks beyond decode.
    """
    if kind not in ("depth", "hed"):
        raise ValueError(f"kind must be depth or hed, got {kind!r}")
    try:
        with Image.open(image_path) as im:
            im = im.convert("L") if im.mode in ("1", "L", "I", "I;16", "F") else im.convert("RGB")
            if im.size != (sample.image.width, sample.image.height):
                im = im.resize((sample.image.width, sample.image.height), Image.BILINEAR)
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode control {image_path!r}: {exc}") from exc
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return ControlImage(kind=kind, image=ImageBuffer(arr), mode=mode)
