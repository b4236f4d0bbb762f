"""Domain types, manifest ingestion, and image/mask pairing."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch, EmptyImage, ParseError

SUBSETS = ("camouflaged", "salient", "general")

MASK_THRESHOLD = 128  # 8-bit midpoint; values >= 128 are foreground


@dataclass(frozen=True)
class ImageBuffer:
    """8-bit RGB raster, row-major (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise DimensionMismatch(f"expected (H, W, 3) array, got {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise EmptyImage("zero-area image")
        if self.data.dtype != np.uint8:
            raise DecodeError(f"expected uint8 pixel data, got {self.data.dtype}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class RegionMask:
    """Binary foreground mask, row-major (H, W) with values in {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise DimensionMismatch(f"expected (H, W) array, got {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise EmptyImage("zero-area mask")
        vals = np.unique(self.data)
        if not np.isin(vals, (0, 1)).all():
            raise DecodeError("mask values must be binary {0, 1}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def foreground_count(self) -> int:
        return int(self.data.sum())


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: str
    mask_path: str
    subset: str
    reference_path: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    base_dir: str = "."

    def resolve(self, path: str) -> str:
        return os.path.normpath(os.path.join(self.base_dir, path))


@dataclass(frozen=True)
class SampleRecord:
    id: str
    image: ImageBuffer
    mask: RegionMask
    subset: str = "general"

    def __post_init__(self):
        if (self.image.height, self.image.width) != (self.mask.height, self.mask.width):
            raise DimensionMismatch(
                f"image {self.image.data.shape[:2]} vs mask {self.mask.data.shape}"
            )


@dataclass
class ValidationReport:
    subset_counts: dict[str, int] = field(default_factory=lambda: {s: 0 for s in SUBSETS})
    failures: list[tuple[str, str]] = field(default_factory=list)  # (id, reason)

    @property
    def valid_count(self) -> int:
        return sum(self.subset_counts.values())

    @property
    def ok(self) -> bool:
        return not self.failures


def _decode_rgb(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image {path!r}: {exc}") from exc
    if arr.size == 0:
        raise EmptyImage(f"zero-area image {path!r}")
    return arr


def _decode_gray(path: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode mask {path!r}: {exc}") from exc
    if arr.size == 0:
        raise EmptyImage(f"zero-area mask {path!r}")
    return arr


def binarize_mask(raw: np.ndarray) -> np.ndarray:
    """8-bit soft mask -> {0, 1} at the midpoint threshold."""
    return (raw >= MASK_THRESHOLD).astype(np.uint8)


def load_image(path: str) -> ImageBuffer:
    """Decode an RGB image on its own (no mask pairing)."""
    return ImageBuffer(_decode_rgb(path))


def load_sample(image_path: str, mask_path: str, id: str | None = None,
                subset: str = "general") -> SampleRecord:
    """Load an image/mask pair into a validated SampleRecord.

    The mask is resized to the image size with nearest-neighbor interpolation
    when dimensions differ (preserves binarity), then binarized at 128.
    """
    image = _decode_rgb(image_path)
    raw_mask = _decode_gray(mask_path)
    h, w = image.shape[:2]
    if raw_mask.shape != (h, w):
        raw_mask = np.asarray(
            Image.fromarray(raw_mask).resize((w, h), Image.NEAREST), dtype=np.uint8
        )
    mask = binarize_mask(raw_mask)
    if id is None:
        id = os.path.splitext(os.path.basename(image_path))[0]
    return SampleRecord(id=id, image=ImageBuffer(image), mask=RegionMask(mask), subset=subset)


def load_manifest(path: str) -> DatasetManifest:
    """Parse a JSON-lines manifest (one record per line, UTF-8).

    Fields: id, image_path, mask_path, subset, optional reference_path.
    Paths are relative to the manifest's directory.
    """
    base_dir = os.path.dirname(os.path.abspath(path))
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}:{lineno}: invalid record: {exc}") from exc
                missing = {"id", "image_path", "mask_path", "subset"} - rec.keys()
                if missing:
                    raise ParseError(f"{path}:{lineno}: missing fields {sorted(missing)}")
                if rec["subset"] not in SUBSETS:
                    raise ParseError(
                        f"{path}:{lineno}: unknown subset {rec['subset']!r} "
                        f"(expected one of {SUBSETS})"
                    )
                if rec["id"] in seen:
                    raise ParseError(f"{path}:{lineno}: duplicate id {rec['id']!r}")
                seen.add(rec["id"])
                entries.append(ManifestEntry(
                    id=rec["id"],
                    image_path=rec["image_path"],
                    mask_path=rec["mask_path"],
                    subset=rec["subset"],
                    reference_path=rec.get("reference_path"),
                ))
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path!r}: {exc}") from exc
    return DatasetManifest(entries=tuple(entries), base_dir=base_dir)


def validate_manifest(manifest: DatasetManifest) -> ValidationReport:
    """Check every entry against load_sample preconditions.

    Failures are collected per entry; the report never raises for bad files.
    """
    report = ValidationReport()
    for entry in manifest.entries:
        image_path = manifest.resolve(entry.image_path)
        mask_path = manifest.resolve(entry.mask_path)
        if not os.path.isfile(image_path):
            report.failures.append((entry.id, "image not found"))
            continue
        if not os.path.isfile(mask_path):
            report.failures.append((entry.id, "mask not found"))
            continue
        if entry.reference_path is not None:
            ref_path = manifest.resolve(entry.reference_path)
            if not os.path.isfile(ref_path):
                report.failures.append((entry.id, "reference not found"))
                continue
        try:
            load_sample(image_path, mask_path, id=entry.id, subset=entry.subset)
        except Exception as exc:
            report.failures.append((entry.id, str(exc)))
            continue
        report.subset_counts[entry.subset] += 1
    return report
