"""Textual-visual condition assembly for the generation prompt.

Foreground token cells keep the target's own embeddings; background cells are
replaced by a blend of the retrieved grids (training mode keeps the target in
the blend, inference mode uses retrieved content only). The final prompt is
the textual tokens, the class token, and the flattened visual grid in order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import RegionMask
from .errors import DimMismatch, EmptyRetrievalList, ShapeMismatch
from .retrieval import FeatureGrid, mask_to_grid

TASK_DESCRIPTION = (
    "A realistic image of an object blending into its surroundings, where the "
    "background shares similar colors, textures, and patterns with the object, "
    "making it hard to distinguish. Natural lighting, photorealistic, seamless "
    "camouflage, high detail."
)

TOKEN_TAGS = ("textual", "class", "visual")


@dataclass(frozen=True)
class TokenSequence:
    """Ordered prompt tokens (L, D) with per-token origin tags."""

    tokens: np.ndarray
    tags: tuple[str, ...]

    def __post_init__(self):
        if self.tokens.ndim != 2 or self.tokens.shape[0] < 1:
            raise DimMismatch(f"expected non-empty (L, D) tokens, got {self.tokens.shape}")
        if len(self.tags) != self.tokens.shape[0]:
            raise DimMismatch(f"{len(self.tags)} tags for {self.tokens.shape[0]} tokens")
        for tag in self.tags:
            if tag not in TOKEN_TAGS:
                raise ValueError(f"unknown token tag {tag!r}")


def canonical_task_description() -> str:
    """The unified fine-grained task description, byte-stable across releases."""
    return TASK_DESCRIPTION


def fuse_visual(e_t: FeatureGrid, retrieved: list[FeatureGrid], mask: RegionMask,
                mode: str) -> FeatureGrid:
    """Blend retrieved token grids into the target grid's background cells.

    Per cell with binary downsampled mask value m:
      training:  e_t if m else (e_t + sum(e_j)) / (k + 1)
      inference: e_t if m else sum(e_j) / k
    Foreground cells are copied, not recomputed, so they stay bit-identical.
    """
    if mode not in ("training", "inference"):
        raise ValueError(f"unknown mode {mode!r}")
    if not retrieved:
        raise EmptyRetrievalList("need at least one retrieved grid")
    shape = e_t.data.shape
    for grid in retrieved:
        if grid.data.shape != shape:
            raise ShapeMismatch(f"{grid.data.shape} vs target {shape}")
    k = len(retrieved)
    cell_mask = mask_to_grid(mask, e_t.grid_h, e_t.grid_w)
    retrieved_sum = np.zeros_like(e_t.data, dtype=np.float64)
    for grid in retrieved:
        retrieved_sum += grid.data
    if mode == "training":
        background = (e_t.data + retrieved_sum) / (k + 1)
    else:
        background = retrieved_sum / k
    out = e_t.data.copy()
    bg_cells = cell_mask == 0
    out[bg_cells] = background.astype(out.dtype)[bg_cells]
    return FeatureGrid(data=out)


def assemble_prompt(c_txt: TokenSequence, c_cls: np.ndarray,
                    c_vis: FeatureGrid) -> TokenSequence:
    """Concatenate textual tokens, the class token, and the flattened grid."""
    dim = c_txt.tokens.shape[1]
    if c_cls.shape != (dim,):
        raise DimMismatch(f"class token shape {c_cls.shape}, expected ({dim},)")
    if c_vis.dim != dim:
        raise DimMismatch(f"visual dim {c_vis.dim}, expected {dim}")
    for tag in c_txt.tags:
        if tag != "textual":
            raise ValueError("c_txt must contain only textual tokens")
    visual = c_vis.data.reshape(-1, dim)
    tokens = np.concatenate([c_txt.tokens, c_cls[None, :], visual], axis=0)
    tags = c_txt.tags + ("class",) + ("visual",) * visual.shape[0]
    return TokenSequence(tokens=tokens, tags=tags)


def split_prompt(seq: TokenSequence) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover (textual tokens, class token, flattened visual tokens) by tag."""
    tags = np.array(seq.tags)
    textual = seq.tokens[tags == "textual"]
    class_tokens = seq.tokens[tags == "class"]
    visual = seq.tokens[tags == "visual"]
    if class_tokens.shape[0] != 1:
        raise DimMismatch(f"expected exactly one class token, got {class_tokens.shape[0]}")
    return textual, class_tokens[0], visual


def save_prompt(path: str, seq: TokenSequence) -> None:
    """Write a prompt sequence to CEMB (one record, grid 1 x L); origin tags
    ride in the sidecar so the sequence can be split again after loading."""
    from . import cemb

    length, dim = seq.tokens.shape
    cemb.write_cemb(
        path,
        seq.tokens.astype(np.float32).reshape(1, 1, length, dim),
        ids=["prompt"],
        metadata={"tags": ",".join(seq.tags)},
    )


def load_prompt(path: str) -> TokenSequence:
    from . import cemb

    data = cemb.read_cemb(path)
    if data.count != 1 or data.grid_h != 1:
        raise DimMismatch(f"{path}: expected one 1xL prompt record")
    tags = tuple(data.metadata.get("tags", "").split(","))
    return TokenSequence(
        tokens=data.data.reshape(data.grid_w, data.dim).astype(np.float64),
        tags=tags,
    )
