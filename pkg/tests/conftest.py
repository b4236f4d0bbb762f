import json
import os
import sys

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def save_png(path, array):
    Image.fromarray(array).save(path)


def write_manifest(path, entries):
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry) + "\n")


def random_image(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def block_mask(h, w, top, left, bh, bw):
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[top:top + bh, left:left + bw] = 1
    return mask


@pytest.fixture
def sample_dir(tmp_path, rng):
    """A 3-image dataset (one entry per subset) with masks and references."""
    entries = []
    for i, subset in enumerate(("camouflaged", "salient", "general")):
        image = random_image(rng, 32, 32)
        mask = block_mask(32, 32, 8, 8, 12, 12) * 255
        save_png(tmp_path / f"img{i}.png", image)
        save_png(tmp_path / f"mask{i}.png", mask)
        entries.append({
            "id": f"s{i}",
            "image_path": f"img{i}.png",
            "mask_path": f"mask{i}.png",
            "subset": subset,
            "reference_path": f"img{i}.png",
        })
    manifest = tmp_path / "manifest.jsonl"
    write_manifest(manifest, entries)
    return tmp_path, manifest, entries
