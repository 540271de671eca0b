import numpy as np
import pytest
from PIL import Image


def write_rgb(path, *, value=None, seed=None, size=(12, 9)):
    """Write a small deterministic RGB PNG (constant ``value`` or seeded noise)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if value is not None:
        arr = np.full((size[1], size[0], 3), value, dtype=np.uint8)
    else:
        rng = np.random.default_rng(seed)
        arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(arr, "RGB").save(path)


@pytest.fixture
def image_tree(tmp_path):
    """Three readable images, deliberately created out of sorted order."""
    root = tmp_path / "images"
    write_rgb(root / "sub" / "c.png", value=200, size=(10, 20))
    write_rgb(root / "b.png", seed=7)
    write_rgb(root / "a.png", seed=3, size=(16, 16))
    return root


@pytest.fixture
def write_image():
    return write_rgb
