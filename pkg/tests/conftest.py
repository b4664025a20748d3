import numpy as np
import pytest
from scipy import ndimage

from blockccl.grid import Image


def edge_union_labels(img: Image) -> np.ndarray:
    """Brute-force reference: plain union-find over every equal-valued 4-neighbour edge."""
    w, h = img.width, img.height
    pix = img.pixels
    parent = list(range(w * h))

    def root(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for y in range(h):
        for x in range(w):
            p = x + y * w
            for q in ((p + 1) if x + 1 < w else None, (p + w) if y + 1 < h else None):
                if q is not None and pix[p] == pix[q]:
                    a, b = root(p), root(q)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
    return np.array([root(i) for i in range(w * h)])


def scipy_labels(img: Image) -> np.ndarray:
    """Min-index labels via scipy's labeller applied per distinct value."""
    arr = img.array
    out = np.empty(arr.size, np.int64)
    idx = np.arange(arr.size).reshape(arr.shape)
    for v in np.unique(arr):
        lab, k = ndimage.label(arr == v)
        mins = ndimage.minimum(idx, lab, index=np.arange(1, k + 1))
        mask = lab > 0
        out[idx[mask]] = np.asarray(mins, dtype=np.int64)[lab[mask] - 1]
    return out


def img_from_rows(rows) -> Image:
    return Image.from_array(np.array(rows, dtype=np.uint8))


@pytest.fixture
def rows_image():
    return img_from_rows
