"""
Test grids and PGM files
========================

Synthetic inputs are reproducible from (pattern, size, params, seed).
"""

import io
import tempfile
from pathlib import Path

import numpy as np

from blockccl import generate
from blockccl.grid import binarize, load_pgm, named_image, save_pgm, upscale_nearest

# a small noise grid: 255 with probability `density`
img = generate("noise", 12, 6, density=0.4, seed=42)
for row in img.array:
    print("".join("#" if v else "." for v in row))

# same seed, same bytes, in any process
assert generate("noise", 12, 6, density=0.4, seed=42).pixels == img.pixels

# the other patterns
print(generate("checkerboard", 6, 2).array)
print(generate("stripes", 8, 1, stripe_period=2).array)
print((generate("spiral", 9, 9).array // 255))

# binary PGM round trip
with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "noise.pgm"
    save_pgm(img, path)
    print(path.read_bytes()[:12])
    assert load_pgm(path) == img

# natural images are thresholded, then upscaled by pixel replication
lena = binarize(named_image("lena"), 128)
big = upscale_nearest(lena, 1024, 1024)
print(lena.width, lena.height, "->", big.width, big.height, "foreground", np.mean(big.array == 255).round(3))
