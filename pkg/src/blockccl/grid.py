"""Images: construction, synthetic patterns, thresholding and binary PGM I/O."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

PATTERNS = ("noise", "stripes", "checkerboard", "uniform", "spiral")

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class Image:
    """Immutable 8-bit grid, row-major; cell ``x + y * width``."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        if not isinstance(self.pixels, bytes):
            object.__setattr__(self, "pixels", bytes(self.pixels))
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel buffer has {len(self.pixels)} bytes, expected {self.width * self.height}"
            )

    @classmethod
    def from_array(cls, arr) -> "Image":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2D array (height, width)")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("pixel values must fit in 8 bits")
        return cls(int(arr.shape[1]), int(arr.shape[0]), arr.astype(np.uint8).tobytes())

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(height, width)`` uint8 view."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width)

    @property
    def flat(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8)

    @property
    def size(self) -> int:
        return self.width * self.height

    def __repr__(self):
        return f"Image({self.width}x{self.height})"


def cell_index(x: int, y: int, width: int) -> int:
    return x + y * width


def cell_xy(linear: int, width: int) -> tuple[int, int]:
    return linear % width, linear // width


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the SplitMix64 generator seeded with ``seed``.

    Output k is the standard finalizer applied to ``seed + (k + 1) * 0x9E3779B97F4A7C15``
    (mod 2**64), so the stream is fully vectorized and identical to the usual
    sequential formulation.
    """
    state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = state + k * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform_floats(seed: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of each SplitMix64 output."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _spiral(width: int, height: int) -> np.ndarray:
    # one-cell-wide path walked clockwise from the top-left corner, keeping a
    # one-cell gap to the previously drawn arm
    out = np.zeros((height, width), dtype=np.uint8)
    dirs = ((1, 0), (0, 1), (-1, 0), (0, -1))

    def free(x, y):
        return 0 <= x < width and 0 <= y < height and not out[y, x]

    def can_step(x, y, d):
        dx, dy = dirs[d]
        nx, ny = x + dx, y + dy
        if not free(nx, ny):
            return False
        fx, fy = nx + dx, ny + dy
        if 0 <= fx < width and 0 <= fy < height and out[fy, fx]:
            return False
        # never touch a painted cell sideways (keeps arms separated)
        for sx, sy in ((nx + dy, ny + dx), (nx - dy, ny - dx)):
            if (sx, sy) != (x, y) and 0 <= sx < width and 0 <= sy < height and out[sy, sx]:
                return False
        return True

    x = y = d = 0
    out[0, 0] = 255
    while True:
        if not can_step(x, y, d):
            d = (d + 1) % 4
            if not can_step(x, y, d):
                break
        dx, dy = dirs[d]
        x, y = x + dx, y + dy
        out[y, x] = 255
    return out


def generate(
    pattern: str,
    width: int,
    height: int,
    density: float = 0.5,
    stripe_period: int = 1,
    fill_value: int = 0,
    seed: int = 0,
) -> Image:
    """Deterministic synthetic test image.

    noise: each cell is 255 with probability ``density`` (SplitMix64 stream, one
    draw per cell in row-major order), else 0.
    stripes: vertical bands ``stripe_period`` cells wide, alternating 0 / 255
    starting with 0 at x = 0.
    checkerboard: 0 where ``x + y`` is even, 255 elsewhere.
    uniform: every cell ``fill_value``.
    spiral: a single-cell-wide 255 spiral on a 0 background.
    """
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; choose from {', '.join(PATTERNS)}")
    if int(width) != width or int(height) != height or width < 1 or height < 1:
        raise ValueError(f"invalid dimensions {width}x{height}")
    width, height = int(width), int(height)
    if pattern == "noise":
        if not 0.0 <= density <= 1.0:
            raise ValueError(f"density must be in [0, 1], got {density}")
        u = uniform_floats(seed, width * height)
        arr = np.where(u < density, 255, 0).astype(np.uint8).reshape(height, width)
    elif pattern == "stripes":
        if stripe_period < 1:
            raise ValueError(f"stripe_period must be >= 1, got {stripe_period}")
        band = (np.arange(width) // stripe_period) % 2
        arr = np.broadcast_to(np.where(band == 1, 255, 0).astype(np.uint8), (height, width))
    elif pattern == "checkerboard":
        yy, xx = np.indices((height, width))
        arr = np.where((xx + yy) % 2 == 1, 255, 0).astype(np.uint8)
    elif pattern == "uniform":
        if not 0 <= fill_value <= 255:
            raise ValueError(f"fill_value must be a byte, got {fill_value}")
        arr = np.full((height, width), fill_value, dtype=np.uint8)
    else:
        arr = _spiral(width, height)
    return Image.from_array(arr)


def binarize(img: Image, threshold: int = 128) -> Image:
    """255 where ``pixel >= threshold``, else 0."""
    arr = np.where(img.array >= threshold, 255, 0).astype(np.uint8)
    return Image(img.width, img.height, arr.tobytes())


def upscale_nearest(img: Image, width: int, height: int) -> Image:
    """Nearest-neighbour resample; integer factors replicate cells exactly."""
    ys = (np.arange(height) * img.height) // height
    xs = (np.arange(width) * img.width) // width
    return Image.from_array(img.array[ys][:, xs])


_HEADER = re.compile(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s")


def _skip_comments(data: bytes) -> bytes:
    # comments may only appear inside the header; strip them before parsing
    out, i = bytearray(), 0
    fields = 0
    while i < len(data) and fields < 4:
        c = data[i : i + 1]
        if c == b"#":
            j = data.find(b"\n", i)
            if j < 0:
                raise ValueError("unterminated comment in PGM header")
            i = j + 1
            continue
        if c.isspace() and out and not out[-1:].isspace():
            fields += 1
        out += c
        i += 1
    return bytes(out) + data[i:]


def read_pgm(data: bytes) -> Image:
    """Parse a binary (P5) PGM with maxval <= 255."""
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM (magic must be P5)")
    data = _skip_comments(data)
    m = _HEADER.match(data)
    if m is None:
        raise ValueError("malformed PGM header")
    width, height, maxval = (int(g) for g in m.groups())
    if width < 1 or height < 1:
        raise ValueError(f"invalid PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ValueError(f"unsupported maxval {maxval} (only 8-bit PGM is supported)")
    payload = data[m.end() :]
    need = width * height
    if len(payload) < need:
        raise ValueError(f"truncated PGM payload: {len(payload)} of {need} bytes")
    return Image(width, height, payload[:need])


def write_pgm(img: Image) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.pixels


def load_pgm(path) -> Image:
    with open(path, "rb") as f:
        return read_pgm(f.read())


def save_pgm(img: Image, path) -> None:
    with open(path, "wb") as f:
        f.write(write_pgm(img))


IMAGE_DIR_ENV = "BLOCKCCL_IMAGE_DIR"


def named_image(name: str) -> Image:
    """Grayscale benchmark image by name.

    ``$BLOCKCCL_IMAGE_DIR/<name>.pgm`` is used when present. Otherwise ``lena``
    and ``peppers`` fall back to the 512x512 photographs bundled with
    scikit-image (``camera`` and a luma conversion of ``astronaut``), since the
    classic test images are not redistributable.
    """
    root = os.environ.get(IMAGE_DIR_ENV)
    if root:
        path = os.path.join(root, f"{name}.pgm")
        if os.path.exists(path):
            return load_pgm(path)
    if name == "lena":
        from skimage import data

        return Image.from_array(data.camera())
    if name == "peppers":
        from skimage import data

        rgb = data.astronaut().astype(np.uint32)
        luma = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
        return Image.from_array(luma)
    raise KeyError(f"unknown image {name!r}")
