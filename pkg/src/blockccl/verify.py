"""Partition canonical forms, label-map comparison and label file encodings."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .dsf import flatten_array
from .grid import Image


class VerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class Partition:
    labels: np.ndarray  # per cell: smallest index of its class
    count: int

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.count == other.count and np.array_equal(self.labels, other.labels)

    __hash__ = None


def canonicalize(labels, resolve: bool = False) -> Partition:
    """Map every cell to the smallest cell index carrying the same label.

    Label values are treated as opaque class ids. Pass ``resolve=True`` for an
    unflattened parent array: entries are first followed to their roots.
    """
    arr = np.asarray(labels).ravel()
    if resolve:
        arr = flatten_array(arr.astype(np.int64, copy=True))
    if arr.size == 0:
        return Partition(np.zeros(0, np.int64), 0)
    _, first, inverse = np.unique(arr, return_index=True, return_inverse=True)
    return Partition(first[inverse.ravel()].astype(np.int64), int(first.size))


def equivalent(a, b) -> bool:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"label maps differ in size: {a.size} vs {b.size}")
    return canonicalize(a) == canonicalize(b)


def first_difference(a, b, width: int):
    """(x, y, a_label, b_label) of the first cell where canonical forms differ, or None."""
    ca = canonicalize(a).labels
    cb = canonicalize(b).labels
    diff = np.flatnonzero(ca != cb)
    if diff.size == 0:
        return None
    i = int(diff[0])
    return i % width, i // width, int(np.asarray(a).ravel()[i]), int(np.asarray(b).ravel()[i])


def check_against(reference, labels, width: int, name: str = "labels") -> None:
    """Raise :class:`VerificationError` unless ``labels`` equals ``reference`` cell for cell."""
    ref = np.asarray(reference).ravel()
    got = np.asarray(labels).ravel()
    if ref.shape != got.shape:
        raise VerificationError(f"{name}: {got.size} cells, expected {ref.size}")
    bad = np.flatnonzero(ref != got)
    if bad.size:
        i = int(bad[0])
        raise VerificationError(
            f"{name}: {bad.size} cells differ; first at (x={i % width}, y={i // width}): "
            f"got {int(got[i])}, expected {int(ref[i])}"
        )


def renumber(labels) -> np.ndarray:
    """Compact labels to 1..K in order of first appearance (for display)."""
    _, first, inverse = np.unique(np.asarray(labels).ravel(), return_index=True, return_inverse=True)
    rank = np.empty(first.size, np.int64)
    rank[np.argsort(first)] = np.arange(1, first.size + 1)
    return rank[inverse.ravel()]


# ---- label file encodings -------------------------------------------------

LABEL_FORMATS = ("raw-u32le", "csv", "pgm-recolor")
MAX_RAW_SIDE = 65535


def encode_labels(labels, width: int, height: int, fmt: str) -> bytes:
    labels = np.asarray(labels).ravel()
    if labels.size != width * height:
        raise ValueError("label count does not match dimensions")
    if fmt == "raw-u32le":
        if width > MAX_RAW_SIDE or height > MAX_RAW_SIDE:
            raise ValueError(f"raw-u32le output limited to {MAX_RAW_SIDE} cells per side")
        return labels.astype("<u4").tobytes()
    if fmt == "csv":
        buf = io.StringIO()
        np.savetxt(buf, labels.reshape(height, width), fmt="%d", delimiter=",")
        return buf.getvalue().encode()
    if fmt == "pgm-recolor":
        from .grid import write_pgm

        ids = renumber(labels)
        # spread consecutive ids over the grey range; 0 stays unused
        grey = 1 + (ids * 97) % 255
        return write_pgm(Image(width, height, grey.astype(np.uint8).tobytes()))
    raise ValueError(f"unknown label format {fmt!r}")


def decode_labels(data: bytes, width: int, height: int, fmt: str) -> np.ndarray:
    if fmt == "raw-u32le":
        arr = np.frombuffer(data, dtype="<u4")
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} labels, got {arr.size}")
        return arr.astype(np.int64)
    if fmt == "csv":
        arr = np.loadtxt(io.StringIO(data.decode()), dtype=np.int64, delimiter=",", ndmin=2)
        if arr.shape != (height, width):
            raise ValueError(f"expected {height}x{width} labels, got {arr.shape}")
        return arr.ravel()
    raise ValueError(f"format {fmt!r} cannot be decoded")
