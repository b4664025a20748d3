"""Disjoint-set forest with minimum-root union, safe for concurrent callers.

Parents only ever move toward smaller indices, so every root is the minimum
element of its set and the labels produced after ``flatten`` do not depend on
the order in which unions were applied.
"""

from __future__ import annotations

import threading

import numpy as np

_STRIPES = 64


class FindStats:
    """Counts find calls and parent hops (instrumentation for path-length studies)."""

    __slots__ = ("calls", "hops")

    def __init__(self):
        self.calls = 0
        self.hops = 0

    @property
    def mean_path(self) -> float:
        return self.hops / self.calls if self.calls else 0.0

    def add(self, calls, hops):
        self.calls += int(calls)
        self.hops += int(hops)

    def __repr__(self):
        return f"FindStats(calls={self.calls}, hops={self.hops}, mean={self.mean_path:.3f})"


class ParentArray:
    """Parent array over ``0..n-1``.

    ``data`` may be any indexable buffer (a list by default); the engine passes
    bounds-checked scratch buffers here. Writes go through :meth:`cas`, an
    atomic compare-and-swap emulated with striped locks.
    """

    def __init__(self, parent, data=None):
        if data is not None:
            self.data = data
        elif isinstance(parent, int):
            self.data = list(range(parent))
        else:
            self.data = [int(v) for v in parent]
        self._n = len(self.data)
        self._locks = [threading.Lock() for _ in range(_STRIPES)]

    def __len__(self):
        return self._n

    def __getitem__(self, i):
        return self.data[i]

    def _check(self, i):
        if not 0 <= i < self._n:
            raise IndexError(f"cell index {i} out of range [0, {self._n})")

    def cas(self, i, expected, new) -> bool:
        with self._locks[i & (_STRIPES - 1)]:
            if self.data[i] == expected:
                self.data[i] = new
                return True
            return False

    def to_numpy(self, dtype=np.int32) -> np.ndarray:
        return np.array([self.data[i] for i in range(self._n)], dtype=dtype)


def find(p: ParentArray, i: int, stats: FindStats | None = None) -> int:
    """Root of ``i``; compresses the visited path when no one interferes."""
    p._check(i)
    data = p.data
    root = i
    hops = 0
    nxt = data[root]
    while nxt != root:
        root = nxt
        nxt = data[root]
        hops += 1
    if stats is not None:
        stats.calls += 1
        stats.hops += hops
    # compression is best-effort: only swing entries that still hold the value
    # we saw and that would strictly decrease
    j = i
    while j != root:
        cur = data[j]
        if cur == j:
            break
        if cur > root:
            p.cas(j, cur, root)
        j = cur
    return root


def union_min(p: ParentArray, a: int, b: int, stats: FindStats | None = None) -> None:
    """Join the sets of ``a`` and ``b``; the smaller root survives."""
    p._check(a)
    p._check(b)
    while True:
        ra = find(p, a, stats)
        rb = find(p, b, stats)
        if ra == rb:
            return
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        if p.cas(hi, hi, lo):
            return
        # ``hi`` stopped being a root under us; retry from the new roots
        a, b = hi, lo


def atomic_min(p: ParentArray, i: int, value: int) -> bool:
    """Lower ``p[i]`` to ``value`` if smaller. Returns whether it changed."""
    while True:
        cur = p.data[i]
        if value >= cur:
            return False
        if p.cas(i, cur, value):
            return True


def flatten_array(parent: np.ndarray) -> np.ndarray:
    """Point every entry at its root by repeated pointer jumping (in place)."""
    while True:
        nxt = parent[parent]
        if np.array_equal(nxt, parent):
            return parent
        parent[:] = nxt


def flatten(p) -> None:
    """``p[i] = find(p, i)`` for all i. Requires exclusive access."""
    if isinstance(p, np.ndarray):
        flatten_array(p)
        return
    arr = flatten_array(p.to_numpy(np.int64))
    data = p.data
    for i, v in enumerate(arr.tolist()):
        data[i] = v
