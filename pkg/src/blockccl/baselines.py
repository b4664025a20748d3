"""Comparison labelers and the sequential flood-fill oracle.

* label equivalence: multi-pass scan / analysis / relabel until nothing changes;
* conventional UF: local UF in 2D blocks (no coarse pre-pass) followed by a
  global merge launched with one thread per cell;
* line UF: local UF along row segments, then a global UF pass over every cell.

All of them, like the optimized labeler, return min-index labels.
"""

from __future__ import annotations

import numpy as np

from . import _native
from .dsf import FindStats, union_min
from .engine import (
    DEFAULT_2D,
    DEFAULT_LINE,
    SEQUENTIAL,
    BlockConfig,
    GridPlan,
    LaunchLog,
    OrderPolicy,
    PhaseProgram,
    run_blocked,
    run_flat,
)
from .grid import Image
from .optimized import LabelState, label_optimized, link_flatten, local_merge

GLOBAL_MERGE = "global_merge"


def flood_fill_oracle(img: Image) -> np.ndarray:
    """Sequential BFS over 4-connected equal-value regions.

    Seeds are taken in index order, so each component is labelled with its
    smallest cell index.
    """
    out = np.empty(img.size, np.int32)
    _native.flood_fill(img.flat, img.width, img.height, out)
    return out


# ---- label equivalence ----------------------------------------------------


class _LEState:
    def __init__(self, img: Image):
        self.width = img.width
        self.height = img.height
        self.pix = img.pixels
        self.labels = list(range(img.size))
        self.ref = [0] * img.size
        self.changed = False


def _le_scan(th, sm, st):
    # neighbour propagation: a cell lowers its own label to the smallest label
    # among equal-valued neighbours (reads may see old or new neighbour labels)
    p = th.cell
    w = st.width
    pix = st.pix
    lab = st.labels
    v = pix[p]
    cur = lab[p]
    m = cur
    if th.x > 0 and pix[p - 1] == v and lab[p - 1] < m:
        m = lab[p - 1]
    if th.x < w - 1 and pix[p + 1] == v and lab[p + 1] < m:
        m = lab[p + 1]
    if th.y > 0 and pix[p - w] == v and lab[p - w] < m:
        m = lab[p - w]
    if th.y < st.height - 1 and pix[p + w] == v and lab[p + w] < m:
        m = lab[p + w]
    if m < cur:
        lab[p] = m
        st.changed = True


def _le_analysis(th, sm, st):
    # a label names a cell of the same region with a label no larger, so
    # following labels as pointers ends at a self-labelled root
    lab = st.labels
    r = lab[th.cell]
    while lab[r] != r:
        r = lab[r]
    st.ref[th.cell] = r


def _le_relabel(th, sm, st):
    st.labels[th.cell] = st.ref[th.cell]


LE_SCAN = PhaseProgram("le_scan", [_le_scan])
LE_ANALYSIS = PhaseProgram("le_analysis", [_le_analysis])
LE_RELABEL = PhaseProgram("le_relabel", [_le_relabel])


def label_le(
    img: Image,
    cfg: BlockConfig = DEFAULT_2D,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    log: LaunchLog | None = None,
    info: dict | None = None,
) -> np.ndarray:
    """Label equivalence. ``info['iterations']`` receives the number of scan passes."""
    n = img.size
    if mode == "native":
        labels = np.empty(n, np.int32)
        ref = np.empty(n, np.int32)
        iterations = _native.label_equivalence(img.flat, img.width, img.height, labels, ref, n + 1)
        if log is not None:
            launches = GridPlan(img.width, img.height, cfg).launched
            log.record(LE_SCAN.name, launches * iterations)
            log.record(LE_ANALYSIS.name, launches * (iterations - 1))
            log.record(LE_RELABEL.name, launches * (iterations - 1))
    else:
        st = _LEState(img)
        iterations = 0
        while iterations <= n:
            iterations += 1
            st.changed = False
            run_blocked(img.width, img.height, cfg, LE_SCAN, st, order, mode, log)
            if not st.changed:
                break
            run_blocked(img.width, img.height, cfg, LE_ANALYSIS, st, order, mode, log)
            run_blocked(img.width, img.height, cfg, LE_RELABEL, st, order, mode, log)
        labels = np.asarray(st.labels, dtype=np.int32)
    if info is not None:
        info["iterations"] = int(iterations)
    return labels


# ---- conventional UF ------------------------------------------------------


def _cell_merge_thread(p, st):
    w = st.width
    x = p % w
    y = p // w
    pix = st.pix
    if x > 0 and x % st.cfg.bx == 0 and pix[p] == pix[p - 1]:
        union_min(st.labels, p, p - 1)
        st.unions.incr()
    if y > 0 and y % st.cfg.by == 0 and pix[p] == pix[p - w]:
        union_min(st.labels, p, p - w)
        st.unions.incr()


def _native_cell_merge(st):
    c = np.zeros(2, np.int64)
    st.unions.value += _native.cell_global_merge(
        st.pix, st.width, st.height, st.cfg.bx, st.cfg.by, st.labels, c
    )


def label_conventional_uf(
    img: Image,
    cfg: BlockConfig = DEFAULT_2D,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    log: LaunchLog | None = None,
    stats: FindStats | None = None,
) -> np.ndarray:
    st = LabelState(img, cfg, mode == "native")
    local_merge(st, False, order, mode, log)
    run_flat(img.size, _cell_merge_thread, st, order, mode, log, GLOBAL_MERGE, _native_cell_merge)
    link_flatten(st, log)
    if stats is not None:
        stats.add(st.stats.calls, st.stats.hops)
    return st.label_array()


# ---- line-based UF --------------------------------------------------------


def _line_merge_thread(p, st):
    w = st.width
    pix = st.pix
    if p >= w and pix[p] == pix[p - w]:
        union_min(st.labels, p, p - w)
        st.unions.incr()
    x = p % w
    if x > 0 and x % st.cfg.bx == 0 and pix[p] == pix[p - 1]:
        union_min(st.labels, p, p - 1)
        st.unions.incr()


def _native_line_merge(st):
    c = np.zeros(2, np.int64)
    st.unions.value += _native.line_global_merge(
        st.pix, st.width, st.height, st.cfg.bx, st.labels, c
    )


def label_line_uf(
    img: Image,
    cfg: BlockConfig = DEFAULT_LINE,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    log: LaunchLog | None = None,
    stats: FindStats | None = None,
) -> np.ndarray:
    if cfg.by != 1:
        raise ValueError(f"line UF needs one-row blocks, got {cfg}")
    st = LabelState(img, cfg, mode == "native")
    local_merge(st, False, order, mode, log)
    run_flat(img.size, _line_merge_thread, st, order, mode, log, GLOBAL_MERGE, _native_line_merge)
    link_flatten(st, log)
    if stats is not None:
        stats.add(st.stats.calls, st.stats.hops)
    return st.label_array()


# ---- registry -------------------------------------------------------------

ALGORITHMS = {
    "optimized_uf": label_optimized,
    "conventional_uf": label_conventional_uf,
    "line_uf": label_line_uf,
    "label_le": label_le,
}
PARALLEL_ALGOS = tuple(ALGORITHMS)
DEFAULT_CONFIGS = {
    "optimized_uf": DEFAULT_2D,
    "conventional_uf": DEFAULT_2D,
    "line_uf": DEFAULT_LINE,
    "label_le": DEFAULT_2D,
}
ALGO_IDS = PARALLEL_ALGOS + ("oracle",)


def label(
    algo: str,
    img: Image,
    cfg: BlockConfig | None = None,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    log: LaunchLog | None = None,
) -> np.ndarray:
    """Dispatch by algorithm id; ``cfg=None`` picks the algorithm's default blocks."""
    if algo == "oracle":
        return flood_fill_oracle(img)
    try:
        fn = ALGORITHMS[algo]
    except KeyError:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGO_IDS)}") from None
    return fn(img, cfg or DEFAULT_CONFIGS[algo], order=order, mode=mode, log=log)
