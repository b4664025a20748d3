"""Three-kernel union-find labeling: coarse-labeled local merge, boundary
analysis on block-boundary cells only, and a final link (flatten).

Every phase function below is the body of one thread between two barriers.
Labels are global linear cell indices throughout; the final map holds, for
each cell, the smallest index in its 4-connected equal-value component.
"""

from __future__ import annotations

import random
import threading
from collections import deque

import numpy as np

from . import _native
from .dsf import FindStats, ParentArray, find, flatten, union_min
from .engine import (
    DEFAULT_2D,
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

KERNEL1 = "local_merge"
KERNEL2 = "boundary_analysis"
LINK = "link"


class AuditError(AssertionError):
    pass


class Counter:
    def __init__(self):
        self.value = 0
        self._lock = threading.Lock()

    def incr(self):
        with self._lock:
            self.value += 1


class LabelState:
    """Global memory of one labeling run.

    Emulated modes keep labels in a :class:`ParentArray` over a Python list;
    native mode keeps a contiguous int32 array.
    """

    def __init__(self, img: Image, cfg: BlockConfig, native: bool):
        if img.size >= 2**31:
            raise ValueError("image too large for 32-bit labels")
        self.img = img
        self.width = img.width
        self.height = img.height
        self.cfg = cfg
        self.native = native
        self.stats = FindStats()  # local-union finds only
        self.unions = Counter()
        if native:
            self.pix = img.flat
            self.labels = np.arange(img.size, dtype=np.int32)
            self.counters = np.zeros(2, np.int64)
        else:
            self.pix = img.pixels
            self.labels = ParentArray(img.size)

    def label_array(self) -> np.ndarray:
        if self.native:
            return self.labels.copy()
        return self.labels.to_numpy()


# ---- Kernel 1 -------------------------------------------------------------


def _setup_scratch(sm, cfg):
    sm.bx = cfg.bx
    sm.forest = ParentArray(None, data=sm.label)


def init_local_labels(th, sm, st):
    sm.label[th.tid] = th.tid
    sm.pix[th.tid] = st.pix[th.cell]


def row_scan(th, sm, st):
    t = th.tid
    if th.tx > 0 and sm.pix[t] == sm.pix[t - 1]:
        sm.label[t] = sm.label[t - 1]


def column_scan(th, sm, st):
    t = th.tid
    up = t - sm.bx
    if th.ty > 0 and sm.pix[t] == sm.pix[up]:
        sm.label[t] = sm.label[up]


def row_column_unify(th, sm, st):
    label = sm.label
    t = th.tid
    temp = t
    while temp != label[temp]:
        temp = label[temp]
        label[t] = temp


def union_left(th, sm, st):
    t = th.tid
    if th.tx > 0 and sm.pix[t] == sm.pix[t - 1]:
        union_min(sm.forest, t, t - 1, st.stats)


def union_up(th, sm, st):
    t = th.tid
    up = t - sm.bx
    if th.ty > 0 and sm.pix[t] == sm.pix[up]:
        union_min(sm.forest, t, up, st.stats)


def _unify_then_union_left(th, sm, st):
    # the kernel has no barrier between unification and the first union
    row_column_unify(th, sm, st)
    union_left(th, sm, st)


def local_to_global(th, sm, st):
    bx = sm.bx
    root = find(sm.forest, th.tid)
    gx = th.x - th.tx + root % bx
    gy = th.y - th.ty + root // bx
    st.labels.data[th.cell] = gx + gy * st.width


def global_label(block_x, block_y, root, bx, by, width) -> int:
    """Global linear index of local tid ``root`` in block (block_x, block_y)."""
    return (block_x * bx + root % bx) + (block_y * by + root // bx) * width


def _block_components(threads, sm):
    """Within-block 4-connected equal-value components: tid -> min tid."""
    comp = {}
    present = {th.tid: th for th in threads}
    bx = sm.bx
    for th in threads:
        if th.tid in comp:
            continue
        comp[th.tid] = th.tid
        q = deque([th])
        while q:
            cur = q.popleft()
            v = sm.pix[cur.tid]
            nbrs = []
            if cur.tx > 0:
                nbrs.append(cur.tid - 1)
            if cur.tid + 1 in present and present[cur.tid + 1].ty == cur.ty:
                nbrs.append(cur.tid + 1)
            if cur.ty > 0:
                nbrs.append(cur.tid - bx)
            if cur.tid + bx in present:
                nbrs.append(cur.tid + bx)
            for u in nbrs:
                if u not in comp and sm.pix[u] == v:
                    comp[u] = th.tid
                    q.append(present[u])
    return comp


def audit_local(plan, bidx, threads, sm, st, phase):
    """Checked-mode invariants of the local label map after each barrier."""
    if phase == 0:
        for th in threads:
            if sm.pix[th.tid] != st.pix[th.cell]:
                raise AuditError(f"block {bidx}: pixel buffer mismatch at tid {th.tid}")
        return
    comp = getattr(sm, "components", None)
    if comp is None:
        comp = sm.components = _block_components(threads, sm)
    for th in threads:
        t = th.tid
        lab = sm.label[t]
        if lab > t:
            raise AuditError(f"block {bidx} phase {phase}: label {lab} > tid {t}")
        if comp.get(lab) != comp[t]:
            raise AuditError(
                f"block {bidx} phase {phase}: tid {t} labelled {lab} outside its component"
            )


def _native_local_merge(coarse):
    def run(st):
        _native.local_merge(
            st.pix, st.width, st.height, st.cfg.bx, st.cfg.by, st.labels, coarse, st.counters
        )
        st.stats.add(st.counters[0], st.counters[1])
        st.counters[:] = 0

    return run


def local_merge_program(coarse: bool = True) -> PhaseProgram:
    """Kernel 1; with ``coarse=False`` the row/column pre-pass is skipped."""
    if coarse:
        phases = [
            init_local_labels,
            row_scan,
            column_scan,
            _unify_then_union_left,
            union_up,
            local_to_global,
        ]
    else:
        phases = [init_local_labels, union_left, union_up, local_to_global]
    audit = audit_local if coarse else _audit_plain
    return PhaseProgram(
        name=KERNEL1,
        phases=phases,
        scratch={"label": None, "pix": None},
        audit=audit,
        native=_native_local_merge(coarse),
        setup=_setup_scratch,
    )


def _audit_plain(plan, bidx, threads, sm, st, phase):
    audit_local(plan, bidx, threads, sm, st, min(phase, 1))


def local_merge(st: LabelState, coarse=True, order=SEQUENTIAL, mode="checked", log=None):
    run_blocked(st.width, st.height, st.cfg, local_merge_program(coarse), st, order, mode, log)


# ---- Kernel 2 -------------------------------------------------------------


def boundary_cell_counts(width: int, height: int, bx: int, by: int) -> tuple[int, int]:
    """Cells on block boundaries along x and y: ``floor(N/bx)*M, floor(M/by)*N``."""
    if bx <= 0 or by <= 0:
        raise ValueError("block dimensions must be positive")
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    return (width // bx) * height, (height // by) * width


def boundary_cells(j: int, width: int, height: int, bx: int, by: int):
    """Cells handled by flat id ``j``: (vertical-boundary cell, horizontal-boundary cell).

    Slot k of each row covers the first column of block column k + 1, so the
    floor(N/bx) slots reach every interior boundary column, including the
    one opening a partial last block. Either entry is None when out of range.
    """
    k = width // bx
    v = h = None
    if k and j < k * height:
        x = (j % k + 1) * bx
        if x < width:
            v = x + (j // k) * width
    if j < (height // by) * width:
        y = (j // width + 1) * by
        if y < height:
            h = j % width + y * width
    return v, h


def _boundary_thread(j, st):
    w = st.width
    pix = st.pix
    v, h = boundary_cells(j, w, st.height, st.cfg.bx, st.cfg.by)
    if v is not None and pix[v] == pix[v - 1]:
        union_min(st.labels, v, v - 1)
        st.unions.incr()
    if h is not None and pix[h] == pix[h - w]:
        union_min(st.labels, h, h - w)
        st.unions.incr()


def _native_boundary(st):
    px, py = boundary_cell_counts(st.width, st.height, st.cfg.bx, st.cfg.by)
    scratch = np.zeros(2, np.int64)
    st.unions.value += _native.boundary_merge(
        st.pix, st.width, st.height, st.cfg.bx, st.cfg.by, st.labels, max(px, py), scratch
    )


def boundary_merge(st: LabelState, order=SEQUENTIAL, mode="checked", log=None):
    px, py = boundary_cell_counts(st.width, st.height, st.cfg.bx, st.cfg.by)
    run_flat(max(px, py), _boundary_thread, st, order, mode, log, KERNEL2, _native_boundary)


# ---- link -----------------------------------------------------------------


def link_flatten(st: LabelState, log=None):
    if log is not None:
        log.record(LINK, st.width * st.height)
    if st.native:
        _native.flatten_ordered(st.labels)
    else:
        flatten(st.labels)


def label_optimized(
    img: Image,
    cfg: BlockConfig = DEFAULT_2D,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    log: LaunchLog | None = None,
    stats: FindStats | None = None,
) -> np.ndarray:
    """Label ``img``; returns int32 labels of length N*M (min index per component)."""
    st = LabelState(img, cfg, mode == "native")
    local_merge(st, True, order, mode, log)
    boundary_merge(st, order, mode, log)
    link_flatten(st, log)
    if stats is not None:
        stats.add(st.stats.calls, st.stats.hops)
    return st.label_array()


def trace_block(img: Image, cfg: BlockConfig, bidx: int = 0, order=SEQUENTIAL, coarse=True):
    """Local label map of one block after each Kernel 1 barrier.

    Returns ``{phase_name: labels}`` where labels lists ``label_sm`` per tid
    (``None`` for out-of-guard tids).
    """
    order = OrderPolicy.parse(order)
    prog = local_merge_program(coarse)
    plan = GridPlan(img.width, img.height, cfg)
    st = LabelState(img, cfg, native=False)
    sm = prog.new_scratch(cfg, checked=True)
    threads = plan.threads(bidx)
    rng = random.Random(order.seed)
    out = {}
    for k, phase in enumerate(prog.phases):
        seq = list(threads)
        if order.kind == "shuffled":
            rng.shuffle(seq)
        for th in seq:
            phase(th, sm, st)
        prog.audit(plan, bidx, threads, sm, st, k)
        out[phase.__name__.lstrip("_")] = [
            sm.label[t] if sm.label.written(t) else None for t in range(cfg.threads)
        ]
    return out
