"""Compiled kernels: the same per-thread programs run on the sequential schedule
(blocks in index order, threads in ascending tid)."""

import numba as nb
import numpy as np

jit = nb.njit(cache=True, nogil=True)


@jit
def find(p, i, counters):
    root = i
    hops = 0
    while p[root] != root:
        root = p[root]
        hops += 1
    counters[0] += 1
    counters[1] += hops
    while p[i] != root:
        nxt = p[i]
        p[i] = root
        i = nxt
    return root


@jit
def union_min(p, a, b, counters):
    ra = find(p, a, counters)
    rb = find(p, b, counters)
    if ra < rb:
        p[rb] = ra
    elif rb < ra:
        p[ra] = rb


@jit
def local_merge(pix, width, height, bx, by, labels, coarse, counters):
    """Kernel 1 over every block; ``coarse`` toggles the row/column pre-pass.

    ``counters`` accumulates (find calls, hops) of the local union phases only.
    """
    nbx = (width + bx - 1) // bx
    nby = (height + by - 1) // by
    n = bx * by
    lab = np.empty(n, np.int32)
    buf = np.empty(n, np.uint8)
    guard = np.empty(n, np.bool_)
    scratch_counters = np.zeros(2, np.int64)
    for byi in range(nby):
        for bxi in range(nbx):
            ox = bxi * bx
            oy = byi * by
            for tid in range(n):
                x = ox + tid % bx
                y = oy + tid // bx
                g = x < width and y < height
                guard[tid] = g
                if g:
                    lab[tid] = tid
                    buf[tid] = pix[x + y * width]
            if coarse:
                for tid in range(n):
                    if guard[tid] and tid % bx > 0 and buf[tid] == buf[tid - 1]:
                        lab[tid] = lab[tid - 1]
                for tid in range(n):
                    if guard[tid] and tid >= bx and buf[tid] == buf[tid - bx]:
                        lab[tid] = lab[tid - bx]
                for tid in range(n):
                    if guard[tid]:
                        temp = tid
                        while temp != lab[temp]:
                            temp = lab[temp]
                            lab[tid] = temp
            for tid in range(n):
                if guard[tid] and tid % bx > 0 and buf[tid] == buf[tid - 1]:
                    union_min(lab, tid, tid - 1, counters)
            for tid in range(n):
                if guard[tid] and tid >= bx and buf[tid] == buf[tid - bx]:
                    union_min(lab, tid, tid - bx, counters)
            for tid in range(n):
                if guard[tid]:
                    root = find(lab, tid, scratch_counters)
                    gx = ox + root % bx
                    gy = oy + root // bx
                    labels[ox + tid % bx + (oy + tid // bx) * width] = gx + gy * width


@jit
def boundary_merge(pix, width, height, bx, by, labels, total, counters):
    """Kernel 2: one flat id covers a vertical and a horizontal boundary cell."""
    k = width // bx
    px = k * height
    py = (height // by) * width
    unions = 0
    for j in range(total):
        if j < px:
            x = (j % k + 1) * bx
            y = j // k
            if x < width:
                p = x + y * width
                if pix[p] == pix[p - 1]:
                    union_min(labels, p, p - 1, counters)
                    unions += 1
        if j < py:
            x = j % width
            y = (j // width + 1) * by
            if y < height:
                p = x + y * width
                if pix[p] == pix[p - width]:
                    union_min(labels, p, p - width, counters)
                    unions += 1
    return unions


@jit
def cell_global_merge(pix, width, height, bx, by, labels, counters):
    """Conventional UF global merge: one thread per cell, guards pick boundary cells."""
    unions = 0
    for p in range(width * height):
        x = p % width
        y = p // width
        if x > 0 and x % bx == 0 and pix[p] == pix[p - 1]:
            union_min(labels, p, p - 1, counters)
            unions += 1
        if y > 0 and y % by == 0 and pix[p] == pix[p - width]:
            union_min(labels, p, p - width, counters)
            unions += 1
    return unions


@jit
def line_global_merge(pix, width, height, bx, labels, counters):
    """Line UF global phase: every cell unions with its upper neighbour, and
    with its left neighbour across segment boundaries."""
    unions = 0
    for p in range(width * height):
        x = p % width
        y = p // width
        if y > 0 and pix[p] == pix[p - width]:
            union_min(labels, p, p - width, counters)
            unions += 1
        if x > 0 and x % bx == 0 and pix[p] == pix[p - 1]:
            union_min(labels, p, p - 1, counters)
            unions += 1
    return unions


@jit
def flatten_ordered(labels):
    # parents never exceed their index, so one ascending pass reaches every root
    for i in range(labels.shape[0]):
        labels[i] = labels[labels[i]]


@jit
def label_equivalence(pix, width, height, labels, ref, max_iter):
    """Scan (neighbour propagation into the cell's own label), analysis (root
    of each label chain into ``ref``), relabel; repeat until a scan changes
    nothing. Returns the number of scans."""
    n = width * height
    for i in range(n):
        labels[i] = i
    it = 0
    while it < max_iter:
        it += 1
        changed = False
        for y in range(height):
            row = y * width
            for x in range(width):
                p = row + x
                v = pix[p]
                m = labels[p]
                if x > 0 and pix[p - 1] == v and labels[p - 1] < m:
                    m = labels[p - 1]
                if x < width - 1 and pix[p + 1] == v and labels[p + 1] < m:
                    m = labels[p + 1]
                if y > 0 and pix[p - width] == v and labels[p - width] < m:
                    m = labels[p - width]
                if y < height - 1 and pix[p + width] == v and labels[p + width] < m:
                    m = labels[p + width]
                if m < labels[p]:
                    labels[p] = m
                    changed = True
        if not changed:
            break
        for p in range(n):
            r = labels[p]
            while labels[r] != r:
                r = labels[r]
            ref[p] = r
        for p in range(n):
            labels[p] = ref[p]
    return it


@jit
def flood_fill(pix, width, height, labels):
    n = width * height
    for i in range(n):
        labels[i] = -1
    queue = np.empty(n, np.int32)
    for seed in range(n):
        if labels[seed] != -1:
            continue
        v = pix[seed]
        labels[seed] = seed
        head = 0
        tail = 1
        queue[0] = seed
        while head < tail:
            p = queue[head]
            head += 1
            x = p % width
            y = p // width
            if x > 0 and labels[p - 1] == -1 and pix[p - 1] == v:
                labels[p - 1] = seed
                queue[tail] = p - 1
                tail += 1
            if x < width - 1 and labels[p + 1] == -1 and pix[p + 1] == v:
                labels[p + 1] = seed
                queue[tail] = p + 1
                tail += 1
            if y > 0 and labels[p - width] == -1 and pix[p - width] == v:
                labels[p - width] = seed
                queue[tail] = p - width
                tail += 1
            if y < height - 1 and labels[p + width] == -1 and pix[p + width] == v:
                labels[p + width] = seed
                queue[tail] = p + width
                tail += 1
