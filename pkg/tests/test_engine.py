import threading

import numpy as np
import pytest

from blockccl.engine import (
    BlockConfig,
    GridPlan,
    LaunchLog,
    OrderPolicy,
    PhaseProgram,
    ScratchError,
    run_blocked,
    run_flat,
)
from blockccl.grid import generate
from blockccl.optimized import LabelState, boundary_merge, local_merge
from blockccl.baselines import flood_fill_oracle

ORDERS = ["sequential", "shuffled:1", "shuffled:7", "parallel:3"]


class Sink:
    def __init__(self):
        self.snapshots = {}
        self.lock = threading.Lock()


def test_block_config_limits():
    with pytest.raises(ValueError):
        BlockConfig(0, 4)
    with pytest.raises(ValueError):
        BlockConfig(64, 32)
    assert BlockConfig(1024, 1).threads == 1024
    assert BlockConfig.parse("32x16") == BlockConfig(32, 16)
    with pytest.raises(ValueError):
        BlockConfig.parse("32")


def test_order_policy_parse():
    assert OrderPolicy.parse("shuffled:5") == OrderPolicy("shuffled", seed=5)
    assert OrderPolicy.parse("parallel:8").workers == 8
    with pytest.raises(ValueError):
        OrderPolicy.parse("random")


@pytest.mark.parametrize("w,h,bx,by", [(8, 8, 4, 4), (9, 5, 4, 4), (1, 1, 32, 16), (33, 17, 32, 16), (7, 3, 1, 1)])
def test_every_cell_owned_once(w, h, bx, by):
    plan = GridPlan(w, h, BlockConfig(bx, by))
    cells = [th.cell for b in range(plan.n_blocks) for th in plan.threads(b)]
    assert sorted(cells) == list(range(w * h))
    for b in range(plan.n_blocks):
        for th in plan.threads(b):
            assert th.tid == th.tx + th.ty * bx
            assert th.cell == th.x + th.y * w


@pytest.mark.parametrize("order", ORDERS)
def test_identity_phase_scratch(order):
    sink = Sink()

    def write(th, sm, st):
        sm.buf[th.tid] = th.tid

    def audit(plan, bidx, threads, sm, st, k):
        sink.snapshots[bidx] = [sm.buf[t] for t in range(16)]

    prog = PhaseProgram("identity", [write], {"buf": None}, audit=audit)
    run_blocked(8, 8, BlockConfig(4, 4), prog, sink, order=order, mode="checked")
    assert sink.snapshots == {b: list(range(16)) for b in range(4)}


def test_empty_program_is_noop():
    state = {"x": 1}
    log = LaunchLog()
    run_blocked(8, 8, BlockConfig(4, 4), PhaseProgram("empty", []), state, log=log)
    assert state == {"x": 1}


@pytest.mark.parametrize("order", ORDERS)
def test_barrier_soundness(order):
    """Phase 1 of a block sees every phase-0 write of that block and nothing of its own phase 1."""
    seen = []

    def p0(th, sm, st):
        sm.a[th.tid] = th.tid + 1

    def p1(th, sm, st):
        total = sum(sm.a[t] for t in range(len(sm.a)) if sm.a.written(t))
        with st.lock:
            seen.append((th.bidx, total))
        sm.b[th.tid] = 1

    sink = Sink()
    run_blocked(6, 6, BlockConfig(3, 2), PhaseProgram("b", [p0, p1], {"a": None, "b": None}), sink, order)
    assert len(seen) == 36
    assert all(total == 21 for _, total in seen)


@pytest.mark.parametrize("order", ORDERS)
def test_block_isolation(order):
    def p0(th, sm, st):
        # fresh scratch per block: nothing written yet by any other block
        assert not sm.buf.written(th.tid)
        sm.buf[th.tid] = th.bidx

    def p1(th, sm, st):
        for t in range(len(sm.buf)):
            if sm.buf.written(t):
                assert sm.buf[t] == th.bidx

    run_blocked(10, 7, BlockConfig(4, 4), PhaseProgram("iso", [p0, p1], {"buf": None}), None, order)


def test_unguarded_neighbour_read_rejected():
    def bad(th, sm, st):
        sm.buf[th.tid] = 0
        sm.buf[th.tid - 1]  # wraps for tid 0 without a guard

    prog = PhaseProgram("bad", [bad], {"buf": None})
    with pytest.raises(ScratchError):
        run_blocked(4, 4, BlockConfig(4, 4), prog, None, mode="checked")
    # fast mode does not police this
    run_blocked(4, 4, BlockConfig(4, 4), prog, None, mode="fast")


def test_read_of_out_of_guard_slot_rejected():
    def p0(th, sm, st):
        sm.buf[th.tid] = 1

    def p1(th, sm, st):
        sm.buf[th.tid + 1]  # slot past the image edge is never written

    prog = PhaseProgram("edge", [p0, p1], {"buf": None})
    with pytest.raises(ScratchError):
        run_blocked(3, 1, BlockConfig(4, 1), prog, None, mode="checked")


def test_scratch_overflow_rejected():
    prog = PhaseProgram("big", [lambda th, sm, st: None], {"buf": 17})
    with pytest.raises(ScratchError):
        run_blocked(4, 4, BlockConfig(4, 4), prog, None)


def test_parallel_propagates_errors():
    def boom(th, sm, st):
        if th.tid == 3:
            raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        run_blocked(8, 8, BlockConfig(4, 4), PhaseProgram("x", [boom]), None, order="parallel:4")


def test_native_requires_sequential():
    prog = PhaseProgram("n", [], native=lambda st: None)
    with pytest.raises(ValueError):
        run_blocked(4, 4, BlockConfig(4, 4), prog, None, order="shuffled:1", mode="native")
    with pytest.raises(ValueError):
        run_blocked(4, 4, BlockConfig(4, 4), PhaseProgram("m", []), None, mode="native")


def test_run_flat_zero():
    calls = []
    run_flat(0, lambda i, st: calls.append(i))
    assert calls == []


@pytest.mark.parametrize("order", ["sequential", "shuffled:2", "parallel:4"])
def test_run_flat_counter(order):
    lock = threading.Lock()
    counter = [0]

    def incr(i, st):
        with lock:
            counter[0] += 1

    n = 10**6 if order == "sequential" else 10**5
    run_flat(n, incr, order=order, mode="fast")
    assert counter[0] == n


def test_run_flat_each_id_once():
    seen = []
    lock = threading.Lock()

    def rec(i, st):
        with lock:
            seen.append(i)

    run_flat(1000, rec, order="parallel:3")
    assert sorted(seen) == list(range(1000))


def test_launch_log():
    log = LaunchLog()
    run_blocked(9, 5, BlockConfig(4, 4), PhaseProgram("k", [lambda *a: None]), None, log=log)
    run_flat(12, lambda i, st: None, log=log, name="f")
    assert log.threads("k") == 3 * 2 * 16
    assert log.threads("f") == 12


def _kernel1(img, cfg, order):
    st = LabelState(img, cfg, native=False)
    local_merge(st, True, order, "checked")
    return st


@pytest.mark.parametrize("seed", range(1, 11))
def test_kernel1_order_invariant(seed):
    img = generate("noise", 23, 19, density=0.5, seed=11)
    cfg = BlockConfig(8, 4)
    ref = _kernel1(img, cfg, "sequential").label_array()
    got = _kernel1(img, cfg, OrderPolicy("shuffled", seed=seed)).label_array()
    assert np.array_equal(ref, got)


def test_kernel2_sequential_vs_parallel():
    img = generate("noise", 40, 24, density=0.45, seed=2)
    cfg = BlockConfig(8, 4)
    out = []
    for order in ("sequential", "parallel:4"):
        st = _kernel1(img, cfg, "sequential")
        boundary_merge(st, order, "checked")
        arr = st.labels.to_numpy()
        from blockccl.dsf import flatten_array

        out.append(flatten_array(arr))
    assert np.array_equal(out[0], out[1])
    assert np.array_equal(out[0], flood_fill_oracle(img))
