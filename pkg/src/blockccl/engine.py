"""Bulk-synchronous block executor.

A kernel is written as a list of per-thread phase functions; the gap between
two phases is a block barrier. Each block gets private scratch buffers (the
"shared memory"). Within a phase, threads run in an order chosen by the
:class:`OrderPolicy`, so programs that secretly depend on a particular
interleaving show up as test failures rather than passing by luck.

Modes:

``checked``  emulation with bounds / initialisation checks on scratch and an
             optional per-block audit hook after every barrier.
``fast``     the same emulation without the checks.
``native``   the program's compiled counterpart (sequential schedule only).
"""

from __future__ import annotations

import random
import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

MODES = ("checked", "fast", "native")
MAX_BLOCK_THREADS = 1024


class ScratchError(IndexError):
    """A thread read or wrote scratch it does not legitimately own."""


@dataclass(frozen=True)
class BlockConfig:
    bx: int = 32
    by: int = 16

    def __post_init__(self):
        if self.bx < 1 or self.by < 1:
            raise ValueError(f"block dimensions must be >= 1, got {self.bx}x{self.by}")
        if self.bx * self.by > MAX_BLOCK_THREADS:
            raise ValueError(
                f"block {self.bx}x{self.by} exceeds {MAX_BLOCK_THREADS} threads per block"
            )

    @property
    def threads(self) -> int:
        return self.bx * self.by

    @classmethod
    def parse(cls, text: str) -> "BlockConfig":
        try:
            bx, by = (int(v) for v in text.lower().split("x"))
        except ValueError:
            raise ValueError(f"block config must look like WxH, got {text!r}") from None
        return cls(bx, by)

    def __str__(self):
        return f"{self.bx}x{self.by}"


DEFAULT_2D = BlockConfig(32, 16)
DEFAULT_LINE = BlockConfig(512, 1)


class Thread(NamedTuple):
    tid: int  # 1D id within the block
    tx: int
    ty: int
    x: int  # global coordinates
    y: int
    cell: int  # x + y * width
    bidx: int  # linear block id


@dataclass(frozen=True)
class GridPlan:
    width: int
    height: int
    cfg: BlockConfig

    @property
    def blocks_x(self) -> int:
        return -(-self.width // self.cfg.bx)

    @property
    def blocks_y(self) -> int:
        return -(-self.height // self.cfg.by)

    @property
    def n_blocks(self) -> int:
        return self.blocks_x * self.blocks_y

    @property
    def launched(self) -> int:
        """Threads launched including out-of-guard padding."""
        return self.n_blocks * self.cfg.threads

    def block_origin(self, bidx: int) -> tuple[int, int]:
        return (bidx % self.blocks_x) * self.cfg.bx, (bidx // self.blocks_x) * self.cfg.by

    def threads(self, bidx: int) -> list[Thread]:
        """In-guard threads of a block, ascending tid."""
        bx, by = self.cfg.bx, self.cfg.by
        ox, oy = self.block_origin(bidx)
        w = self.width
        out = []
        for ty in range(by):
            y = oy + ty
            if y >= self.height:
                break
            for tx in range(bx):
                x = ox + tx
                if x >= w:
                    break
                out.append(Thread(tx + ty * bx, tx, ty, x, y, x + y * w, bidx))
        return out


@dataclass(frozen=True)
class OrderPolicy:
    kind: str = "sequential"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.kind not in ("sequential", "shuffled", "parallel"):
            raise ValueError(f"unknown order policy {self.kind!r}")
        if self.workers < 1:
            raise ValueError("parallel order needs at least one worker")

    @classmethod
    def parse(cls, text) -> "OrderPolicy":
        """``sequential`` | ``shuffled[:seed]`` | ``parallel[:workers]``."""
        if isinstance(text, OrderPolicy):
            return text
        kind, _, arg = str(text).partition(":")
        if kind == "shuffled":
            return cls("shuffled", seed=int(arg or 0))
        if kind == "parallel":
            return cls("parallel", workers=int(arg or 4))
        if kind == "sequential" and not arg:
            return cls()
        raise ValueError(f"bad order policy {text!r}")

    def __str__(self):
        if self.kind == "shuffled":
            return f"shuffled:{self.seed}"
        if self.kind == "parallel":
            return f"parallel:{self.workers}"
        return "sequential"


SEQUENTIAL = OrderPolicy()


class LaunchLog:
    """Work items launched per kernel, in launch order."""

    def __init__(self):
        self.entries: list[tuple[str, int]] = []

    def record(self, name: str, threads: int):
        self.entries.append((name, int(threads)))

    def threads(self, name: str) -> int:
        return sum(n for k, n in self.entries if k == name)

    def __repr__(self):
        return f"LaunchLog({self.entries})"


class CheckedBuffer:
    """Scratch buffer that rejects out-of-range and uninitialised accesses."""

    __slots__ = ("_data", "_set", "name")

    def __init__(self, size: int, name: str = "scratch"):
        self._data = [0] * size
        self._set = [False] * size
        self.name = name

    def __len__(self):
        return len(self._data)

    def __getitem__(self, i):
        if not 0 <= i < len(self._data):
            raise ScratchError(f"{self.name}[{i}] outside block scratch of {len(self._data)}")
        if not self._set[i]:
            raise ScratchError(f"{self.name}[{i}] read before any thread wrote it")
        return self._data[i]

    def __setitem__(self, i, v):
        if not 0 <= i < len(self._data):
            raise ScratchError(f"{self.name}[{i}] outside block scratch of {len(self._data)}")
        self._data[i] = v
        self._set[i] = True

    def written(self, i) -> bool:
        return self._set[i]


class Scratch:
    """Per-block scratch: one attribute per declared buffer."""

    def __init__(self, spec: dict, block_threads: int, checked: bool):
        for name, size in spec.items():
            size = block_threads if size is None else size
            if size > block_threads:
                raise ScratchError(
                    f"scratch buffer {name!r} of {size} entries exceeds {block_threads} per block"
                )
            setattr(self, name, CheckedBuffer(size, name) if checked else [0] * size)


Phase = Callable[[Thread, Scratch, object], None]


@dataclass
class PhaseProgram:
    name: str
    phases: Sequence[Phase]
    scratch: dict = field(default_factory=dict)
    # called with (plan, bidx, threads, scratch, state, phase_index) after each
    # barrier in checked mode
    audit: Callable | None = None
    # whole-launch compiled equivalent: native(state) -> None
    native: Callable | None = None
    # called with (scratch, cfg) once per block before the first phase
    setup: Callable | None = None

    def new_scratch(self, cfg: BlockConfig, checked: bool) -> Scratch:
        sm = Scratch(self.scratch, cfg.threads, checked)
        if self.setup is not None:
            self.setup(sm, cfg)
        return sm


def _phase_orders(threads, policy: OrderPolicy, rng):
    if policy.kind == "shuffled":
        order = list(threads)
        rng.shuffle(order)
        return order
    return threads


def run_blocked(
    width: int,
    height: int,
    cfg: BlockConfig,
    program: PhaseProgram,
    state=None,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "checked",
    log: LaunchLog | None = None,
) -> None:
    """Execute ``program`` once per in-guard thread of every block."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    order = OrderPolicy.parse(order)
    plan = GridPlan(width, height, cfg)
    if log is not None:
        log.record(program.name, plan.launched)
    if mode == "native":
        if program.native is None:
            raise ValueError(f"program {program.name!r} has no native form")
        if order.kind != "sequential":
            raise ValueError("native mode runs the sequential schedule only")
        program.native(state)
        return
    if not program.phases:
        return
    checked = mode == "checked"
    if order.kind == "parallel":
        _run_blocked_parallel(plan, program, state, order.workers, checked)
        return
    rng = random.Random(order.seed)
    blocks = list(range(plan.n_blocks))
    if order.kind == "shuffled":
        rng.shuffle(blocks)
    for bidx in blocks:
        threads = plan.threads(bidx)
        sm = program.new_scratch(cfg, checked)
        for k, phase in enumerate(program.phases):
            for th in _phase_orders(threads, order, rng):
                phase(th, sm, state)
            if checked and program.audit is not None:
                program.audit(plan, bidx, threads, sm, state, k)


class _Interleave:
    """Shrink the interpreter switch interval so worker threads really interleave."""

    def __enter__(self):
        self._old = sys.getswitchinterval()
        sys.setswitchinterval(1e-6)

    def __exit__(self, *exc):
        sys.setswitchinterval(self._old)


def _run_workers(n, body):
    errors = []

    def wrap(w):
        try:
            body(w)
        except BaseException as e:  # surfaced in the caller
            errors.append(e)

    workers = [threading.Thread(target=wrap, args=(w,)) for w in range(n)]
    with _Interleave():
        for t in workers:
            t.start()
        for t in workers:
            t.join()
    if errors:
        raise errors[0]


def _run_blocked_parallel(plan, program, state, n_workers, checked):
    barrier = threading.Barrier(n_workers)
    scratch = {}

    def body(w):
        try:
            for bidx in range(plan.n_blocks):
                threads = plan.threads(bidx)
                if w == 0:
                    scratch[bidx] = program.new_scratch(plan.cfg, checked)
                barrier.wait()
                sm = scratch[bidx]
                mine = threads[w::n_workers]
                for k, phase in enumerate(program.phases):
                    for th in mine:
                        phase(th, sm, state)
                    barrier.wait()
                    if w == 0 and checked and program.audit is not None:
                        program.audit(plan, bidx, threads, sm, state, k)
                    barrier.wait()
                if w == 0:
                    del scratch[bidx]
        except threading.BrokenBarrierError:
            return
        except BaseException:
            barrier.abort()
            raise

    _run_workers(n_workers, body)


def run_flat(
    total_threads: int,
    phase: Callable[[int, object], None],
    state=None,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "checked",
    log: LaunchLog | None = None,
    name: str = "flat",
    native: Callable | None = None,
) -> None:
    """Execute ``phase(i, state)`` for each global id in ``range(total_threads)``."""
    if total_threads < 0:
        raise ValueError("total_threads must be >= 0")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    order = OrderPolicy.parse(order)
    if log is not None:
        log.record(name, total_threads)
    if mode == "native":
        if native is None:
            raise ValueError(f"launch {name!r} has no native form")
        if order.kind != "sequential":
            raise ValueError("native mode runs the sequential schedule only")
        native(state)
        return
    if order.kind == "sequential":
        for i in range(total_threads):
            phase(i, state)
    elif order.kind == "shuffled":
        ids = list(range(total_threads))
        random.Random(order.seed).shuffle(ids)
        for i in ids:
            phase(i, state)
    else:
        n = order.workers

        def body(w):
            for i in range(w, total_threads, n):
                phase(i, state)

        _run_workers(n, body)
