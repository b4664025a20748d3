"""
Emulating GPU thread blocks
===========================

A program is a list of phases; every thread of a block finishes a phase
before any thread starts the next one. Shared scratch lives per block.
"""

import threading

from blockccl.engine import BlockConfig, LaunchLog, PhaseProgram, ScratchError, run_blocked

out = {}
lock = threading.Lock()


def write(th, sm, st):
    sm.buf[th.tid] = th.cell


def reverse(th, sm, st):
    # reads the slot written by another thread in the previous phase
    n = len(sm.buf)
    mirror = n - 1 - th.tid
    if sm.buf.written(mirror):
        with lock:
            out[th.cell] = sm.buf[mirror]


prog = PhaseProgram("mirror", [write, reverse], {"buf": None})
log = LaunchLog()
for order in ("sequential", "shuffled:3", "parallel:4"):
    out.clear()
    run_blocked(8, 4, BlockConfig(4, 2), prog, None, order=order, log=log)
    print(order, [out[c] for c in range(8)])

print("threads launched per run:", log.threads("mirror") // 3)


# Checked mode catches reads a GPU would silently get wrong.
def sloppy(th, sm, st):
    sm.buf[th.tid] = 1
    sm.buf[th.tid - 1]


try:
    run_blocked(4, 4, BlockConfig(4, 4), PhaseProgram("bad", [sloppy], {"buf": None}), None, mode="checked")
except ScratchError as e:
    print("caught:", e)
