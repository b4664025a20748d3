"""
Baseline labelers
=================

Label equivalence iterates until nothing changes; the union-find baselines
run once. All of them agree with a plain flood fill.
"""

import time

import numpy as np

from blockccl import generate
from blockccl.baselines import PARALLEL_ALGOS, flood_fill_oracle, label, label_le

img = generate("noise", 512, 512, density=0.5, seed=7)
oracle = flood_fill_oracle(img)
for algo in PARALLEL_ALGOS:
    label(algo, img)  # first call loads the compiled kernels
    t0 = time.perf_counter()
    lab = label(algo, img)
    print(f"{algo:16s} equal to oracle: {np.array_equal(lab, oracle)}  {1e3 * (time.perf_counter() - t0):7.1f} ms")

# LE needs more passes as the region gets longer and thinner.
for n in (17, 33, 65, 129):
    info = {}
    label_le(generate("spiral", n, n), info=info)
    print(f"spiral {n}x{n}: {info['iterations']} LE iterations")
