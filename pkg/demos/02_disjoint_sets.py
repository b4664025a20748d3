"""
Min-root union-find
===================

The smaller root always wins, so every class ends up labelled with its
smallest member.
"""

import random
import threading

from blockccl.dsf import FindStats, ParentArray, find, flatten, union_min

p = ParentArray(8)
union_min(p, 5, 3)
union_min(p, 7, 5)
union_min(p, 3, 1)
print(p.data)  # unflattened: chains of pointers

stats = FindStats()
print("root of 7:", find(p, 7, stats), "hops", stats.hops)
flatten(p)
print(p.data)

# Unions from several threads commute: CAS retries keep every merge.
edges = [(random.randrange(500), random.randrange(500)) for _ in range(600)]
shared = ParentArray(500)
workers = [threading.Thread(target=lambda k=k: [union_min(shared, a, b) for a, b in edges[k::4]]) for k in range(4)]
for t in workers:
    t.start()
for t in workers:
    t.join()
flatten(shared)

serial = ParentArray(500)
for a, b in edges:
    union_min(serial, a, b)
flatten(serial)
print("threaded == serial:", shared.data == serial.data)
