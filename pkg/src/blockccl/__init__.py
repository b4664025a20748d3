"""Connected components labeling with block-parallel union-find."""

from .baselines import (
    ALGORITHMS,
    flood_fill_oracle,
    label,
    label_conventional_uf,
    label_le,
    label_line_uf,
)
from .bench import BenchRecord, bench, report
from .dsf import FindStats, ParentArray, find, flatten, union_min
from .engine import BlockConfig, LaunchLog, OrderPolicy, run_blocked, run_flat
from .grid import Image, binarize, generate, read_pgm, write_pgm
from .optimized import boundary_cell_counts, label_optimized
from .verify import Partition, canonicalize, equivalent

__version__ = "0.1.0"
