"""Timing harness: repeated runs per (algorithm, image, size) with min/max/mean,
Table-style markdown / CSV reports and speedup ratios against the optimized UF."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass

from .baselines import ALGORITHMS, DEFAULT_CONFIGS, flood_fill_oracle, label
from .engine import SEQUENTIAL, BlockConfig, OrderPolicy
from .grid import PATTERNS, Image, binarize, generate, load_pgm, named_image, upscale_nearest
from .verify import VerificationError, check_against

log = logging.getLogger(__name__)

DISPLAY = {
    "label_le": "LE",
    "conventional_uf": "UF",
    "line_uf": "Line UF",
    "optimized_uf": "optimized",
}
CSV_FIELDS = ("algo", "image", "width", "height", "runs", "min_ms", "max_ms", "mean_ms")
TIMING_NOTE = (
    "Wall-clock time of the labeling call only (no file I/O, no verification); "
    "the untimed verification run doubles as warm-up."
)


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    image_name: str
    size: tuple[int, int]
    runs: int
    min_ms: float
    max_ms: float
    mean_ms: float

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.min_ms <= self.mean_ms <= self.max_ms:
            raise ValueError("expected min <= mean <= max")

    @classmethod
    def from_times(cls, algo, image_name, size, times_ms) -> "BenchRecord":
        t = [float(v) for v in times_ms]
        # clamp guards against the mean drifting outside [min, max] by rounding
        mean = min(max(sum(t) / len(t), min(t)), max(t))
        return cls(algo, image_name, tuple(size), len(t), min(t), max(t), mean)


def parse_size(text) -> tuple[int, int]:
    if isinstance(text, tuple):
        return text
    if isinstance(text, int):
        return text, text
    s = str(text).lower()
    if "x" in s:
        w, h = s.split("x")
        return int(w), int(h)
    return int(s), int(s)


def load_bench_image(name: str, size, threshold: int | None = 128, seed: int = 0) -> Image:
    """Benchmark input at ``size``.

    Synthetic pattern names are generated directly at the target size (noise at
    density 0.5). ``lena`` / ``peppers`` and ``*.pgm`` paths are thresholded and
    then upscaled by nearest-neighbour replication.
    """
    w, h = parse_size(size)
    if name in PATTERNS:
        return generate(name, w, h, density=0.5, stripe_period=8, fill_value=0, seed=seed)
    base = load_pgm(name) if name.endswith(".pgm") else named_image(name)
    if threshold is not None:
        base = binarize(base, threshold)
    if (base.width, base.height) != (w, h):
        base = upscale_nearest(base, w, h)
    return base


def bench(
    algos,
    images,
    sizes,
    runs: int = 100,
    cfg: BlockConfig | None = None,
    order: OrderPolicy | str = SEQUENTIAL,
    mode: str = "native",
    threshold: int | None = 128,
    failures: list | None = None,
) -> list[BenchRecord]:
    """Time each algorithm ``runs`` times on every image at every size.

    Each combination is first checked cell-for-cell against the flood-fill
    oracle; a mismatch skips that combination (diagnostic appended to
    ``failures`` and logged) so no unverified timing is ever reported.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    for a in algos:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    records = []
    for name in images:
        for size in sizes:
            img = load_bench_image(name, size, threshold)
            oracle = flood_fill_oracle(img)
            for algo in algos:
                algo_cfg = cfg if cfg is not None and algo != "line_uf" else DEFAULT_CONFIGS[algo]

                def run():
                    return label(algo, img, algo_cfg, order=order, mode=mode)

                try:
                    check_against(oracle, run(), img.width, f"{algo} on {name} {img.width}x{img.height}")
                except VerificationError as e:
                    log.error("%s", e)
                    if failures is not None:
                        failures.append(str(e))
                    continue
                times = []
                for _ in range(runs):
                    t0 = time.perf_counter()
                    run()
                    times.append((time.perf_counter() - t0) * 1e3)
                rec = BenchRecord.from_times(algo, name, (img.width, img.height), times)
                log.info("%s %s %dx%d mean %.3f ms", algo, name, img.width, img.height, rec.mean_ms)
                records.append(rec)
    return records


# ---- reports --------------------------------------------------------------


def _groups(records):
    groups = {}
    for r in records:
        groups.setdefault((r.image_name, r.size), {})[r.algo] = r
    return groups


def _algo_order(records):
    seen = []
    for a in ("label_le", "conventional_uf", "line_uf", "optimized_uf"):
        if any(r.algo == a for r in records):
            seen.append(a)
    for r in records:
        if r.algo not in seen:
            seen.append(r.algo)
    return seen


def markdown_table(records) -> str:
    algos = _algo_order(records)
    head = "| Image | | " + " | ".join(DISPLAY.get(a, a) for a in algos) + " |"
    lines = [head, "|" + "---|" * (len(algos) + 2)]
    for (name, (w, h)), by_algo in _groups(records).items():
        for k, stat in enumerate(("min", "max", "mean")):
            cells = []
            for a in algos:
                r = by_algo.get(a)
                cells.append(f"{getattr(r, stat + '_ms'):.2f}" if r else "-")
            title = f"{name} ({w}x{h})" if k == 0 else ""
            lines.append(f"| {title} | {stat} | " + " | ".join(cells) + " |")
    return "\n".join(lines)


def speedups(records, reference: str = "optimized_uf") -> dict:
    """``{(image, size): {algo: mean(algo) / mean(reference)}}``."""
    out = {}
    for key, by_algo in _groups(records).items():
        ref = by_algo.get(reference)
        if ref is None or ref.mean_ms <= 0:
            continue
        out[key] = {
            a: r.mean_ms / ref.mean_ms for a, r in by_algo.items() if a != reference
        }
    return out


def speedup_table(records) -> str:
    ratios = speedups(records)
    algos = [a for a in ("label_le", "conventional_uf", "line_uf") if any(a in v for v in ratios.values())]
    if not ratios or not algos:
        return ""
    lines = [
        "| Image | " + " | ".join(f"{DISPLAY[a]} / optimized" for a in algos) + " |",
        "|" + "---|" * (len(algos) + 1),
    ]
    for (name, (w, h)), row in ratios.items():
        cells = [f"{row[a]:.2f}x" if a in row else "-" for a in algos]
        lines.append(f"| {name} ({w}x{h}) | " + " | ".join(cells) + " |")
    return "\n".join(lines)


def to_csv(records) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_FIELDS)
    for r in records:
        wr.writerow(
            [r.algo, r.image_name, r.size[0], r.size[1], r.runs, repr(r.min_ms), repr(r.max_ms), repr(r.mean_ms)]
        )
    return buf.getvalue()


def parse_csv(text: str) -> list[BenchRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if tuple(rows.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    return [
        BenchRecord(
            r["algo"],
            r["image"],
            (int(r["width"]), int(r["height"])),
            int(r["runs"]),
            float(r["min_ms"]),
            float(r["max_ms"]),
            float(r["mean_ms"]),
        )
        for r in rows
    ]


def report(records, fmt: str = "md") -> str:
    """Execution-time table plus speedups of LE / UF / Line UF relative to optimized."""
    if not records:
        raise ValueError("no records to report")
    if fmt == "csv":
        return to_csv(records)
    if fmt != "md":
        raise ValueError(f"unknown report format {fmt!r}")
    parts = ["Execution time in milliseconds.", "", TIMING_NOTE, "", markdown_table(records)]
    sp = speedup_table(records)
    if sp:
        parts += ["", "Speedup of optimized UF (mean time ratio):", "", sp]
    return "\n".join(parts) + "\n"
