"""Command line: ``blockccl {label,gen,verify,bench}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import bench as run_bench, parse_size, report
from .baselines import ALGO_IDS, PARALLEL_ALGOS, flood_fill_oracle, label
from .engine import BlockConfig, OrderPolicy
from .grid import PATTERNS, binarize, generate, load_pgm, save_pgm
from .verify import LABEL_FORMATS, encode_labels, first_difference

log = logging.getLogger("blockccl")


def _block(text):
    try:
        return BlockConfig.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _order(text):
    try:
        return OrderPolicy.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _size(text):
    try:
        w, h = parse_size(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"invalid size {text!r}")
    return w, h


def _algos(text):
    names = [a.strip() for a in text.split(",") if a.strip()]
    if names == ["all"]:
        return list(PARALLEL_ALGOS)
    bad = [a for a in names if a not in ALGO_IDS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s): {', '.join(bad)}")
    return names


def _mode(args):
    if getattr(args, "checked", False):
        return "checked"
    return args.mode


def _read_input(args):
    img = load_pgm(args.input)
    if args.binarize is not None:
        img = binarize(img, args.binarize)
    return img


def cmd_label(args):
    img = _read_input(args)
    labels = label(args.algo, img, args.block, order=args.order, mode=_mode(args))
    data = encode_labels(labels, img.width, img.height, args.out_format)
    with open(args.out_labels, "wb") as f:
        f.write(data)
    return 0


def cmd_gen(args):
    w, h = args.size
    img = generate(
        args.pattern,
        w,
        h,
        density=args.density,
        stripe_period=args.stripe_period,
        fill_value=args.fill_value,
        seed=args.seed,
    )
    save_pgm(img, args.out)
    return 0


def cmd_verify(args):
    img = _read_input(args)
    oracle = flood_fill_oracle(img)
    status = 0
    for algo in args.algos:
        labels = label(algo, img, args.block if algo != "line_uf" else None, order=args.order, mode=_mode(args))
        diff = first_difference(oracle, labels, img.width)
        if diff is None and (labels == oracle).all():
            print(f"{algo}: ok")
        else:
            status = 1
            if diff is None:
                print(f"{algo}: same partition but labels are not the minimum cell index")
            else:
                x, y, a, b = diff
                print(f"{algo}: MISMATCH at (x={x}, y={y}): oracle {a}, got {b}")
    return status


def cmd_bench(args):
    failures = []
    records = run_bench(
        args.algos,
        args.images,
        args.sizes,
        runs=args.runs,
        cfg=args.block,
        order=args.order,
        mode=_mode(args),
        threshold=args.binarize,
        failures=failures,
    )
    if records:
        sys.stdout.write(report(records, args.format))
    for f in failures:
        print(f"verification failed: {f}", file=sys.stderr)
    return 1 if failures or not records else 0


def build_parser():
    p = argparse.ArgumentParser(prog="blockccl", description="Block-parallel connected components labeling")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def engine_opts(sp, block_default):
        sp.add_argument("--block", type=_block, default=block_default, help="block dims WxH")
        sp.add_argument("--order", type=_order, default=OrderPolicy(), help="sequential | shuffled:SEED | parallel:WORKERS")
        sp.add_argument("--mode", choices=("native", "fast", "checked"), default="native")
        sp.add_argument("--checked", action="store_true", help="shorthand for --mode checked")

    sp = sub.add_parser("label", help="label one PGM image")
    sp.add_argument("--input", required=True)
    sp.add_argument("--binarize", type=int, metavar="T")
    sp.add_argument("--algo", choices=ALGO_IDS, default="optimized_uf")
    engine_opts(sp, None)
    sp.add_argument("--out-labels", required=True)
    sp.add_argument("--out-format", choices=LABEL_FORMATS, default="raw-u32le")
    sp.set_defaults(func=cmd_label)

    sp = sub.add_parser("gen", help="write a synthetic PGM")
    sp.add_argument("--pattern", choices=PATTERNS, required=True)
    sp.add_argument("--size", type=_size, required=True)
    sp.add_argument("--density", type=float, default=0.5)
    sp.add_argument("--stripe-period", type=int, default=1)
    sp.add_argument("--fill-value", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("verify", help="compare algorithms against the flood-fill oracle")
    sp.add_argument("--input", required=True)
    sp.add_argument("--binarize", type=int, metavar="T")
    sp.add_argument("--algos", type=_algos, default=list(PARALLEL_ALGOS))
    engine_opts(sp, None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="time algorithms and print a report")
    sp.add_argument("--images", type=lambda s: s.split(","), default=["noise", "lena"])
    sp.add_argument("--sizes", type=lambda s: [_size(v) for v in s.split(",")], default=[(512, 512)])
    sp.add_argument("--runs", type=int, default=100)
    sp.add_argument("--algos", type=_algos, default=list(PARALLEL_ALGOS))
    sp.add_argument("--format", choices=("md", "csv"), default="md")
    sp.add_argument("--binarize", type=int, default=128, metavar="T")
    engine_opts(sp, None)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "runs", 1) < 1:
        parser.error("--runs must be >= 1")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as e:
        print(f"blockccl: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
