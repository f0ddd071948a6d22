"""Command-line entry point: ``sparseout {train,sparsity-sweep,verify-theorems,timing-bench}``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import experiments as ex

log = logging.getLogger("sparseout")


def _q_value(text: str) -> float:
    q = float(text)
    if not 0.0 < q <= 4.0:
        raise argparse.ArgumentTypeError(f"q must lie in (0, 4], got {q}")
    if not 1.0 <= q <= 3.0:
        warnings.warn(f"q={q} is outside [1, 3]; large or small powers may overflow", stacklevel=2)
    return q


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _shared(parser: argparse.ArgumentParser, out_default: str | None) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--p", type=float, default=0.5, help="keep probability")
    parser.add_argument("--q", type=_q_value, default=2.0, help="norm exponent, (0, 4]")
    parser.add_argument("--hidden", type=int, default=256)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--lr", type=float, default=0.5)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--data", default="synthetic",
                        help="path to an IDX image file, or 'synthetic'")
    parser.add_argument("--n", type=int, default=2000,
                        help="number of images (synthetic size, or MNIST prefix)")
    parser.add_argument("--dim", type=int, default=784, help="synthetic image dimension")
    parser.add_argument("--output-activation", choices=("sigmoid", "linear"), default="sigmoid")
    parser.add_argument("--out", default=out_default, help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparseout", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one autoencoder")
    _shared(p, None)
    p.add_argument("--regularizer", choices=ex.REGULARIZERS, default="sparseout")

    p = sub.add_parser("sparsity-sweep", help="Hoyer sparsity vs q, plus a Dropout run")
    _shared(p, "sweep.csv")
    p.add_argument("--q-list", type=_float_list, default=[1.5, 2.0, 2.5],
                   help="comma-separated q values; empty runs Dropout only")

    p = sub.add_parser("verify-theorems", help="variance oracle and Dropout equivalence checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=100_000)

    p = sub.add_parser("timing-bench", help="median seconds per epoch per regularizer")
    p.add_argument("--hidden-sizes", type=_int_list, default=[1024, 2048])
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--dim", type=int, default=784)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--q", type=_q_value, default=1.5)
    p.add_argument("--out", default="timing.csv")
    return parser


def _run_config(args, regularizer: str) -> ex.RunConfig:
    return ex.RunConfig(regularizer=regularizer, p=args.p, q=args.q, hidden_size=args.hidden,
                        epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch,
                        seed=args.seed, output=args.output_activation, output_path=args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "verify-theorems":
        results = ex.verify_theorems(args.seed, n_draws=args.draws)
        for r in results:
            print(r.line())
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} checks passed")
        return 1 if failed else 0

    if args.command == "timing-bench":
        rows = ex.timing_bench(args.hidden_sizes, args.batch, args.repeats, n=args.n, d=args.dim,
                               seed=args.seed, p=args.p, q=args.q)
        ex.write_csv(args.out, ("hidden_size", "regularizer", "median_seconds"), rows)
        for h, reg, sec in rows:
            print(f"{h:>6} {reg:<10} {sec:.4f}s")
        return 0

    dataset = ex.load_dataset(args.data, n=args.n, d=args.dim, seed=args.seed)
    if args.command == "train":
        records = ex.train_run(_run_config(args, args.regularizer), dataset)
    else:
        records = ex.sparsity_sweep(_run_config(args, "dropout"), args.q_list, dataset)
    if args.out:
        ex.write_records(args.out, records)
    for label, h in ex.final_hoyer(records).items():
        print(f"{label:<16} final hoyer {h:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
