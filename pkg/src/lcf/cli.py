"""``lcf`` command-line interface."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .corpus import dataset_stats, load_interactions
from .correlate import DEFAULT_THETA1, build_correlation_index, global_ctr, item_item_topk
from .errors import ItemLookupError, LCFError
from .evaluation import DEFAULT_P_GRID, sweep_personalization
from .predict import DEFAULT_THETA2, MODES, CtpScorer, PredictionConfig, recommend_topk, recommendations_csv
from .stability import PAPER_SIZES, StabilityConfig, simulate_ctr_mae

log = logging.getLogger("lcf")

DEFAULT_SEED = 42
PAPER_TARGETS = ("The Elder Scrolls V Skyrim", "Dota 2", "Counter-Strike Global Offensive")


class UsageError(Exception):
    pass


def write_atomic(path, text: str):
    """Write `text` to `path` via a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text):
    if getattr(args, "output", None):
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _load(args):
    return load_interactions(args.input, behavior=args.behavior, dedup=not args.no_dedup)


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(args):
    ds = _load(args)
    _emit(args, ds.to_json())


def cmd_stats(args):
    stats = dataset_stats(_load(args))
    if args.format == "json":
        _emit(args, json.dumps(stats.as_dict(), sort_keys=True) + "\n")
    else:
        _emit(args, stats.summary() + "\n")


def _lookup(ds, title):
    try:
        return ds.find_item(title)
    except ItemLookupError as e:
        raise UsageError(str(e)) from None


def cmd_item_item(args):
    ds = _load(args)
    sources = [_lookup(ds, t) for t in args.item] if args.item else None
    index = build_correlation_index(ds, theta1=args.theta1, sources=sources, workers=args.workers)
    if args.top is not None:
        index = index.head(args.top)
    _emit(args, index.to_json() if args.format == "json" else index.to_csv())


def cmd_recommend(args):
    ds = _load(args)
    cfg = PredictionConfig(p=args.p, theta2=args.theta2, mode=args.mode)
    if args.user:
        try:
            users = [ds.user_index[u] for u in args.user]
        except KeyError as e:
            raise UsageError(f"unknown user {e.args[0]!r}") from None
    else:
        users = range(ds.n_users)
    scorer = CtpScorer(ds)
    recs = {u: recommend_topk(ds, None, u, cfg, args.top, scorer=scorer) for u in users}
    if args.format == "json":
        doc = [{"user": ds.users[u], "rank": rank, "item": ds.items[j], "raw_score": pr.raw_score,
                "clamped_score": pr.clamped_score, "n_effective": pr.n_effective, "fallback": pr.fallback}
               for u, ranked in recs.items() for rank, (j, pr) in enumerate(ranked, 1)]
        _emit(args, json.dumps(doc, ensure_ascii=False, indent=1) + "\n")
    else:
        _emit(args, recommendations_csv(ds, recs))


def cmd_evaluate(args):
    ds = _load(args)
    report = sweep_personalization(ds, k=args.folds, K=args.top, p_grid=args.p_grid,
                                   theta2=args.theta2, mode=args.mode, seed=args.seed)
    _emit(args, report.to_csv())
    if args.summary:
        write_atomic(args.summary, report.summary_csv())


def cmd_stability(args):
    cfg = StabilityConfig(true_ctr=args.ctr, sample_sizes=tuple(args.sizes), trials=args.trials, seed=args.seed)
    report = simulate_ctr_mae(cfg)
    if args.format == "json":
        rows = [{"sample_size": r.sample_size, "simulated_mae": r.simulated_mae,
                 "exact_mae": r.exact_mae, "trials": r.trials} for r in report.rows]
        _emit(args, json.dumps(rows, indent=1) + "\n")
    else:
        _emit(args, report.to_csv())


def cmd_reproduce(args):
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load(args)
    stats = dataset_stats(ds)
    write_atomic(out / "table1_stats.txt", stats.summary() + "\n")

    targets = [_lookup(ds, t) for t in (args.target or PAPER_TARGETS)]
    index = build_correlation_index(ds, theta1=args.theta1, sources=targets)
    ctr_lines = ["item,global_ctr\n"] + [f'"{ds.items[t]}",{global_ctr(ds, None, t):.6f}\n' for t in targets]
    write_atomic(out / "target_ctr.csv", "".join(ctr_lines))
    write_atomic(out / "table2_item_item.csv", index.head(10).to_csv())

    stab = simulate_ctr_mae(StabilityConfig(0.5, PAPER_SIZES, args.trials, args.seed))
    write_atomic(out / "figure1_stability.csv", stab.to_csv())

    report = sweep_personalization(ds, k=5, K=10, p_grid=args.p_grid, theta2=args.theta2,
                                   mode=args.mode, seed=args.seed)
    write_atomic(out / "figure2_hr_folds.csv", report.to_csv())
    write_atomic(out / "figure2_hr_summary.csv", report.summary_csv())
    sys.stdout.write(stats.summary() + "\n")
    for t in targets:
        top = ", ".join(f"{ds.items[j]} ({100 * r:.2f})" for j, r in item_item_topk(index, t, 3))
        sys.stdout.write(f"{ds.items[t]}: {top}\n")
    sys.stdout.write(f"best p = {report.best_p():g}\n")


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcf", description="Local collaborative filtering toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def data_cmd(name, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--input", required=True, help="interaction CSV or JSON snapshot")
        p.add_argument("--behavior", default="purchase", help="behavior tag counted as positive feedback")
        p.add_argument("--no-dedup", action="store_true", help="treat repeated rows as an error")
        return p

    def output_opts(p, formats=True):
        p.add_argument("--output", "-o", help="output path (default: stdout)")
        if formats:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    def model_opts(p):
        p.add_argument("--theta2", type=_nonneg_int, default=DEFAULT_THETA2)
        p.add_argument("--mode", choices=MODES, default="lenient")

    p = data_cmd("ingest", "Ingest an interaction log into a canonical JSON snapshot.")
    output_opts(p, formats=False)
    p.set_defaults(func=cmd_ingest)

    p = data_cmd("stats", "Print dataset statistics.")
    output_opts(p)
    p.set_defaults(func=cmd_stats)

    p = data_cmd("item-item", "Item-item correlation lists.")
    p.add_argument("--item", action="append", help="source item title (repeatable; default: all items)")
    p.add_argument("--top", type=_nonneg_int, help="keep the first N targets per source")
    p.add_argument("--theta1", type=_nonneg_int, default=DEFAULT_THETA1)
    p.add_argument("--workers", type=_pos_int, default=1)
    output_opts(p)
    p.set_defaults(func=cmd_item_item)

    p = data_cmd("recommend", "Top-K user-item recommendations.")
    p.add_argument("--user", action="append", help="user key (repeatable; default: all users)")
    p.add_argument("--p", type=_nonneg_float, default=1.5, help="personalization coefficient")
    p.add_argument("--top", type=_nonneg_int, default=10)
    model_opts(p)
    output_opts(p)
    p.set_defaults(func=cmd_recommend)

    p = data_cmd("evaluate", "Cross-validated HR@K over a grid of p values.")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--top", type=_pos_int, default=10, help="recommendation list length K")
    p.add_argument("--p-grid", type=_float_list, default=list(DEFAULT_P_GRID))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--summary", help="also write the per-p summary CSV here")
    model_opts(p)
    output_opts(p, formats=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stability", help="Monte-Carlo MAE of a sample CTR versus sample size.")
    p.add_argument("--sizes", type=_int_list, default=list(PAPER_SIZES))
    p.add_argument("--trials", type=_pos_int, default=300_000)
    p.add_argument("--ctr", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    output_opts(p)
    p.set_defaults(func=cmd_stability)

    p = data_cmd("reproduce-paper", "Regenerate every table and plot-data file into a directory.")
    p.add_argument("--outdir", required=True)
    p.add_argument("--target", action="append", help="item-item source title (repeatable; default: the three reference games)")
    p.add_argument("--theta1", type=_nonneg_int, default=DEFAULT_THETA1)
    p.add_argument("--trials", type=_pos_int, default=300_000)
    p.add_argument("--p-grid", type=_float_list, default=[0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    model_opts(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"lcf {args.command}: error: {e}", file=sys.stderr)
        return 2
    except LCFError as e:
        print(f"lcf: error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        parser.print_usage(sys.stderr)
        print(f"lcf {args.command}: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        where = f" {e.filename}:" if e.filename else ""
        print(f"lcf: I/O error:{where} {e.strerror or e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
