"""Command-line entry point: ``care2vec {validate,run,reproduce,gradcheck}``.

The data path defaults to ``$SCADI_CSV`` and the output directory to
``$CARE2VEC_OUTPUT_DIR`` (then ``./results``).
"""
import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .autoencoder import AE_TRAIN_DEFAULTS
from .dataset import ANY_ROWS, ScadiSchema, Scheme, load_scadi, to_binary
from .errors import Care2VecError
from .evaluation import cross_validate, kfold_split
from .neural import gradient_check
from .pipeline import (
    CLASSIFIER_TRAIN_DEFAULTS,
    LEAKAGE_ALL_ROWS,
    LEAKAGE_PER_FOLD,
    AnnRecipe,
    Care2VecConfig,
    Care2VecRecipe,
    GridSettings,
    TreeRecipe,
    repo_architectures,
    run_experiment_grid,
)
from .reporting import write_grid
from .tree import Criterion

TASKS = {"multi": Scheme.MULTICLASS7, "binary": Scheme.BINARY}


def _seed_list(text):
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _default_out():
    return os.environ.get("CARE2VEC_OUTPUT_DIR", "results")


def _add_data(p):
    p.add_argument("--data", default=os.environ.get("SCADI_CSV"),
                   help="SCADI CSV file (default: $SCADI_CSV)")
    p.add_argument("--any-rows", action="store_true",
                   help="accept any number of data rows (fixtures, partial exports)")


def _add_training(p):
    p.add_argument("--epochs", type=int, default=CLASSIFIER_TRAIN_DEFAULTS.epochs, help="classifier epochs")
    p.add_argument("--ae-epochs", type=int, default=AE_TRAIN_DEFAULTS.epochs, help="autoencoder epochs")
    p.add_argument("--lr", type=float, default=CLASSIFIER_TRAIN_DEFAULTS.learning_rate)
    p.add_argument("--batch-size", type=int, default=CLASSIFIER_TRAIN_DEFAULTS.batch_size)
    p.add_argument("--leakage", choices=(LEAKAGE_PER_FOLD, LEAKAGE_ALL_ROWS), default=LEAKAGE_PER_FOLD,
                   help="fit the autoencoder per training fold (default) or on all rows")


def build_parser():
    parser = argparse.ArgumentParser(prog="care2vec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a SCADI file and print its class histogram")
    p.add_argument("path", nargs="?", help="SCADI CSV (or use --data)")
    _add_data(p)

    p = sub.add_parser("run", help="cross-validate one method configuration")
    _add_data(p)
    p.add_argument("--method", choices=("tree", "ann", "care2vec"), required=True)
    p.add_argument("--task", choices=tuple(TASKS), default="multi")
    p.add_argument("--dim", type=int, default=32, help="encoding dimension (care2vec)")
    p.add_argument("--nodes", type=int, default=None, help="hidden nodes per layer")
    p.add_argument("--layers", type=int, default=1, help="hidden layers")
    p.add_argument("--criterion", choices=[c.value for c in Criterion], default="gini")
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extended", action="store_true", help="allow settings outside the published grid")
    p.add_argument("--out", default=None, help="output directory (default: $CARE2VEC_OUTPUT_DIR or ./results)")
    p.add_argument("--formats", default="csv,txt", help="comma list from csv,txt,roc")
    _add_training(p)

    p = sub.add_parser("reproduce", help="run the Table 1-4 grids and write comparison tables")
    _add_data(p)
    p.add_argument("--seeds", type=_seed_list, default=(0,), help="comma-separated seeds, e.g. 1,2,3,4,5")
    p.add_argument("--tables", type=_seed_list, default=(1, 2, 3, 4), help="subset of tables, e.g. 1,3")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1, help="grid cells run in parallel (default 1)")
    p.add_argument("--out", default=None)
    _add_training(p)

    p = sub.add_parser("gradcheck", help="finite-difference check of every network architecture in use")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--max-entries", type=int, default=25, help="entries checked per weight/bias array (0 = all)")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _load(args, path=None):
    path = path or args.data
    if not path:
        raise Care2VecError("no data file given (pass --data or set SCADI_CSV)")
    return load_scadi(path, ANY_ROWS if args.any_rows else ScadiSchema())


def cmd_validate(args):
    d = _load(args, args.path)
    hist = "/".join(str(c) for c in d.class_counts())
    print(f"{d.n_rows} rows, {d.n_features} features, classes: {hist}")
    return 0


def _train_configs(args):
    ae = replace(AE_TRAIN_DEFAULTS, epochs=args.ae_epochs, learning_rate=args.lr, batch_size=args.batch_size)
    clf = replace(CLASSIFIER_TRAIN_DEFAULTS, epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch_size)
    return ae, clf


def _run_name(args, task):
    parts = ["run", args.method, task]
    if args.method == "care2vec":
        parts += [f"d{args.dim}", f"n{args.nodes}", f"l{args.layers}"]
    elif args.method == "ann":
        parts += [f"n{args.nodes}", f"l{args.layers}"]
    else:
        parts += [args.criterion] + ([f"depth{args.max_depth}"] if args.max_depth is not None else [])
    parts.append(f"seed{args.seed}")
    return "_".join(parts)


def cmd_run(args):
    task = TASKS[args.task]
    formats = {f.strip() for f in args.formats.split(",") if f.strip()}
    unknown = formats - {"csv", "txt", "roc"}
    if unknown:
        raise Care2VecError(f"unknown output format(s): {', '.join(sorted(unknown))}")
    ae_cfg, clf_cfg = _train_configs(args)
    if args.method == "tree":
        recipe = TreeRecipe(Criterion(args.criterion), args.max_depth)
    elif args.method == "ann":
        args.nodes = 40 if args.nodes is None else args.nodes
        recipe = AnnRecipe(args.nodes, args.layers, task, clf_cfg)
    else:
        args.nodes = 300 if args.nodes is None else args.nodes
        cfg = Care2VecConfig(args.dim, args.nodes, args.layers, task, ae_cfg, clf_cfg, extended=args.extended)
        recipe = Care2VecRecipe(cfg, args.leakage)

    data = _load(args)
    if task is Scheme.BINARY:
        data = to_binary(data)
    report = cross_validate(recipe, data, kfold_split(data.n_rows, args.k, args.seed))
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    stem = out / _run_name(args, args.task)
    if "csv" in formats:
        stem.with_suffix(".csv").write_text(report.to_csv(), encoding="utf-8")
    if "txt" in formats:
        stem.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
    if "roc" in formats and report.binary:
        Path(f"{stem}_roc.csv").write_text(report.roc_csv(), encoding="utf-8")
    print(f"mean CV score: {100 * report.mean_cv_score:.2f}%")
    if report.binary:
        auc = "undefined" if report.mean_auc is None else f"{100 * report.mean_auc:.2f}%"
        print(f"mean AUC: {auc}")
        for note in report.notes:
            print(f"note: {note}")
    print(f"wrote {stem}.*")
    return 0


def cmd_reproduce(args):
    ae_cfg, clf_cfg = _train_configs(args)
    settings = GridSettings(k=args.k, seeds=args.seeds, tables=args.tables, leakage=args.leakage,
                            ae_train=ae_cfg, classifier_train=clf_cfg, jobs=args.jobs)
    grid = run_experiment_grid(_load(args), settings)
    files = write_grid(grid, args.out or _default_out())
    for r in grid.results:
        if r.error:
            print(f"cell failed: {r.cell.label()} seed {r.seed}: {r.error}", file=sys.stderr)
    print(f"{len(grid.results) - grid.n_failed}/{len(grid.results)} cells completed; wrote {len(files)} files")
    return 1 if grid.results and grid.n_failed == len(grid.results) else 0


def cmd_gradcheck(args):
    failed = 0
    max_entries = None if args.max_entries == 0 else args.max_entries
    for name, spec, loss in repo_architectures():
        rep = gradient_check(spec, loss, args.samples, args.tolerance, seed=args.seed, max_entries=max_entries)
        failed += not rep.passed
        status = "ok  " if rep.passed else "FAIL"
        print(f"{status} {name:32s} {loss.value:25s} max rel err {rep.max_rel_error:.2e} ({rep.n_checked} entries, "
              f"{rep.kink_retries} kink retries)")
    return 1 if failed else 0


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "reproduce": cmd_reproduce, "gradcheck": cmd_gradcheck}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (Care2VecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
