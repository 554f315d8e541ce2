"""Grid results rendered as CSV files and aligned text tables."""
import csv
import io
import json
from pathlib import Path

from . import reference
from .evaluation import aligned_table
from .numerics import RNG_ALGORITHM


def _pct(x):
    return "undef" if x is None else f"{100 * x:.2f}"


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _preamble(grid):
    return [f"# settings: {json.dumps(grid.settings.describe(), sort_keys=True)}",
            f"# rng: {RNG_ALGORITHM}",
            f"# leakage: {grid.settings.leakage}"]


def _seed_cols(grid):
    seeds = list(grid.settings.seeds)
    cols = [f"seed {s}" for s in seeds]
    if len(seeds) > 1:
        cols.append("median")
    return cols


def _seed_values(grid, cell, metric="mean_cv_score"):
    vals = []
    for r in grid.for_cell(cell):
        if r.report is None:
            vals.append("FAILED")
        else:
            vals.append(_pct(getattr(r.report, metric)))
    if len(grid.settings.seeds) > 1:
        s = grid.summary(cell, metric)
        vals.append("undef" if s is None else _pct(s[0]))
    return vals


def best_cell(grid, table):
    """Cell of ``table`` with the highest median mean CV score (first wins ties)."""
    best, best_val = None, None
    for cell in grid.cells():
        if cell.table != table:
            continue
        s = grid.summary(cell)
        if s is not None and (best_val is None or s[0] > best_val):
            best, best_val = cell, s[0]
    return best


def best_for_seed(grid, table, seed):
    vals = [r.report.mean_cv_score for r in grid.results
            if r.cell.table == table and r.seed == seed and r.report is not None]
    return max(vals) if vals else None


def ordering_by_seed(grid):
    """Per seed: does Care2Vec-best >= ANN-best >= decision tree hold (multi-class)?"""
    out = {}
    for seed in grid.settings.seeds:
        c2v, ann, dt = best_for_seed(grid, 2, seed), best_for_seed(grid, 1, seed), best_for_seed(grid, 3, seed)
        out[seed] = None if None in (c2v, ann, dt) else (c2v >= ann >= dt, (c2v, ann, dt))
    return out


def table1(grid):
    cells = [c for c in grid.cells() if c.table == 1]
    header = ["Hidden nodes"] + _seed_cols(grid) + ["published"]
    rows = [[c.nodes] + _seed_values(grid, c) + [f"{reference.TABLE1[c.nodes][0]:.2f}"] for c in cells]
    return header, rows


def table2(grid):
    cells = [c for c in grid.cells() if c.table == 2]
    header = ["Encoding dim", "DNN nodes", "DNN layers"] + _seed_cols(grid) + ["published"]
    rows = [[c.encoding_dim, c.nodes, c.layers] + _seed_values(grid, c)
            + [f"{reference.TABLE2[(c.encoding_dim, c.nodes, c.layers)][0]:.2f}"] for c in cells]
    return header, rows


def table3(grid):
    header = ["Method", "configuration"] + _seed_cols(grid) + ["published"]
    rows = []
    dt = [c for c in grid.cells() if c.table == 3]
    picks = [("Decision tree", dt[0] if dt else None), ("ANN", best_cell(grid, 1)), ("Care2Vec", best_cell(grid, 2))]
    for name, cell in picks:
        pub = f"{reference.TABLE3[name][0]:.2f}"
        if cell is None:
            rows.append([name, "not run"] + ["-"] * len(_seed_cols(grid)) + [pub])
        else:
            rows.append([name, cell.label()] + _seed_values(grid, cell) + [pub])
    return header, rows


def _table4_key(cell):
    return (cell.method, cell.encoding_dim if cell.method == "care2vec" else cell.nodes)


def table4(grid):
    cells = [c for c in grid.cells() if c.table == 4]
    k = grid.settings.k
    header = ["Method", "hyper-parameters", "seed"] + [f"Fold {i + 1}" for i in range(k)] + ["Mean AUC", "Mean CV"]
    rows = []
    for c in cells:
        for r in grid.for_cell(c):
            if r.report is None:
                rows.append([c.method, c.label(), r.seed] + ["FAILED"] * (k + 2))
                continue
            rep = r.report
            rows.append([c.method, c.label(), r.seed] + [_pct(a) for a in rep.fold_aucs]
                        + [_pct(rep.mean_auc), _pct(rep.mean_cv_score)])
        pub = reference.TABLE4[_table4_key(c)]
        rows.append([c.method, c.label(), "published"] + [f"{a:.2f}" for a in pub[0]]
                    + [f"{pub[1]:.2f}", f"{pub[2]:.2f}"])
    return header, rows


def comparison(grid):
    """Published value, obtained median and delta (points) for every reproduced number."""
    header = ["table", "cell", "metric", "published", "source", "obtained_median", "delta"]
    rows = []

    def add(table, label, metric, pub, source, summary):
        got = None if summary is None else 100 * summary[0]
        rows.append([table, label, metric, f"{pub:.2f}", source,
                     "undef" if got is None else f"{got:.2f}",
                     "undef" if got is None else f"{got - pub:+.2f}"])

    for c in grid.cells():
        if c.table == 1:
            pub, src = reference.TABLE1[c.nodes]
            add(1, c.label(), "mean_cv", pub, src, grid.summary(c))
        elif c.table == 2:
            pub, src = reference.TABLE2[(c.encoding_dim, c.nodes, c.layers)]
            add(2, c.label(), "mean_cv", pub, src, grid.summary(c))
    for name, cell in [("Decision tree", next((c for c in grid.cells() if c.table == 3), None)),
                       ("ANN", best_cell(grid, 1)), ("Care2Vec", best_cell(grid, 2))]:
        pub, src = reference.TABLE3[name]
        add(3, name if cell is None else f"{name}: {cell.label()}", "mean_cv", pub, src,
            None if cell is None else grid.summary(cell))
    for c in grid.cells():
        if c.table == 4:
            folds, mauc, mcv = reference.TABLE4[_table4_key(c)]
            src = f"Table 4, {c.label()}"
            add(4, c.label(), "mean_auc", mauc, src, grid.summary(c, "mean_auc"))
            add(4, c.label(), "mean_cv", mcv, src, grid.summary(c))
    return header, rows


TABLES = {1: table1, 2: table2, 3: table3, 4: table4}


def write_grid(grid, out_dir):
    """Write table{n}.csv/.txt for every table run, plus comparison, grid and ordering files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pre = _preamble(grid)
    written = []
    tables = set(grid.settings.tables)
    for n, fn in TABLES.items():
        if n not in tables:
            continue
        header, rows = fn(grid)
        written += _write_pair(out / f"table{n}", pre, header, rows)
    header, rows = comparison(grid)
    written += _write_pair(out / "comparison", pre, header, rows)

    grid_rows = []
    for r in grid.results:
        rep = r.report
        grid_rows.append([r.cell.table, r.cell.label(), r.cell.task.value, r.seed,
                          "" if rep is None else f"{rep.mean_cv_score:.6f}",
                          "" if rep is None or rep.mean_auc is None else f"{rep.mean_auc:.6f}",
                          r.error or ""])
    path = out / "grid.csv"
    path.write_text("\n".join(pre) + "\n" + _csv(grid_rows, ["table", "cell", "task", "seed", "mean_cv",
                                                              "mean_auc", "error"]), encoding="utf-8")
    written.append(path)

    if {1, 2, 3} <= tables:
        lines = pre + ["", "seed  care2vec_best  ann_best  tree  holds"]
        for seed, res in ordering_by_seed(grid).items():
            if res is None:
                lines.append(f"{seed}  incomplete")
            else:
                ok, (a, b, c) = res
                lines.append(f"{seed}  {100 * a:.2f}  {100 * b:.2f}  {100 * c:.2f}  {'yes' if ok else 'NO'}")
        path = out / "ordering.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written


def _write_pair(stem, pre, header, rows):
    csv_path = stem.with_suffix(".csv")
    txt_path = stem.with_suffix(".txt")
    csv_path.write_text("\n".join(pre) + "\n" + _csv(rows, header), encoding="utf-8")
    txt_path.write_text("\n".join(pre) + "\n\n" + "\n".join(aligned_table(header, rows)) + "\n", encoding="utf-8")
    return [csv_path, txt_path]
