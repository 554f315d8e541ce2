import csv
import io

import pytest

from care2vec.cli import main
from care2vec.dataset import bundled_fixture

QUICK = ["--epochs", "2", "--ae-epochs", "2", "--k", "3"]


def _body(path):
    return list(csv.reader(io.StringIO("".join(l for l in path.read_text().splitlines(True) if not l.startswith("#")))))


class TestValidate:
    def test_fixture_histogram(self, capsys):
        assert main(["validate", str(bundled_fixture()), "--any-rows"]) == 0
        assert "6 rows, 205 features, classes: 1/1/0/1/0/1/2" in capsys.readouterr().out

    def test_fixture_fails_full_row_count(self, capsys):
        assert main(["validate", str(bundled_fixture())]) == 2
        assert "70" in capsys.readouterr().err

    def test_full_layout(self, capsys, scadi_like_csv):
        assert main(["validate", str(scadi_like_csv)]) == 0
        assert "classes: 2/7/1/12/3/29/16" in capsys.readouterr().out

    def test_truncated_file(self, tmp_path, scadi_like_csv, capsys):
        lines = scadi_like_csv.read_text().splitlines(True)
        bad = tmp_path / "cut.csv"
        bad.write_text("".join(lines[:-1]) + lines[-1][: len(lines[-1]) // 2])
        assert main(["validate", str(bad)]) != 0
        assert "row 71" in capsys.readouterr().err

    def test_missing_path(self, tmp_path, monkeypatch):
        monkeypatch.delenv("SCADI_CSV", raising=False)
        assert main(["validate"]) == 2
        assert main(["validate", str(tmp_path / "none.csv")]) == 2


class TestRun:
    def test_care2vec_run_echoes_config(self, tmp_path, scadi_like_csv, capsys):
        args = ["run", "--data", str(scadi_like_csv), "--method", "care2vec", "--dim", "8", "--nodes", "40",
                "--seed", "7", "--out", str(tmp_path), *QUICK]
        assert main(args) == 0
        out = tmp_path / "run_care2vec_multi_d8_n40_l1_seed7.csv"
        head = out.read_text().splitlines()
        assert '"encoding_dim": 8' in head[0] and '"fold_seed": 7' in head[0]
        assert head[1] == "# rng: numpy.PCG64/SeedSequence"
        assert head[2] == "# leakage: per_fold"
        rows = _body(out)
        assert rows[0] == ["fold", "n_test", "accuracy", "auc"] and len(rows) == 5
        assert "mean CV score" in capsys.readouterr().out
        assert (tmp_path / "run_care2vec_multi_d8_n40_l1_seed7.txt").exists()

    def test_binary_run_has_auc(self, tmp_path, scadi_like_csv):
        args = ["run", "--data", str(scadi_like_csv), "--method", "ann", "--nodes", "40", "--task", "binary",
                "--out", str(tmp_path), "--formats", "csv,roc", *QUICK]
        assert main(args) == 0
        rows = _body(tmp_path / "run_ann_binary_n40_l1_seed0.csv")
        assert all(r[3] != "" for r in rows[1:])
        roc = (tmp_path / "run_ann_binary_n40_l1_seed0_roc.csv").read_text().splitlines()
        assert roc[0] == "fold,fpr,tpr" and len(roc) > 4

    def test_reruns_are_byte_identical(self, tmp_path, scadi_like_csv):
        for sub in ("a", "b"):
            assert main(["run", "--data", str(scadi_like_csv), "--method", "tree", "--seed", "3",
                         "--out", str(tmp_path / sub)]) == 0
        name = "run_tree_multi_gini_seed3.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_off_grid_requires_extended(self, tmp_path, scadi_like_csv, capsys):
        base = ["run", "--data", str(scadi_like_csv), "--method", "care2vec", "--dim", "12", "--nodes", "40",
                "--out", str(tmp_path), *QUICK]
        assert main(base) == 2
        assert "extended" in capsys.readouterr().err
        with pytest.warns(UserWarning):
            assert main(base + ["--extended"]) == 0

    def test_unknown_format(self, tmp_path, scadi_like_csv):
        assert main(["run", "--data", str(scadi_like_csv), "--method", "tree", "--formats", "xml",
                     "--out", str(tmp_path)]) == 2


class TestReproduce:
    def test_tree_table_with_seed_median(self, tmp_path, scadi_like_csv, capsys):
        assert main(["reproduce", "--data", str(scadi_like_csv), "--tables", "3", "--seeds", "1,2,3",
                     "--k", "5", "--out", str(tmp_path)]) == 0
        t3 = _body(tmp_path / "table3.csv")
        assert t3[0] == ["Method", "configuration", "seed 1", "seed 2", "seed 3", "median", "published"]
        assert t3[3][-1] == "84.29"
        comp = _body(tmp_path / "comparison.csv")
        assert comp[0][:4] == ["table", "cell", "metric", "published"]
        assert any(r[3] == "76.99" and r[5] != "undef" for r in comp[1:])
        assert "3/3 cells completed" in capsys.readouterr().out

    def test_single_seed_has_no_median(self, tmp_path, scadi_like_csv):
        assert main(["reproduce", "--data", str(scadi_like_csv), "--tables", "3", "--k", "5",
                     "--out", str(tmp_path)]) == 0
        assert "median" not in _body(tmp_path / "table3.csv")[0]

    def test_bad_seed_list(self):
        with pytest.raises(SystemExit):
            main(["reproduce", "--seeds", "1,x"])


def test_gradcheck(capsys):
    assert main(["gradcheck", "--max-entries", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 62 and all(l.startswith("ok") for l in lines)
