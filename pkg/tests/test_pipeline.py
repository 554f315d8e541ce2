from dataclasses import replace

import numpy as np
import pytest

import care2vec.pipeline as pl
from care2vec.autoencoder import build_autoencoder, encode
from care2vec.dataset import Scheme, fit_apply_age_scaling, to_binary
from care2vec.evaluation import kfold_split
from care2vec.neural import Activation, Optimizer, TrainConfig, forward
from care2vec.pipeline import (
    LEAKAGE_ALL_ROWS,
    LEAKAGE_PER_FOLD,
    AnnRecipe,
    Care2VecConfig,
    Care2VecRecipe,
    GridCell,
    GridSettings,
    TreeRecipe,
    classifier_spec,
    clear_encoder_cache,
    fit_care2vec,
    grid_cells,
    repo_architectures,
    run_cell,
    run_experiment_grid,
)


def _cfg(quick_ae, quick_clf, **kw):
    kw.setdefault("encoding_dim", 8)
    kw.setdefault("dnn_hidden_nodes", 40)
    kw.setdefault("dnn_hidden_layers", 1)
    return Care2VecConfig(ae_train=quick_ae, dnn_train=quick_clf, **kw)


def _scaled(ds):
    state, tr, _ = fit_apply_age_scaling(ds)
    return state, tr


class TestSpecs:
    def test_deep_classifier(self):
        spec = classifier_spec(32, 300, 2, Scheme.MULTICLASS7)
        assert spec.dims() == [(32, 300), (300, 300), (300, 7)]
        assert spec.layers[-1].activation is Activation.SOFTMAX

    def test_shallow_classifier(self):
        assert classifier_spec(8, 40, 1, "multi").dims() == [(8, 40), (40, 7)]

    def test_binary_head(self):
        spec = classifier_spec(16, 100, 1, Scheme.BINARY)
        assert spec.out_dim == 1 and spec.layers[-1].activation is Activation.SIGMOID

    def test_off_grid_needs_extended(self):
        with pytest.raises(ValueError):
            Care2VecConfig(encoding_dim=12)
        with pytest.warns(UserWarning):
            build_autoencoder(12)
        with pytest.warns(UserWarning):
            assert Care2VecConfig(encoding_dim=12, dnn_hidden_nodes=7, extended=True).encoding_dim == 12

    def test_architecture_list(self):
        names = [n for n, _, _ in repo_architectures()]
        assert len(names) == len(set(names)) == 62


class TestCare2Vec:
    def test_deterministic(self, scadi_like, quick_ae, quick_clf):
        state, tr = _scaled(scadi_like)
        cfg = _cfg(quick_ae, quick_clf, seed=5)
        clear_encoder_cache()
        a = fit_care2vec(cfg, tr, state)
        clear_encoder_cache()
        b = fit_care2vec(cfg, tr, state)
        assert a.encoder.params.equals(b.encoder.params)
        assert a.classifier_params.equals(b.classifier_params)

    def test_cache_does_not_change_results(self, scadi_like, quick_ae, quick_clf):
        state, tr = _scaled(scadi_like)
        cfg = _cfg(quick_ae, quick_clf, seed=6)
        clear_encoder_cache()
        cold = fit_care2vec(cfg, tr, state)
        warm = fit_care2vec(cfg, tr, state)
        assert cold.encoder.params.equals(warm.encoder.params)
        np.testing.assert_array_equal(cold.output(tr.features), warm.output(tr.features))

    def test_predict_composes_stages(self, scadi_like, quick_ae, quick_clf):
        state, tr = _scaled(scadi_like)
        pipe = fit_care2vec(_cfg(quick_ae, quick_clf), tr, state)
        x = tr.features[:9]
        manual = forward(pipe.classifier_spec, pipe.classifier_params, encode(pipe.encoder, x)).output
        np.testing.assert_array_equal(pipe.predict(x), manual.argmax(axis=1))
        assert pipe.embed(x).shape == (9, 8)
        with pytest.raises(ValueError):
            pipe.score(x)

    def test_binary_scores(self, scadi_like, quick_ae, quick_clf):
        state, tr = _scaled(to_binary(scadi_like))
        pipe = fit_care2vec(_cfg(quick_ae, quick_clf, task=Scheme.BINARY), tr, state)
        s = pipe.score(tr.features)
        assert s.shape == (70,) and np.all((s >= 0) & (s <= 1))
        np.testing.assert_array_equal(pipe.predict(tr.features), (s >= 0.5).astype(int))

    def test_task_must_match_scheme(self, scadi_like, quick_ae, quick_clf):
        with pytest.raises(ValueError):
            fit_care2vec(_cfg(quick_ae, quick_clf, task=Scheme.BINARY), scadi_like)


class TestLeakage:
    def _recorded_rows(self, monkeypatch, recipe, train, test):
        seen = []
        real = pl._cached_encoder

        def spy(spec, x, config):
            seen.append(np.array(x))
            return real(spec, x, config)

        monkeypatch.setattr(pl, "_cached_encoder", spy)
        recipe.fit_predict(train, test, seed=1)
        return seen[0]

    def test_per_fold_autoencoder_sees_only_training_rows(self, monkeypatch, scadi_like, quick_ae, quick_clf):
        folds = kfold_split(70, 10, 0)
        train, test = scadi_like.subset(folds.train_rows(0)), scadi_like.subset(folds.test_rows(0))
        rows = self._recorded_rows(monkeypatch, Care2VecRecipe(_cfg(quick_ae, quick_clf)), train, test)
        assert rows.shape[0] == 63
        _, train_s, _ = fit_apply_age_scaling(train, [test])
        np.testing.assert_array_equal(rows, train_s.features)

    def test_all_rows_mode_adds_held_out_features(self, monkeypatch, scadi_like, quick_ae, quick_clf):
        folds = kfold_split(70, 10, 0)
        train, test = scadi_like.subset(folds.train_rows(0)), scadi_like.subset(folds.test_rows(0))
        recipe = Care2VecRecipe(_cfg(quick_ae, quick_clf), LEAKAGE_ALL_ROWS)
        assert recipe.describe()["leakage"] == LEAKAGE_ALL_ROWS
        assert self._recorded_rows(monkeypatch, recipe, train, test).shape[0] == 70

    def test_held_out_features_do_not_move_predictions_of_other_rows(self, scadi_like, quick_ae, quick_clf):
        folds = kfold_split(70, 10, 0)
        train, test = scadi_like.subset(folds.train_rows(0)), scadi_like.subset(folds.test_rows(0))
        x = test.features.copy()
        x[1:, 2:] = 1 - x[1:, 2:]  # flip every activity of all but the first test row
        recipe = Care2VecRecipe(_cfg(quick_ae, quick_clf))
        a = recipe.fit_predict(train, test, 4)
        b = recipe.fit_predict(train, test.with_features(x), 4)
        assert a.labels[0] == b.labels[0]


class TestBaselines:
    def test_ann_recipe(self, scadi_like, quick_clf):
        folds = kfold_split(70, 5, 1)
        out = AnnRecipe(40, 1, Scheme.MULTICLASS7, quick_clf).fit_predict(
            scadi_like.subset(folds.train_rows(0)), scadi_like.subset(folds.test_rows(0)), 3)
        assert out.labels.shape == (14,) and out.scores is None

    def test_tree_recipe_binary_scores(self, scadi_like):
        b = to_binary(scadi_like)
        out = TreeRecipe().fit_predict(b.subset(range(60)), b.subset(range(60, 70)), 0)
        assert set(np.unique(out.labels)) <= {0, 1}
        assert np.all((out.scores >= 0) & (out.scores <= 1))


class TestGrid:
    def test_cell_counts(self):
        assert len(grid_cells((1,))) == 5
        assert len(grid_cells((2,))) == 16
        assert len(grid_cells((3,))) == 1
        t4 = grid_cells((4,))
        assert [c.method for c in t4].count("tree") == 1
        assert [c.method for c in t4].count("ann") == 3
        assert [c.method for c in t4].count("care2vec") == 4
        assert all(c.task is Scheme.BINARY for c in t4)
        assert len({c.key for c in grid_cells()}) == 30

    def test_grid_runs_and_is_complete(self, scadi_like, quick_ae, quick_clf):
        cells = [GridCell(3, "tree", Scheme.MULTICLASS7),
                 GridCell(1, "ann", Scheme.MULTICLASS7, nodes=30, layers=1),
                 GridCell(4, "tree", Scheme.BINARY)]
        settings = GridSettings(k=5, seeds=(1, 2), ae_train=quick_ae, classifier_train=quick_clf)
        grid = run_experiment_grid(scadi_like, settings, cells)
        assert len(grid.results) == 6 and grid.n_failed == 0
        assert [c.key for c in grid.cells()] == [c.key for c in cells]
        med, lo, hi, n = grid.summary(cells[0])
        assert n == 2 and lo <= med <= hi
        assert grid.summary(cells[2], "mean_auc") is not None
        # cells under one seed share folds
        by_seed = [r for r in grid.results if r.seed == 1]
        assert by_seed[0].report.config["fold_seed"] == by_seed[1].report.config["fold_seed"] == 1

    def test_parallel_matches_serial(self, scadi_like, quick_ae, quick_clf):
        cells = [GridCell(3, "tree", Scheme.MULTICLASS7), GridCell(1, "ann", Scheme.MULTICLASS7, nodes=30, layers=1),
                 GridCell(2, "care2vec", Scheme.MULTICLASS7, 4, 40, 1),
                 GridCell(2, "care2vec", Scheme.MULTICLASS7, 4, 100, 1)]
        s1 = GridSettings(k=3, seeds=(3, 4), ae_train=quick_ae, classifier_train=quick_clf)
        a = run_experiment_grid(scadi_like, s1, cells)
        b = run_experiment_grid(scadi_like, replace(s1, jobs=2), cells)
        assert [r.report.fold_accuracies for r in a.results] == [r.report.fold_accuracies for r in b.results]

    def test_failure_is_recorded_not_raised(self, scadi_like):
        exploding = TrainConfig(optimizer=Optimizer.SGD, learning_rate=1e300, epochs=3)
        settings = GridSettings(k=5, seeds=(0,), classifier_train=exploding)
        grid = run_experiment_grid(scadi_like, settings, [GridCell(1, "ann", Scheme.MULTICLASS7, nodes=30, layers=1),
                                                          GridCell(3, "tree", Scheme.MULTICLASS7)])
        assert grid.n_failed == 1
        assert grid.results[0].report is None and "FoldError" in grid.results[0].error
        assert grid.results[1].report is not None
        assert grid.summary(grid.results[0].cell) is None

    def test_run_cell_binary_conversion(self, scadi_like):
        r = run_cell(GridCell(4, "tree", Scheme.BINARY), scadi_like, GridSettings(k=5), seed=0)
        assert r.report.binary and len(r.report.fold_aucs) == 5
        assert r.report.config["table"] == 4
