import json

import numpy as np
import pandas as pd
import pytest

import oracles
from chaintrend import gbdt
from chaintrend.dataset import FeatureMatrix
from chaintrend.gbdt import BoostConfig, BoostedEnsemble


def _labels_from_x0(x0, lo=-0.8, hi=0.8):
    y = np.zeros(x0.size, dtype=np.int64)
    y[np.asarray(x0) < lo] = -1
    y[np.asarray(x0) > hi] = 1
    return y


def _matrix(x, y, names):
    dates = pd.date_range("2021-01-01", periods=len(y))
    frame = pd.DataFrame(dict(zip(names, x.T)),
                         index=pd.Index(dates, name="date"))
    frame["label"] = y
    return FeatureMatrix(frame=frame)


def _leaf(value, cover=1):
    return {"value": value, "cover": cover}


def _split(feature, threshold, left, right, gain=1.0, cover=2):
    return {"feature": feature, "threshold": threshold, "gain": gain,
            "cover": cover, "left": left, "right": right}


def _hand_model(trees, names, cfg=None):
    return BoostedEnsemble(cfg or BoostConfig(), names, trees)


class TestBoostConfig:
    def test_defaults_are_valid(self):
        cfg = BoostConfig()
        assert cfg.n_estimators == 100 and cfg.subsample == 1.0

    @pytest.mark.parametrize("kw", [
        {"n_estimators": 0},
        {"max_depth": 0},
        {"colsample_bytree": 0.0},
        {"colsample_bytree": 1.2},
        {"subsample": 0.0},
        {"subsample": 1.5},
        {"learning_rate": -0.1},
        {"gamma": -1.0},
        {"min_child_weight": -0.5},
    ])
    def test_invalid_values_raise(self, kw):
        with pytest.raises(ValueError):
            BoostConfig(**kw)

    def test_zero_learning_rate_is_a_legal_degenerate_baseline(self):
        BoostConfig(learning_rate=0.0)

    def test_as_dict_field_order(self):
        keys = list(BoostConfig().as_dict())
        assert keys == ["n_estimators", "max_depth", "colsample_bytree",
                        "min_child_weight", "learning_rate", "gamma",
                        "subsample", "seed"]


class TestFit:
    def test_separable_toy_reaches_high_training_accuracy(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(150, 2)) * 2
        y = _labels_from_x0(x[:, 0], -1, 1)
        cfg = BoostConfig(n_estimators=50, max_depth=2, learning_rate=0.3,
                          seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        assert (model.predict(x) == y).mean() >= 0.99

    def test_tree_count_is_rounds_times_classes(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(60, 3))
        y = _labels_from_x0(x[:, 0])
        model = gbdt.fit_arrays(x, y, BoostConfig(n_estimators=7, seed=0))
        assert len(model.trees) == 7 * 3

    def test_infinite_gamma_prunes_everything_to_class_priors(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(300, 4))
        y = _labels_from_x0(x[:, 0])
        priors = np.array([(y == c).mean() for c in (-1, 0, 1)])
        cfg = BoostConfig(n_estimators=80, max_depth=3, learning_rate=0.5,
                          gamma=float("inf"), seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        assert all("feature" not in t["root"] for t in model.trees)
        p = model.predict_proba(x)
        assert np.abs(p - priors).max() < 1e-9

    def test_huge_min_child_weight_blocks_all_splits(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(100, 3))
        y = _labels_from_x0(x[:, 0])
        cfg = BoostConfig(n_estimators=2, max_depth=3, min_child_weight=1e9,
                          seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        assert all("feature" not in t["root"] for t in model.trees)

    def test_single_class_labels_are_rejected(self):
        x = np.random.default_rng(0).normal(size=(30, 2))
        with pytest.raises(ValueError, match="single-class"):
            gbdt.fit_arrays(x, np.zeros(30, dtype=np.int64), BoostConfig())

    def test_labels_outside_the_ternary_set_are_rejected(self):
        x = np.random.default_rng(0).normal(size=(30, 2))
        y = np.array([2] * 15 + [0] * 15)
        with pytest.raises(ValueError, match="labels"):
            gbdt.fit_arrays(x, y, BoostConfig())

    def test_misaligned_x_y_raise(self):
        with pytest.raises(ValueError, match="align"):
            gbdt.fit_arrays(np.zeros((10, 2)), np.zeros(9), BoostConfig())

    def test_root_cover_counts_the_training_rows(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(80, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        model = gbdt.fit_arrays(x, y, BoostConfig(n_estimators=1, seed=0))
        for t in model.trees:
            assert t["root"]["cover"] == 80

    def test_accepts_feature_matrix_directly(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(90, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        m = _matrix(x, y, ["np_a", "ta_b", "sm_c"])
        model = gbdt.fit(m, BoostConfig(n_estimators=5, seed=0))
        assert model.feature_names == ["np_a", "ta_b", "sm_c"]
        labels, proba = gbdt.predict(model, m)
        assert labels.shape == (90,) and proba.shape == (90, 3)


class TestSplitOracle:
    def test_depth_one_matches_exhaustive_enumeration(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(20, 201))
            f = int(rng.integers(2, 6))
            x = rng.normal(size=(n, f))
            y = rng.choice([-1, 0, 1], size=n)
            while np.unique(y).size < 2:
                y = rng.choice([-1, 0, 1], size=n)
            cfg = BoostConfig(n_estimators=1, max_depth=1, learning_rate=0.5,
                              seed=0)
            root = gbdt.fit_arrays(x, y, cfg).trees[0]["root"]
            best = oracles.depth1_split_oracle(x, y)
            if best is None:
                assert "feature" not in root, f"seed {seed}"
            else:
                assert root["feature"] == best[1], f"seed {seed}"
                assert root["threshold"] == best[2], f"seed {seed}"

    def test_split_honors_gamma_and_child_weight_like_the_oracle(self):
        rng = np.random.default_rng(123)
        x = rng.normal(size=(60, 3))
        y = rng.choice([-1, 0, 1], size=60)
        for gamma, mcw in [(0.5, 1.0), (0.0, 5.0), (2.0, 3.0)]:
            cfg = BoostConfig(n_estimators=1, max_depth=1, gamma=gamma,
                              min_child_weight=mcw, seed=0)
            root = gbdt.fit_arrays(x, y, cfg).trees[0]["root"]
            best = oracles.depth1_split_oracle(x, y, gamma=gamma, mcw=mcw)
            if best is None:
                assert "feature" not in root
            else:
                assert (root["feature"], root["threshold"]) == best[1:]


class TestTrainingLoss:
    def test_log_loss_is_monotone_without_subsampling(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(200, 5))
        y = _labels_from_x0(x[:, 0] + 0.3 * x[:, 1])
        cfg = BoostConfig(n_estimators=30, max_depth=3, learning_rate=0.3,
                          seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        losses = oracles.replay_round_losses(model, x, y)
        assert len(losses) == 30
        assert np.diff(losses).max() < 1e-12
        assert gbdt.log_loss(model, x, y) == pytest.approx(losses[-1])


class TestDeterminism:
    def test_identical_inputs_give_bit_identical_models(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(250, 6))
        y = _labels_from_x0(x[:, 0])
        cfg = BoostConfig(n_estimators=12, max_depth=3, learning_rate=0.2,
                          subsample=0.7, colsample_bytree=0.6, seed=9)
        j1 = gbdt.fit_arrays(x, y, cfg).to_json()
        j2 = gbdt.fit_arrays(x, y, cfg).to_json()
        assert j1 == j2

    def test_json_roundtrip_preserves_everything(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(120, 4))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        cfg = BoostConfig(n_estimators=8, max_depth=2, subsample=0.8, seed=3)
        model = gbdt.fit_arrays(x, y, cfg)
        clone = BoostedEnsemble.from_json(model.to_json())
        assert clone.to_json() == model.to_json()
        assert clone.config == model.config
        assert np.array_equal(clone.predict_proba(x), model.predict_proba(x))

    def test_seed_changes_the_model_when_sampling_is_active(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(150, 5))
        y = _labels_from_x0(x[:, 0])
        base = dict(n_estimators=6, max_depth=3, subsample=0.6,
                    colsample_bytree=0.6)
        j1 = gbdt.fit_arrays(x, y, BoostConfig(seed=1, **base)).to_json()
        j2 = gbdt.fit_arrays(x, y, BoostConfig(seed=2, **base)).to_json()
        assert j1 != j2

    def test_model_json_is_self_describing(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(50, 2))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        doc = json.loads(
            gbdt.fit_arrays(x, y, BoostConfig(n_estimators=2, seed=0),
                            ["alpha", "beta"]).to_json())
        assert doc["kind"] == "boosted-trees"
        assert doc["classes"] == [-1, 0, 1]
        assert doc["feature_names"] == ["alpha", "beta"]
        assert doc["config"]["seed"] == 0
        assert len(doc["trees"]) == 6


class TestPredict:
    def test_empty_ensemble_is_uniform(self):
        model = _hand_model([], ["a", "b"])
        p = model.predict_proba(np.zeros((4, 2)))
        assert np.all(p == pytest.approx(1.0 / 3.0, abs=0))

    def test_probabilities_form_a_simplex(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(200, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        model = gbdt.fit_arrays(x, y, BoostConfig(n_estimators=20, seed=0))
        p = model.predict_proba(rng.normal(size=(500, 3)))
        assert np.all(p >= 0)
        assert np.abs(p.sum(axis=1) - 1.0).max() <= 1e-9

    def test_margins_match_a_hand_traced_walk(self):
        trees = [
            {"round": 0, "class_index": 0,
             "root": _split(0, 2.5, _leaf(0.3), _leaf(-0.1))},
            {"round": 0, "class_index": 1, "root": _leaf(0.2)},
            {"round": 0, "class_index": 2,
             "root": _split(1, 0.0, _leaf(-0.4), _leaf(0.05))},
        ]
        model = _hand_model(trees, ["f0", "f1"])
        rows = np.array([[1.0, 1.0], [3.0, -1.0], [2.5, 0.0],
                         [0.0, -2.0], [10.0, 5.0]])
        want = np.array([
            [0.3, 0.2, 0.05],
            [-0.1, 0.2, -0.4],
            [-0.1, 0.2, 0.05],   # boundary values go right
            [0.3, 0.2, -0.4],
            [-0.1, 0.2, 0.05],
        ])
        assert np.array_equal(model.margins(rows), want)
        assert np.abs(model.predict_proba(rows).sum(axis=1) - 1).max() <= 1e-9

    def test_unknown_feature_column_is_a_schema_error(self):
        model = _hand_model([], ["a", "b"])
        frame = pd.DataFrame({"a": [1.0], "b": [2.0], "c": [3.0]})
        with pytest.raises(ValueError, match="schema"):
            model.predict_proba(frame)

    def test_missing_feature_column_is_a_schema_error(self):
        model = _hand_model([], ["a", "b"])
        with pytest.raises(ValueError, match="schema"):
            model.predict_proba(pd.DataFrame({"a": [1.0]}))

    def test_wrong_array_width_is_rejected(self):
        model = _hand_model([], ["a", "b"])
        with pytest.raises(ValueError, match="width"):
            model.predict_proba(np.zeros((3, 5)))

    def test_column_order_is_normalized_for_frames(self):
        rng = np.random.default_rng(14)
        x = rng.normal(size=(80, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        model = gbdt.fit_arrays(x, y, BoostConfig(n_estimators=5, seed=0),
                                ["a", "b", "c"])
        frame = pd.DataFrame(x, columns=["a", "b", "c"])
        shuffled = frame[["c", "a", "b"]]
        assert np.array_equal(model.predict_proba(frame),
                              model.predict_proba(shuffled))


class TestImportances:
    def test_cover_sums_observation_counts_across_trees(self):
        # one split each in two trees, covering 8 and 4 observations
        trees = [
            {"round": 0, "class_index": 0,
             "root": _split(0, 1.0, _leaf(0.1, 5), _leaf(-0.1, 3), cover=8)},
            {"round": 0, "class_index": 1,
             "root": _split(0, 2.0, _leaf(0.2, 1), _leaf(-0.2, 3), cover=4)},
            {"round": 0, "class_index": 2, "root": _leaf(0.0, 8)},
        ]
        model = _hand_model(trees, ["feature1", "other"])
        cover = gbdt.importances(model, "cover")
        assert cover["feature1"] == 12.0
        assert cover["other"] == 0.0

    def test_weight_counts_splits_across_trees(self):
        # feature1 splits 3 times in the first tree and twice in the second
        t1 = _split(0, 1.0,
                    _split(0, 0.5, _leaf(0.1), _leaf(0.2), cover=5),
                    _split(0, 2.0, _leaf(-0.1), _leaf(-0.2), cover=3),
                    cover=8)
        t2 = _split(0, 1.5,
                    _leaf(0.3),
                    _split(0, 3.0, _leaf(0.0), _leaf(-0.3), cover=2),
                    cover=4)
        trees = [
            {"round": 0, "class_index": 0, "root": t1},
            {"round": 0, "class_index": 1, "root": t2},
            {"round": 0, "class_index": 2, "root": _leaf(0.0)},
        ]
        model = _hand_model(trees, ["feature1", "other"])
        assert gbdt.importances(model, "weight")["feature1"] == 5.0
        assert gbdt.importances(model, "weight")["other"] == 0.0

    def test_gain_totals_and_normalized_averages(self):
        t1 = _split(0, 1.0, _leaf(0.1), _leaf(0.2), gain=2.0, cover=10)
        t2 = _split(0, 2.0, _leaf(0.1), _leaf(0.2), gain=1.0, cover=6)
        trees = [
            {"round": 0, "class_index": 0, "root": t1},
            {"round": 0, "class_index": 1, "root": t2},
            {"round": 0, "class_index": 2, "root": _leaf(0.0)},
        ]
        model = _hand_model(trees, ["u", "v"])
        assert gbdt.importances(model, "gain") == {"u": 3.0, "v": 0.0}
        assert gbdt.importances(model, "gain", normalize=True) == {
            "u": 1.5, "v": 0.0}
        assert gbdt.importances(model, "cover", normalize=True) == {
            "u": 8.0, "v": 0.0}
        weights = gbdt.importances(model, "weight", normalize=True)
        assert weights == {"u": 1.0, "v": 0.0}

    def test_invalid_metric_is_rejected(self):
        with pytest.raises(ValueError, match="metric"):
            gbdt.importances(_hand_model([], ["a"]), "magic")

    def test_gain_scores_are_nonnegative_and_sum_to_total(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=(200, 4))
        y = _labels_from_x0(x[:, 0] - 0.4 * x[:, 2])
        cfg = BoostConfig(n_estimators=10, max_depth=3, learning_rate=0.3,
                          seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        gains = gbdt.importances(model, "gain")
        assert all(v >= 0 for v in gains.values())
        walked = sum(node["gain"] for t in model.trees
                     for node in gbdt._walk_splits(t["root"]))
        assert sum(gains.values()) == pytest.approx(walked, rel=1e-12)

    def test_pure_noise_features_are_never_split_in_most_seeds(self):
        zero = 0
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            x = rng.normal(size=(300, 4))
            y = _labels_from_x0(x[:, 0])
            cfg = BoostConfig(n_estimators=5, max_depth=2, learning_rate=0.3,
                              gamma=0.5, min_child_weight=10, seed=seed)
            w = gbdt.importances(gbdt.fit_arrays(x, y, cfg), "weight")
            assert w["f0"] > 0     # the planted signal is always used
            if w["f1"] == 0 and w["f2"] == 0 and w["f3"] == 0:
                zero += 1
        assert zero >= 95

    def test_every_split_satisfies_gamma_and_child_weight(self):
        rng = np.random.default_rng(33)
        x = rng.normal(size=(250, 5))
        y = _labels_from_x0(x[:, 0] + 0.5 * x[:, 1])
        cfg = BoostConfig(n_estimators=8, max_depth=4, gamma=0.3,
                          min_child_weight=2.0, seed=0)
        model = gbdt.fit_arrays(x, y, cfg)
        n_splits = 0
        for t in model.trees:
            for node in gbdt._walk_splits(t["root"]):
                n_splits += 1
                assert node["gain"] > cfg.gamma
        assert n_splits > 0


class TestPermutationImportance:
    def _informative_model(self, n=600, seed=13):
        rng = np.random.default_rng(seed)
        x0 = rng.normal(size=n)
        # balanced ternary labels driven by the single feature
        lo, hi = np.quantile(x0, [1 / 3, 2 / 3])
        y = np.zeros(n, dtype=np.int64)
        y[x0 < lo] = -1
        y[x0 >= hi] = 1
        x = np.column_stack([x0, np.full(n, 3.25)])
        cfg = BoostConfig(n_estimators=30, max_depth=2, learning_rate=0.3,
                          seed=0)
        model = gbdt.fit_arrays(x, y, cfg, ["signal", "constant"])
        return model, x, y

    def test_constant_column_drop_is_exactly_zero(self):
        model, x, y = self._informative_model()
        drops = gbdt.permutation_importance(model, (x, y), "accuracy",
                                            n_repeats=3, seed=0)
        assert drops["constant"] == 0.0

    def test_informative_feature_drop_approaches_accuracy_minus_chance(self):
        model, x, y = self._informative_model()
        acc = (model.predict(x) == y).mean()
        assert acc > 0.95
        drops = gbdt.permutation_importance(model, (x, y), "accuracy",
                                            n_repeats=20, seed=1)
        assert drops["signal"] == pytest.approx(acc - 1.0 / 3.0, abs=0.05)

    def test_drops_are_bit_for_bit_reproducible(self):
        model, x, y = self._informative_model()
        a = gbdt.permutation_importance(model, (x, y), "accuracy", 5, seed=7)
        b = gbdt.permutation_importance(model, (x, y), "accuracy", 5, seed=7)
        assert a == b

    def test_impurity_metric_flags_the_informative_feature(self):
        model, x, y = self._informative_model()
        drops = gbdt.permutation_importance(model, (x, y), "impurity",
                                            n_repeats=5, seed=3)
        assert drops["constant"] == 0.0
        assert drops["signal"] > 0.05

    def test_unknown_metric_is_rejected(self):
        model, x, y = self._informative_model(n=60)
        with pytest.raises(ValueError, match="metric"):
            gbdt.permutation_importance(model, (x, y), "gini")


class TestGridSearch:
    def _fm(self, n=120, seed=11):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        return _matrix(x, y, ["np_a", "ta_b", "sm_c"])

    def test_grid_of_size_one_returns_that_config(self):
        fm = self._fm()
        res = gbdt.grid_search(fm, {"max_depth": [2]}, seed=4)
        assert res.best == BoostConfig(max_depth=2, seed=4)
        assert len(res.table) == 1
        assert res.table[0]["n_folds_used"] == 4

    def test_dominated_zero_rate_config_never_wins(self):
        fm = self._fm()
        with_dead = gbdt.grid_search(
            fm, {"learning_rate": [0.0, 0.3], "max_depth": [2]}, seed=0)
        without = gbdt.grid_search(
            fm, {"learning_rate": [0.3], "max_depth": [2]}, seed=0)
        assert with_dead.best.learning_rate == 0.3
        assert with_dead.best == without.best
        dead_rows = [r for r in with_dead.table
                     if r["params"]["learning_rate"] == 0.0]
        assert dead_rows[0]["mean_auc"] == 0.5

    def test_single_class_validation_fold_is_skipped_and_noted(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(50, 2))
        y = np.resize(np.array([-1, 0, 1]), 50)
        y[40:] = 1              # final forward fold validates on one class
        x[:, 0] = y + rng.normal(scale=0.2, size=50)
        fm = _matrix(x, y, ["np_a", "ta_b"])
        res = gbdt.grid_search(fm, {"max_depth": [2]}, n_folds=4, seed=0)
        assert res.folds_skipped == 1
        assert res.table[0]["folds_skipped"] == 1
        assert res.table[0]["n_folds_used"] == 3

    def test_empty_grid_is_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            gbdt.grid_search(self._fm(), {})

    def test_unknown_parameter_is_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            gbdt.grid_search(self._fm(), {"depth": [2]})

    def test_forward_folds_keep_training_strictly_before_validation(self):
        folds = list(gbdt.forward_folds(103, 4))
        assert len(folds) == 4
        seen_val = []
        for tr, va in folds:
            assert tr[0] == 0
            assert tr[-1] + 1 == va[0]
            assert va.size > 0
            seen_val.append(va)
        assert folds[-1][1][-1] == 102   # tail block absorbs the remainder
        allv = np.concatenate(seen_val)
        assert np.array_equal(allv, np.unique(allv))

    def test_too_few_rows_for_folds(self):
        with pytest.raises(ValueError, match="folds"):
            list(gbdt.forward_folds(8, 4))

    def test_macro_auc_reference_points(self):
        proba = np.array([
            [0.8, 0.1, 0.1],
            [0.7, 0.2, 0.1],
            [0.1, 0.8, 0.1],
            [0.2, 0.1, 0.7],
        ])
        y = np.array([-1, -1, 0, 1])
        assert gbdt.macro_auc(proba, y) == 1.0
        tied = np.full((4, 3), 1 / 3)
        assert gbdt.macro_auc(tied, y) == 0.5


class TestSelectFeatures:
    def test_k_equal_to_feature_count_is_identity(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(100, 3))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        fm = _matrix(x, y, ["np_a", "ta_b", "sm_c"])
        cfg = BoostConfig(n_estimators=6, seed=2)
        keep, refit = gbdt.select_features(fm, cfg, k=3)
        assert keep == ["np_a", "ta_b", "sm_c"]
        assert refit.to_json() == gbdt.fit(fm, cfg).to_json()

    def test_k_above_feature_count_is_rejected(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(60, 2))
        y = _labels_from_x0(x[:, 0], -0.5, 0.5)
        fm = _matrix(x, y, ["np_a", "ta_b"])
        with pytest.raises(ValueError, match="feature count"):
            gbdt.select_features(fm, BoostConfig(), k=5)

    def test_planted_signals_survive_selection(self):
        names = ([f"np_s{j}" for j in range(3)]
                 + [f"ta_n{j:02d}" for j in range(20)])
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(2000 + seed)
            x = rng.normal(size=(400, 23))
            score = x[:, 0] + 0.8 * x[:, 1] - 0.8 * x[:, 2]
            y = np.zeros(400, dtype=np.int64)
            y[score < -0.9] = -1
            y[score > 0.9] = 1
            fm = _matrix(x, y, names)
            cfg = BoostConfig(n_estimators=15, max_depth=3,
                              learning_rate=0.3, min_child_weight=5,
                              seed=seed)
            keep, refit = gbdt.select_features(fm, cfg, k=3)
            assert refit.feature_names == keep
            if set(keep) == {"np_s0", "np_s1", "np_s2"}:
                hits += 1
        assert hits >= 18

    def test_selection_reports_family_membership(self):
        rng = np.random.default_rng(23)
        x = rng.normal(size=(150, 4))
        y = _labels_from_x0(x[:, 0] + 0.5 * x[:, 2], -0.6, 0.6)
        fm = _matrix(x, y, ["np_a", "np_b", "ta_c", "sm_d"])
        keep, _ = gbdt.select_features(fm, BoostConfig(n_estimators=8,
                                                       seed=1), k=2)
        by_family = {fam: [c for c in keep if c.startswith(f"{fam}_")]
                     for fam in ("np", "ta", "sm")}
        assert sum(len(v) for v in by_family.values()) == len(keep)
