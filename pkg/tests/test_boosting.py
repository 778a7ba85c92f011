import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from faultloc.boosting import (BoostConfig, CategoryWeightMode, Ensemble, MulticlassMode,
                               WeakClassifier, apply_category_weights, category_weights,
                               chance_error, classifier_weight, init_weights, load_ensemble,
                               save_ensemble, soft_vote, train_adaboost, train_weak,
                               update_weights, weighted_bootstrap, weighted_error)
from faultloc.neuralkit import TrainConfig


class TableClassifier:
    """Weak learner stub: row ``i`` of ``x`` carries its sample index in column 0."""

    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=float)

    def predict_proba(self, x):
        return self.probs[np.asarray(x)[:, 0].astype(int)]

    def predict(self, x):
        return np.argmax(self.predict_proba(x), axis=1)


def one_hot(labels, k):
    return np.eye(k)[labels]


# --- weight algebra


def test_init_weights():
    np.testing.assert_array_equal(init_weights(4), [0.25] * 4)
    np.testing.assert_array_equal(init_weights(1), [1.0])
    with pytest.raises(ValueError):
        init_weights(0)


@given(st.integers(1, 5000))
def test_init_weights_sum(h):
    assert abs(init_weights(h).sum() - 1) < 1e-9


def test_category_weights_examples():
    np.testing.assert_array_equal(category_weights(np.repeat(np.arange(8), 10), 8), np.ones(8))
    labels = np.array([0] * 80 + [1] * 20)
    w = category_weights(labels, 2)
    np.testing.assert_allclose(w, [0.625, 2.5], rtol=0, atol=1e-12)
    assert np.dot(w, [80, 20]) == pytest.approx(100, abs=1e-12)


def test_category_weights_absent_class():
    with pytest.raises(ValueError):
        category_weights(np.array([0, 0, 2]), 3)


def test_apply_category_weights_examples():
    np.testing.assert_allclose(apply_category_weights([0.5, 0.5], [0, 1], [0.625, 2.5]),
                               [0.2, 0.8], atol=1e-12)
    d = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(apply_category_weights(d, [0, 1, 0, 1], [1.0, 1.0]), d, atol=1e-15)
    with pytest.raises(ValueError):
        apply_category_weights([1.0, 0.0], [0, 1], [0.0, 1.0])


def test_weighted_error_examples():
    y = np.array([0, 1, 2, 3])
    u = init_weights(4)
    assert weighted_error(y, y, u) == 0.0
    assert weighted_error((y + 1) % 4, y, u) == 1.0
    assert weighted_error(np.array([0, 1, 2, 0]), y, u) == 0.25


def test_classifier_weight_examples():
    assert classifier_weight(0.5, 2) == pytest.approx(0.0, abs=1e-12)
    assert classifier_weight(0.1, 2) == pytest.approx(0.5 * np.log(9), abs=1e-12)
    assert classifier_weight(0.1, 2) == pytest.approx(1.09861, abs=1e-5)
    assert classifier_weight(0.5, 8) == pytest.approx(0.5 * np.log(7), abs=1e-12)
    assert classifier_weight(0.5, 8) == pytest.approx(0.97296, abs=1e-5)
    assert classifier_weight(0.1, 8, MulticlassMode.PAPER_BINARY) == pytest.approx(0.5 * np.log(9))


def test_classifier_weight_clamps_endpoints():
    assert np.isfinite(classifier_weight(0.0, 8))
    assert np.isfinite(classifier_weight(1.0, 8))
    assert classifier_weight(0.0, 2) == pytest.approx(0.5 * np.log((1 - 1e-10) / 1e-10))


def test_chance_bar():
    assert chance_error(8) == 7 / 8
    assert chance_error(8, MulticlassMode.PAPER_BINARY) == 0.5


def test_update_weights_examples():
    w, z = update_weights([0.5, 0.5], np.log(2), [0, 0], [0, 1])
    assert z == pytest.approx(1.25, abs=1e-12)
    np.testing.assert_allclose(w, [0.2, 0.8], atol=1e-12)
    w, z = update_weights([0.3, 0.7], 0.0, [1, 0], [0, 0])
    assert z == 1.0
    np.testing.assert_array_equal(w, [0.3, 0.7])
    w, z = update_weights([0.3, 0.7], 0.8, [0, 1], [0, 1])
    assert z == pytest.approx(np.exp(-0.8), abs=1e-12)
    np.testing.assert_allclose(w, [0.3, 0.7], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6), k=st.integers(2, 10), n=st.integers(2, 60),
       mode=st.sampled_from(list(MulticlassMode)))
def test_misclassified_mass_after_update(seed, k, n, mode):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, n)
    preds = np.where(rng.random(n) < 0.6, labels, (labels + 1) % k)
    dist = rng.dirichlet(np.ones(n))
    e = weighted_error(preds, labels, dist)
    if not 1e-6 < e < chance_error(k, mode) - 1e-6:
        return
    new, z = update_weights(dist, classifier_weight(e, k, mode), preds, labels)
    assert abs(new.sum() - 1) < 1e-9 and np.all(new >= 0)
    expected = 0.5 if mode is MulticlassMode.PAPER_BINARY else (k - 1) / k
    assert new[preds != labels].sum() == pytest.approx(expected, abs=1e-9)


def test_alpha_positive_below_chance():
    for k in (2, 3, 8):
        for e in np.linspace(0.01, chance_error(k) - 0.01, 20):
            assert classifier_weight(e, k) > 0


def test_soft_vote_examples():
    np.testing.assert_allclose(soft_vote([0.6, 0.4], [0.2, 0.8]), [0.4, 0.6], atol=1e-15)
    p = np.array([0.1, 0.7, 0.2])
    np.testing.assert_array_equal(soft_vote(p, p), p)
    assert soft_vote(p, [0.3, 0.3, 0.4]).sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        soft_vote([0.5, 0.5], [1.0, 0.0, 0.0])


# --- bootstrap


def test_uniform_bootstrap_is_uniform():
    rng = np.random.default_rng(0)
    counts = np.zeros(10)
    for _ in range(10 ** 4):
        counts += np.bincount(weighted_bootstrap(init_weights(10), rng), minlength=10)
    assert counts.sum() == 10 ** 5
    assert chisquare(counts).pvalue > 0.01


def test_bootstrap_follows_weights():
    rng = np.random.default_rng(1)
    dist = np.array([0.1, 0.2, 0.3, 0.4])
    counts = np.zeros(4)
    for _ in range(25000):
        counts += np.bincount(weighted_bootstrap(dist, rng), minlength=4)
    assert chisquare(counts, dist * counts.sum()).pvalue > 0.01


def test_concentrated_bootstrap():
    dist = np.zeros(7)
    dist[3] = 1.0
    np.testing.assert_array_equal(weighted_bootstrap(dist, np.random.default_rng(2)), [3] * 7)


# --- ensembles


def test_hand_computed_prediction():
    a = TableClassifier([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8]])
    b = TableClassifier([[0.1, 0.8, 0.1], [0.7, 0.2, 0.1], [0.3, 0.3, 0.4]])
    ens = Ensemble([(a, 1.0), (b, 0.5)], num_classes=3)
    x = np.arange(3)[:, None]
    # sample 0: (0.65, 0.7, 0.15) -> 1; sample 1: (0.55, 0.6, 0.35) -> 1; sample 2 -> 2
    np.testing.assert_allclose(ens.scores(x), [[0.65, 0.7, 0.15], [0.55, 0.6, 0.35],
                                               [0.25, 0.25, 1.0]], atol=1e-12)
    np.testing.assert_array_equal(ens.predict(x), [1, 1, 2])


def test_tie_breaks_to_lowest_class():
    clf = TableClassifier([[0.4, 0.4, 0.2]])
    assert Ensemble([(clf, 1.0)], num_classes=3).predict(np.zeros((1, 1)))[0] == 0


def test_duplicate_rounds_same_label():
    clf = TableClassifier(np.random.default_rng(3).dirichlet(np.ones(4), size=6))
    x = np.arange(6)[:, None]
    one = Ensemble([(clf, 0.7)], num_classes=4).predict(x)
    two = Ensemble([(clf, 0.7), (clf, 0.7)], num_classes=4).predict(x)
    np.testing.assert_array_equal(one, two)
    np.testing.assert_array_equal(one, clf.predict(x))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), scale=st.floats(1e-3, 1e3))
def test_predict_invariant_under_alpha_scaling(seed, scale):
    rng = np.random.default_rng(seed)
    rounds = [(TableClassifier(rng.dirichlet(np.ones(5), size=8)), float(rng.uniform(0.1, 2)))
              for _ in range(4)]
    x = np.arange(8)[:, None]
    base = Ensemble(rounds, num_classes=5)
    scaled = Ensemble([(c, a * scale) for c, a in rounds], num_classes=5)
    s1, s2 = base.scores(x), scaled.scores(x)
    # skip draws whose top two scores are within rounding of each other
    top2 = np.sort(s1, axis=1)[:, -2:]
    if np.any(top2[:, 1] - top2[:, 0] < 1e-9):
        return
    np.testing.assert_array_equal(base.predict(x), scaled.predict(x))
    np.testing.assert_allclose(s2, s1 * scale, rtol=1e-12)


def table_learner(tables):
    """Learner returning queued stubs and recording the distribution it saw."""
    seen = []
    queue = list(tables)

    def learner(x, labels, dist, cfg, k):
        seen.append(np.array(dist))
        return TableClassifier(queue.pop(0))
    return learner, seen


def test_single_round_equals_weak_learner():
    labels = np.array([0, 1, 2, 1])
    probs = one_hot(np.array([0, 1, 1, 1]), 3) * 0.7 + 0.1
    learner, _ = table_learner([probs])
    ens = train_adaboost(np.arange(4)[:, None], labels, BoostConfig(rounds=1), 3, learner)
    np.testing.assert_array_equal(ens.predict(np.arange(4)[:, None]), [0, 1, 1, 1])


def test_useless_rounds_are_retried_then_skipped():
    labels = np.array([0, 1, 2, 3])
    useless = one_hot((labels + 1) % 4, 4)
    good = one_hot(labels, 4)
    learner, seen = table_learner([useless, good, useless, useless, useless, useless])
    ens = train_adaboost(np.arange(4)[:, None], labels, BoostConfig(rounds=2), 4, learner)
    assert len(seen) == 6
    assert len(ens.rounds) == 1 and ens.errors == [0.0]


def test_all_rounds_useless_rejected():
    labels = np.array([0, 1])
    learner, _ = table_learner([one_hot(1 - labels, 2)] * 4)
    with pytest.raises(RuntimeError):
        train_adaboost(np.arange(2)[:, None], labels, BoostConfig(rounds=1), 2, learner)


def _modes_run(mode):
    labels = np.array([0] * 6 + [1] * 2)
    preds = labels.copy()
    preds[[0, 6]] = 1 - preds[[0, 6]]
    # the second learner errs elsewhere; repeating the first would sit exactly at chance
    second = labels.copy()
    second[1] = 1
    learner, seen = table_learner([one_hot(preds, 2), one_hot(second, 2)])
    train_adaboost(np.arange(8)[:, None], labels, BoostConfig(rounds=2, category_weights=mode),
                   2, learner)
    return labels, preds, seen


def test_category_weights_every_round():
    labels, preds, seen = _modes_run(CategoryWeightMode.EVERY_ROUND)
    cw = category_weights(labels, 2)
    np.testing.assert_allclose(seen[0], apply_category_weights(init_weights(8), labels, cw))
    e = weighted_error(preds, labels, seen[0])
    after, _ = update_weights(seen[0], classifier_weight(e, 2), preds, labels)
    np.testing.assert_allclose(seen[1], apply_category_weights(after, labels, cw), atol=1e-15)


def test_category_weights_init_only():
    labels, preds, seen = _modes_run(CategoryWeightMode.INIT_ONLY)
    e = weighted_error(preds, labels, seen[0])
    after, _ = update_weights(seen[0], classifier_weight(e, 2), preds, labels)
    np.testing.assert_allclose(seen[1], after, atol=1e-15)


def test_category_weights_off():
    _, _, seen = _modes_run(CategoryWeightMode.OFF)
    np.testing.assert_array_equal(seen[0], init_weights(8))


def test_distributions_stay_normalized():
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 3, 30)
    tables = [one_hot(np.where(rng.random(30) < 0.7, labels, (labels + 1) % 3), 3)
              for _ in range(6)]
    learner, seen = table_learner(tables)
    train_adaboost(np.arange(30)[:, None], labels, BoostConfig(rounds=6), 3, learner)
    for d in seen:
        assert abs(d.sum() - 1) < 1e-9 and np.all(d >= 0)


def test_training_error_bound_with_hard_votes():
    rng = np.random.default_rng(5)
    labels = rng.integers(0, 4, 40)
    tables = [one_hot(np.where(rng.random(40) < 0.55, labels, rng.integers(0, 4, 40)), 4)
              for _ in range(8)]
    learner, _ = table_learner(tables)
    ens = train_adaboost(np.arange(40)[:, None], labels,
                         BoostConfig(rounds=8, category_weights=CategoryWeightMode.OFF), 4, learner)
    err = np.mean(ens.predict(np.arange(40)[:, None]) != labels)
    assert ens.training_error == err
    assert ens.bound_holds and err <= np.prod(ens.z_factors) + 1e-12


def test_recurring_category_weights_compound_on_skewed_classes():
    # every round rescales the minority by the same factor; with a learner that
    # always errs on one majority row the minority share grows geometrically
    labels = np.array([0] * 6 + [1] * 2)
    preds = labels.copy()
    preds[0] = 1
    learner, seen = table_learner([one_hot(preds, 2)] * 4)
    train_adaboost(np.arange(8)[:, None], labels, BoostConfig(rounds=4), 2, learner)
    minority = [d[labels == 1].sum() for d in seen]
    assert all(b > a for a, b in zip(minority, minority[1:]))


# --- neural weak learners


def blobs(n=20, dim=16, seed=0):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(0.2, 0.05, (n, dim)), rng.normal(0.8, 0.05, (n, dim))])
    return x, np.repeat([0, 1], n)


FAST = BoostConfig(rounds=5, weak=TrainConfig(0.1, 20, 8, 0))


def test_separable_blobs_reach_zero_training_error():
    x, y = blobs()
    ens = train_adaboost(x, y, FAST, 2)
    assert np.mean(ens.predict(x) != y) == 0.0
    assert np.mean(ens.predict(x) != y) <= np.prod(ens.z_factors)


def test_train_weak_deterministic():
    x, y = blobs(seed=1)
    cfg = TrainConfig(0.1, 3, 8, 7)
    a = train_weak(x, y, init_weights(len(y)), cfg, 2)
    b = train_weak(x, y, init_weights(len(y)), cfg, 2)
    assert a.cnn == b.cnn and a.fcn == b.fcn
    assert isinstance(a, WeakClassifier)
    np.testing.assert_allclose(a.predict_proba(x).sum(axis=1), 1.0, atol=1e-12)


def test_ensemble_checkpoint_round_trip(tmp_path):
    x, y = blobs(seed=2)
    ens = train_adaboost(x, y, BoostConfig(rounds=2, weak=TrainConfig(0.1, 2, 8, 0)), 2)
    path = tmp_path / "e.sgwm"
    save_ensemble(ens, path)
    loaded = load_ensemble(path)
    np.testing.assert_array_equal(loaded.alphas, ens.alphas)
    np.testing.assert_array_equal(loaded.scores(x), ens.scores(x))
    assert loaded.num_classes == 2
    assert loaded.training_error == ens.training_error
