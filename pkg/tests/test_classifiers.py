import json

import numpy as np
import pytest

from gridloop.classifiers import (
    GaussianNaiveBayes,
    LogisticRegression,
    RandomForest,
    load_model,
    save_model,
)


def _blobs(n=60, gap=8.0, sd=0.5, seed=17, d=2):
    rng = np.random.default_rng(seed)
    X0 = rng.normal(0.0, sd, size=(n, d))
    X1 = rng.normal(gap, sd, size=(n, d))
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n, dtype=int), np.ones(n, dtype=int)])
    perm = rng.permutation(len(y))
    return X[perm], y[perm]


ALL_MODELS = [
    lambda: LogisticRegression(),
    lambda: GaussianNaiveBayes(),
    lambda: RandomForest(n_trees=25, seed=1),
]


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_separable_blobs(factory):
    X, y = _blobs()
    Xt, yt = _blobs(seed=18)
    model = factory().fit(X, y)
    scores = model.predict_score(X)
    assert np.all((scores >= 0) & (scores <= 1))
    # boundary-hugging cuts may shave an out-of-bag point or two
    assert np.mean((scores >= 0.5) == y) >= 0.98
    assert np.mean((model.predict_score(Xt) >= 0.5) == yt) >= 0.95


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_fit_is_deterministic(factory):
    X, y = _blobs(seed=19)
    s1 = factory().fit(X, y).predict_score(X)
    s2 = factory().fit(X, y).predict_score(X)
    assert np.array_equal(s1, s2)


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_constant_column_dropped_with_warning(factory):
    X, y = _blobs(seed=20)
    X = np.column_stack([X, np.full(len(y), 7.0)])
    with pytest.warns(UserWarning, match="constant feature"):
        model = factory().fit(X, y)
    scores = model.predict_score(X)
    assert np.mean((scores >= 0.5) == y) == 1.0


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_all_constant_rejected(factory):
    X = np.full((20, 3), 2.0)
    y = np.array([0, 1] * 10)
    with pytest.warns(UserWarning):
        with pytest.raises(ValueError, match="all feature columns are constant"):
            factory().fit(X, y)


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_label_validation(factory):
    X = np.random.default_rng(0).normal(size=(10, 2))
    with pytest.raises(ValueError, match="0 or 1"):
        factory().fit(X, np.array([0, 2] * 5))
    with pytest.raises(ValueError, match="both classes"):
        factory().fit(X, np.zeros(10, dtype=int))
    with pytest.raises(ValueError, match="2-d"):
        factory().fit(X[:, 0], np.array([0, 1] * 5))
    with pytest.raises(ValueError, match="one label per row"):
        factory().fit(X, np.array([0, 1] * 3))


@pytest.mark.parametrize("factory", ALL_MODELS)
def test_json_round_trip(factory, tmp_path):
    X, y = _blobs(seed=21)
    model = factory().fit(X, y)
    path = tmp_path / "model.json"
    save_model(model, str(path))
    back = load_model(str(path))
    assert type(back) is type(model)
    probe = np.random.default_rng(22).normal(2.0, 3.0, size=(40, X.shape[1]))
    assert np.array_equal(back.predict_score(probe), model.predict_score(probe))


def test_load_model_rejects_unknown_kind(tmp_path):
    path = tmp_path / "bogus.json"
    path.write_text(json.dumps({"model": "svm"}))
    with pytest.raises(ValueError, match="unknown model kind"):
        load_model(str(path))


# ---------------------------------------------------------------------------
# logistic regression specifics

def test_logreg_scores_monotone_in_a_separating_feature():
    x = np.linspace(-2, 2, 40)
    y = (x > 0).astype(int)
    model = LogisticRegression().fit(x[:, None], y)
    scores = model.predict_score(np.linspace(-3, 3, 21)[:, None])
    assert np.all(np.diff(scores) >= 0)
    assert model.n_epochs_ >= 1


def test_logreg_l2_shrinks_weights():
    X, y = _blobs(seed=23)
    loose = LogisticRegression(l2=0.01).fit(X, y)
    tight = LogisticRegression(l2=100.0).fit(X, y)
    assert np.linalg.norm(tight.weights) < np.linalg.norm(loose.weights)


# ---------------------------------------------------------------------------
# naive Bayes specifics

def test_gnb_midpoint_is_even_odds():
    X = np.concatenate([np.zeros(50), np.full(50, 10.0)])[:, None]
    y = np.array([0] * 50 + [1] * 50)
    model = GaussianNaiveBayes().fit(X, y)
    assert model.predict_score(np.array([[5.0]]))[0] == 0.5
    assert model.predict_score(np.array([[0.0]]))[0] < 1e-12
    assert model.predict_score(np.array([[10.0]]))[0] > 1 - 1e-12
    assert model.priors.tolist() == [0.5, 0.5]


def test_gnb_unbalanced_priors():
    X = np.concatenate([np.zeros(30), np.full(10, 10.0)])[:, None]
    y = np.array([0] * 30 + [1] * 10)
    model = GaussianNaiveBayes().fit(X, y)
    assert model.priors.tolist() == [0.75, 0.25]
    # prior tilts the midpoint toward the majority class
    assert model.predict_score(np.array([[5.0]]))[0] < 0.5


def test_gnb_survives_within_class_constant_feature():
    rng = np.random.default_rng(24)
    informative = np.concatenate([rng.normal(0, 1, 30), rng.normal(6, 1, 30)])
    half_constant = np.concatenate([np.zeros(30), rng.normal(1, 1, 30)])
    X = np.column_stack([informative, half_constant])
    y = np.array([0] * 30 + [1] * 30)
    scores = GaussianNaiveBayes().fit(X, y).predict_score(X)
    assert np.all(np.isfinite(scores))
    assert np.mean((scores >= 0.5) == y) >= 0.95


# ---------------------------------------------------------------------------
# random forest specifics

def test_forest_seed_controls_bagging():
    X, y = _blobs(seed=25, gap=2.0, sd=1.5)
    a = RandomForest(n_trees=30, seed=7).fit(X, y).predict_score(X)
    b = RandomForest(n_trees=30, seed=8).fit(X, y).predict_score(X)
    assert not np.array_equal(a, b)


def test_forest_scores_are_vote_fractions():
    X, y = _blobs(seed=26, gap=2.0, sd=1.5)
    scores = RandomForest(n_trees=40, seed=3).fit(X, y).predict_score(X)
    votes = scores * 40
    assert np.allclose(votes, np.rint(votes), atol=1e-9)


def test_forest_invariant_to_monotone_transforms():
    X, y = _blobs(seed=27, gap=3.0, sd=1.0, d=3)
    probe = np.random.default_rng(28).normal(1.5, 2.0, size=(50, 3))
    raw = RandomForest(n_trees=20, seed=5).fit(X, y).predict_score(probe)
    cubed = RandomForest(n_trees=20, seed=5).fit(X**3, y).predict_score(probe**3)
    assert np.array_equal(raw, cubed)


def test_forest_single_tree():
    X, y = _blobs(seed=29)
    scores = RandomForest(n_trees=1, seed=0).fit(X, y).predict_score(X)
    assert set(np.unique(scores)) <= {0.0, 1.0}


def test_forest_handles_many_distinct_values():
    # forces the 256-cut quantile binning path
    rng = np.random.default_rng(30)
    x = rng.normal(size=2000)
    y = (x > 0).astype(int)
    model = RandomForest(n_trees=10, seed=2).fit(x[:, None], y)
    acc = np.mean((model.predict_score(x[:, None]) >= 0.5) == y)
    assert acc >= 0.98


def test_forest_validation():
    with pytest.raises(ValueError, match="n_trees"):
        RandomForest(n_trees=0)
