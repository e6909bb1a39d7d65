from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from botdetect import kernels
from botdetect.light_features import (
    FEATURE_NAMES,
    MIN_AGE_HOURS,
    N_BIGRAMS,
    UNIFORM_LIKELIHOOD,
    BigramModel,
    compute_user_age,
    extract_light,
    light_matrix,
    screen_name_likelihood,
    train_bigram_model,
)
from conftest import T0, make_user

IDX = kernels.ALPHABET.index


def table_with(entries, fill=0.0):
    p = np.full((63, 63), fill)
    for bg, v in entries.items():
        p[IDX(bg[0]), IDX(bg[1])] = v
    return BigramModel(p)


def test_feature_order():
    assert len(FEATURE_NAMES) == 19
    assert FEATURE_NAMES[:2] == ("statuses_count", "followers_count")
    assert FEATURE_NAMES[-1] == "screen_name_likelihood"


@pytest.mark.parametrize(
    "created, expected",
    [(T0, MIN_AGE_HOURS), (T0 - timedelta(hours=48), 48.0), (T0 + timedelta(hours=5), MIN_AGE_HOURS)],
)
def test_user_age(created, expected):
    assert compute_user_age(make_user(created_at=created), T0) == pytest.approx(expected)


def test_bigram_alpha_zero(backend):
    m = train_bigram_model(["ab"], alpha=0.0, backend=backend)
    assert m.prob("ab") == 1.0
    assert m.probabilities.sum() == 1.0
    assert np.count_nonzero(m.probabilities) == 1


def test_bigram_alpha_one(backend):
    m = train_bigram_model(["ab"], alpha=1.0, backend=backend)
    assert m.prob("ab") == pytest.approx(2 / 3970, rel=1e-15)
    assert m.prob("ba") == pytest.approx(1 / 3970, rel=1e-15)
    assert m.probabilities.sum() == pytest.approx(1.0)


def test_empty_corpus(backend):
    with pytest.raises(ValueError):
        train_bigram_model([], backend=backend)
    with pytest.raises(ValueError):
        train_bigram_model(["x", "y"], backend=backend)


def test_dropped_names_counted(backend):
    m = train_bigram_model(["ab", "a b", "ça"], backend=backend)
    assert m.dropped == 2


@pytest.mark.parametrize("name, expected", [("aa", 0.01), ("aaa", 0.01), ("x", UNIFORM_LIKELIHOOD), ("", UNIFORM_LIKELIHOOD)])
def test_likelihood_examples(backend, name, expected):
    m = table_with({"aa": 0.01}, fill=1e-6)
    assert float(m.likelihoods([name], backend=backend)[0]) == pytest.approx(expected, rel=1e-12)


def test_likelihood_is_geometric_mean(backend):
    m = table_with({"ab": 0.04, "bc": 0.01}, fill=1e-6)
    assert float(m.likelihoods(["abc"], backend=backend)[0]) == pytest.approx(0.02, rel=1e-12)


def test_likelihood_skips_foreign_bigrams(backend):
    m = table_with({"ab": 0.04}, fill=1e-6)
    assert float(m.likelihoods(["ab-"], backend=backend)[0]) == pytest.approx(0.04, rel=1e-12)
    assert float(m.likelihoods(["a-"], backend=backend)[0]) == UNIFORM_LIKELIHOOD


def test_save_load_roundtrip(tmp_path):
    m = train_bigram_model(["alice", "bob_99", "Carol"], alpha=0.5)
    m.save(tmp_path / "b.csv")
    back = BigramModel.load(tmp_path / "b.csv")
    assert np.array_equal(back.probabilities, m.probabilities)
    assert back.smoothing_alpha == 0.5
    text = (tmp_path / "b.csv").read_text().splitlines()
    assert len(text) == 2 + N_BIGRAMS


def test_load_truncated(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("bigram,probability\nab,0.5\n")
    with pytest.raises(ValueError):
        BigramModel.load(p)


def test_extract_examples():
    m = train_bigram_model(["alice"])
    u = make_user(screen_name="bot_123", statuses_count=480, followers_count=50, friends_count=0)
    f = extract_light(u, T0, m)
    assert f.tweet_freq == 10.0
    assert f.followers_friend_ratio == 50.0
    assert f.screen_name_length == 7 and f.num_digits_in_screen_name == 3
    assert f.user_age == 48.0
    assert f.vector().shape == (19,)


def test_light_matrix_matches_rowwise(backend):
    m = train_bigram_model(["alice", "bob", "carol_1"])
    users = [make_user(str(i), n, statuses_count=i * 7) for i, n in enumerate(["al", "b0b", "zz__z"])]
    X = light_matrix(users, [T0] * 3, m)
    for row, u in zip(X, users):
        np.testing.assert_array_equal(row, extract_light(u, T0, m).vector())
    assert light_matrix([], [], m).shape == (0, 19)


@settings(max_examples=60, deadline=None)
@given(
    counts=st.tuples(*[st.integers(0, 10**8)] * 5),
    hours=st.floats(-1e5, 1e6, allow_nan=False),
    name=st.text(max_size=20),
)
def test_features_finite_and_nonnegative(counts, hours, name):
    m = train_bigram_model(["alice", "bob"])
    u = make_user(
        screen_name=name or "x", name=name, created_at=T0 - timedelta(hours=hours),
        statuses_count=counts[0], followers_count=counts[1], friends_count=counts[2],
        favourites_count=counts[3], listed_count=counts[4],
    )
    f = extract_light(u, T0, m)
    v = f.vector()
    assert np.isfinite(v).all() and (v >= 0).all()
    assert f.user_age >= MIN_AGE_HOURS
    assert 0 < f.screen_name_likelihood <= 1
