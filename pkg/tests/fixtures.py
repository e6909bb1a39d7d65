"""Constructed case-study fixtures with known ground truth."""

from datetime import timedelta

import numpy as np

from conftest import T0, make_tweet, make_user


def id_scorer(users, probe_times):
    """Bots are the accounts whose id starts with 'b'."""
    return np.array([0.9 if u.id.startswith("b") else 0.1 for u in users])


def presence_fixture(n_human, n_bot, human_tweets, bot_tweets, tag="trump2020", seed=0):
    """Accounts with at least one tweet each; surplus tweets spread at random."""
    rng = np.random.default_rng(seed)
    tweets = []
    for prefix, n_acc, n_tw in (("h", n_human, human_tweets), ("b", n_bot, bot_tweets)):
        per = np.ones(n_acc, dtype=int) + np.bincount(rng.integers(0, n_acc, n_tw - n_acc), minlength=n_acc)
        for a, k in enumerate(per):
            user = make_user(f"{prefix}{a}", f"{prefix}user{a}")
            for j in range(k):
                tweets.append(make_tweet(f"{prefix}{a}-{j}", user, T0 + timedelta(minutes=j), hashtags=[tag], text="good"))
    return tweets


def trump_fixture():
    # 1826 / 10000 accounts and 11146 / 20000 tweets
    return presence_fixture(8174, 1826, 8854, 11146)
