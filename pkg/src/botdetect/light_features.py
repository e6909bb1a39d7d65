"""Account-metadata ("Light") features and the screen-name bigram model."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .ingest import UserObject

log = logging.getLogger(__name__)

N_BIGRAMS = kernels.N_ALPHA**2  # 3969
UNIFORM_LIKELIHOOD = 1.0 / N_BIGRAMS
MIN_AGE_HOURS = 1.0 / 3600.0
MODEL_HEADER = "# botdetect-bigram v1"

RAW_FIELDS = (
    "statuses_count",
    "followers_count",
    "friends_count",
    "favourites_count",
    "listed_count",
    "default_profile",
    "verified",
)
DERIVED_FIELDS = (
    "screen_name_length",
    "num_digits_in_screen_name",
    "name_length",
    "num_digits_in_name",
    "description_length",
    "friend_growth_rate",
    "listed_growth_rate",
    "favourites_growth_rate",
    "tweet_freq",
    "followers_growth_rate",
    "followers_friend_ratio",
    "screen_name_likelihood",
)
FEATURE_NAMES = RAW_FIELDS + DERIVED_FIELDS


@dataclass(frozen=True)
class BigramModel:
    probabilities: np.ndarray  # (63, 63), rows = first character
    smoothing_alpha: float = 1.0
    alphabet: str = kernels.ALPHABET
    dropped: int = 0  # training names rejected for bad characters

    def __post_init__(self):
        if self.probabilities.shape != (kernels.N_ALPHA, kernels.N_ALPHA):
            raise ValueError(f"bigram table must have {N_BIGRAMS} entries")

    def prob(self, bigram: str) -> float:
        a, b = (self.alphabet.index(c) for c in bigram)
        return float(self.probabilities[a, b])

    def likelihoods(self, names, backend=None) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_prob = np.log(self.probabilities)
        return kernels.name_likelihoods(names, log_prob, UNIFORM_LIKELIHOOD, backend=backend)

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"{MODEL_HEADER} alpha={self.smoothing_alpha!r}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bigram", "probability"])
            for i, a in enumerate(self.alphabet):
                for j, b in enumerate(self.alphabet):
                    w.writerow([a + b, repr(float(self.probabilities[i, j]))])
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "BigramModel":
        alpha = 1.0
        table = np.full((kernels.N_ALPHA, kernels.N_ALPHA), np.nan)
        n = 0
        with open(path, newline="", encoding="utf-8") as fh:
            first = fh.readline()
            if first.startswith("# botdetect-bigram"):
                for part in first.split():
                    if part.startswith("alpha="):
                        alpha = float(part[6:])
            else:
                fh.seek(0)
            for row in csv.reader(fh):
                if not row or row[0] == "bigram":
                    continue
                bigram, p = row[0], float(row[1])
                if len(bigram) != 2 or any(c not in kernels.ALPHABET for c in bigram):
                    raise ValueError(f"{path}: invalid bigram {bigram!r}")
                table[kernels.ALPHABET.index(bigram[0]), kernels.ALPHABET.index(bigram[1])] = p
                n += 1
        if n != N_BIGRAMS or np.isnan(table).any():
            raise ValueError(f"{path}: expected {N_BIGRAMS} bigram entries, found {n}")
        return cls(probabilities=table, smoothing_alpha=alpha)


def train_bigram_model(screen_names: Iterable[str], alpha: float = 1.0, backend=None) -> BigramModel:
    """Laplace-smoothed joint bigram frequencies over the screen-name alphabet.

    Names containing characters outside the alphabet are dropped and counted.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    counts, dropped = kernels.bigram_counts(screen_names, backend=backend)
    if dropped:
        log.warning("dropped %d screen names with characters outside the alphabet", dropped)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("no training bigrams")
    probs = (counts + alpha) / (total + alpha * N_BIGRAMS)
    return BigramModel(probabilities=probs, smoothing_alpha=float(alpha), dropped=dropped)


def screen_name_likelihood(name: str, model: BigramModel) -> float:
    return float(model.likelihoods([name])[0])


def compute_user_age(user: UserObject, probe_time: datetime) -> float:
    hours = (probe_time - user.created_at).total_seconds() / 3600.0
    return max(hours, MIN_AGE_HOURS)


def _digits(s: str) -> int:
    return sum(c in "0123456789" for c in s)


@dataclass(frozen=True)
class LightFeatures:
    statuses_count: int
    followers_count: int
    friends_count: int
    favourites_count: int
    listed_count: int
    default_profile: int
    verified: int
    screen_name_length: int
    num_digits_in_screen_name: int
    name_length: int
    num_digits_in_name: int
    description_length: int
    friend_growth_rate: float
    listed_growth_rate: float
    favourites_growth_rate: float
    tweet_freq: float
    followers_growth_rate: float
    followers_friend_ratio: float
    screen_name_likelihood: float
    user_age: float  # audit only, not a feature

    def vector(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURE_NAMES], dtype=np.float64)


def extract_light(user: UserObject, probe_time: datetime, model: BigramModel, likelihood=None) -> LightFeatures:
    age = compute_user_age(user, probe_time)
    if likelihood is None:
        likelihood = screen_name_likelihood(user.screen_name, model)
    return LightFeatures(
        statuses_count=user.statuses_count,
        followers_count=user.followers_count,
        friends_count=user.friends_count,
        favourites_count=user.favourites_count,
        listed_count=user.listed_count,
        default_profile=int(user.default_profile),
        verified=int(user.verified),
        screen_name_length=len(user.screen_name),
        num_digits_in_screen_name=_digits(user.screen_name),
        name_length=len(user.name),
        num_digits_in_name=_digits(user.name),
        description_length=len(user.description),
        friend_growth_rate=user.friends_count / age,
        listed_growth_rate=user.listed_count / age,
        favourites_growth_rate=user.favourites_count / age,
        tweet_freq=user.statuses_count / age,
        followers_growth_rate=user.followers_count / age,
        followers_friend_ratio=user.followers_count / max(1, user.friends_count),
        screen_name_likelihood=float(likelihood),
        user_age=age,
    )


def light_matrix(users, probe_times, model: BigramModel) -> np.ndarray:
    """Feature matrix (n, 19) for many users; likelihoods are scored in one batch."""
    users = list(users)
    if not users:
        return np.empty((0, len(FEATURE_NAMES)))
    lik = model.likelihoods([u.screen_name for u in users])
    return np.vstack([extract_light(u, t, model, lk).vector() for u, t, lk in zip(users, probe_times, lik)])
