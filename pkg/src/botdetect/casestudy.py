"""Topic case studies: bot prevalence, score distributions, sentiment and hashtags."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import classify
from .evaluation import anderson_darling_2sample
from .light_features import light_matrix
from .sentiment import (
    COMPOUND_LABELS,
    HASHTAG_LABELS,
    clean_text,
    compound_score,
    hashtag_sentiment,
    sentiment_label_from_compound,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicSpec:
    name: str
    seed_hashtags: tuple
    match_mode: str = "prefix"

    def __post_init__(self):
        seeds = tuple(s.lstrip("#").lower() for s in self.seed_hashtags)
        if not seeds or not all(seeds):
            raise ValueError(f"topic {self.name!r} needs at least one seed hashtag")
        if self.match_mode not in ("prefix", "substring"):
            raise ValueError(f"match_mode must be prefix or substring, not {self.match_mode!r}")
        object.__setattr__(self, "seed_hashtags", seeds)

    @classmethod
    def from_dict(cls, doc: dict) -> "TopicSpec":
        return cls(doc["name"], tuple(doc.get("seed_hashtags") or doc.get("seeds") or ()), doc.get("match_mode", "prefix"))


def match_topic(tweet, topic: TopicSpec) -> bool:
    tags = getattr(tweet, "hashtags", tweet)
    if topic.match_mode == "prefix":
        return any(h.startswith(s) for h in tags for s in topic.seed_hashtags)
    return any(s in h for h in tags for s in topic.seed_hashtags)


def topic_tweets(tweets, topic: TopicSpec, english_only: bool = True) -> list:
    return [t for t in tweets if (not english_only or t.lang == "en") and match_topic(t, topic)]


# -- scoring accounts -------------------------------------------------------------


def latest_snapshots(tweets) -> dict:
    """Newest user object per account plus its newest tweet time (probe time)."""
    latest: dict = {}
    for t in tweets:
        cur = latest.get(t.user.id)
        if cur is None or t.created_at >= cur[1]:
            latest[t.user.id] = (t.user, t.created_at)
    return latest


def light_scorer(model: classify.FittedModel) -> Callable:
    if model.feature_set_id != "Light" or model.bigram is None:
        raise ValueError("case studies need a Light-feature model carrying its bigram table")

    def scorer(users, probe_times):
        return classify.score(model, light_matrix(users, probe_times, model.bigram))

    return scorer


def score_accounts(tweets, scorer) -> dict:
    if isinstance(scorer, classify.FittedModel):
        scorer = light_scorer(scorer)
    snaps = latest_snapshots(tweets)
    ids = sorted(snaps)
    if not ids:
        return {}
    scores = scorer([snaps[i][0] for i in ids], [snaps[i][1] for i in ids])
    return dict(zip(ids, (float(s) for s in scores)))


@dataclass
class Presence:
    account_count: int
    tweet_count: int
    bot_accounts: int
    bot_tweets: int
    threshold: float
    account_is_bot: dict
    bot_scores: np.ndarray
    human_scores: np.ndarray

    @property
    def bot_fraction_accounts(self) -> float:
        return self.bot_accounts / self.account_count

    @property
    def bot_fraction_tweets(self) -> float:
        return self.bot_tweets / self.tweet_count


def analyze_presence(tweets, scorer, threshold: float, scores: Optional[dict] = None) -> Presence:
    tweets = list(tweets)
    if scores is None:
        scores = score_accounts(tweets, scorer)
    if not scores:
        raise ValueError("no accounts to analyse")
    is_bot = {a: s > threshold for a, s in scores.items()}
    bot_tweets = sum(1 for t in tweets if is_bot[t.user.id])
    ids = sorted(scores)
    return Presence(
        account_count=len(scores),
        tweet_count=len(tweets),
        bot_accounts=sum(is_bot.values()),
        bot_tweets=bot_tweets,
        threshold=float(threshold),
        account_is_bot=is_bot,
        bot_scores=np.array([scores[a] for a in ids if is_bot[a]]),
        human_scores=np.array([scores[a] for a in ids if not is_bot[a]]),
    )


def top_hashtags(tweets, n: int = 20, exclude=()) -> list:
    exclude = set(exclude)
    counts = Counter(h.lower() for t in tweets for h in t.hashtags if h.lower() not in exclude)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def _proportions(labels, classes) -> Optional[dict]:
    if not labels:
        return None
    c = Counter(labels)
    return {k: c.get(k, 0) / len(labels) for k in classes}


def _safe_ad(x, y) -> Optional[dict]:
    try:
        return anderson_darling_2sample(x, y).to_dict()
    except ValueError:
        return None


@dataclass
class CaseReport:
    topic: TopicSpec
    account_count: int = 0
    tweet_count: int = 0
    bot_fraction_accounts: float = 0.0
    bot_fraction_tweets: float = 0.0
    threshold: Optional[float] = None
    score_histograms: dict = field(default_factory=dict)
    sentiment: dict = field(default_factory=dict)
    top_hashtags: dict = field(default_factory=dict)
    compound_ad_test: Optional[dict] = None
    score_samples: dict = field(default_factory=dict)
    compound_samples: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "topic": {
                "name": self.topic.name,
                "seed_hashtags": list(self.topic.seed_hashtags),
                "match_mode": self.topic.match_mode,
            },
            "account_count": self.account_count,
            "tweet_count": self.tweet_count,
            "bot_fraction_accounts": self.bot_fraction_accounts,
            "bot_fraction_tweets": self.bot_fraction_tweets,
            "threshold": self.threshold,
            "score_histograms": self.score_histograms,
            "sentiment": self.sentiment,
            "top_hashtags": {k: [[h, c] for h, c in v] for k, v in self.top_hashtags.items()},
            "compound_ad_test": self.compound_ad_test,
            "message": self.message,
        }


def build_case_report(
    tweets,
    topic: TopicSpec,
    scorer,
    threshold: float,
    lexicon: Optional[dict] = None,
    rules=None,
    hashtag_lexicon: Optional[dict] = None,
    top_n: int = 20,
    exclude_seed_hashtags: bool = False,
    bins: int = 20,
    english_only: bool = True,
    prefiltered: bool = False,
) -> CaseReport:
    matched = list(tweets) if prefiltered else topic_tweets(tweets, topic, english_only)
    report = CaseReport(topic=topic, threshold=float(threshold))
    if not matched:
        report.message = "0 tweets matched"
        return report

    presence = analyze_presence(matched, scorer, threshold)
    report.account_count = presence.account_count
    report.tweet_count = presence.tweet_count
    report.bot_fraction_accounts = presence.bot_fraction_accounts
    report.bot_fraction_tweets = presence.bot_fraction_tweets
    edges = np.linspace(0.0, 1.0, bins + 1)
    report.score_samples = {"bot": presence.bot_scores, "human": presence.human_scores}
    report.score_histograms = {
        "edges": edges.tolist(),
        **{k: np.histogram(v, bins=edges)[0].tolist() for k, v in report.score_samples.items()},
    }

    by_class = {"bot": [], "human": []}
    for t in matched:
        by_class["bot" if presence.account_is_bot[t.user.id] else "human"].append(t)

    if lexicon is not None:
        compounds = {k: [compound_score(clean_text(t.text), lexicon, rules) for t in v] for k, v in by_class.items()}
        report.compound_samples = {k: np.array(v) for k, v in compounds.items()}
        report.sentiment["compound"] = {
            k: _proportions([sentiment_label_from_compound(c) for c in v], COMPOUND_LABELS)
            for k, v in compounds.items()
        }
        report.compound_ad_test = _safe_ad(compounds["bot"], compounds["human"])
    if hashtag_lexicon is not None:
        report.sentiment["hashtag"] = {
            k: _proportions([hashtag_sentiment(t.hashtags, hashtag_lexicon) for t in v], HASHTAG_LABELS)
            for k, v in by_class.items()
        }

    excluded = set()
    if exclude_seed_hashtags:
        tags = {h for t in matched for h in t.hashtags}
        excluded = {h for h in tags if match_topic([h], topic)}
    report.top_hashtags = {k: top_hashtags(v, top_n, excluded) for k, v in by_class.items()}
    return report


def compare_score_distributions(samples: dict) -> dict:
    """Pairwise two-sample AD tests between named score samples."""
    out = {}
    for a, b in itertools.combinations(sorted(samples), 2):
        out[f"{a}|{b}"] = _safe_ad(samples[a], samples[b])
    return out
