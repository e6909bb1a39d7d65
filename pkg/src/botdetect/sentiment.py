"""Tweet cleaning and a lexicon-plus-rules compound sentiment scorer."""

from __future__ import annotations

import csv
import math
import re
import string
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

POSITIVE, NEUTRAL, NEGATIVE, INCONCLUSIVE = "positive", "neutral", "negative", "inconclusive"
COMPOUND_LABELS = (POSITIVE, NEUTRAL, NEGATIVE)
HASHTAG_LABELS = (POSITIVE, NEUTRAL, NEGATIVE, INCONCLUSIVE)
LABEL_BAND = 0.05

_WS = re.compile(r"\s+")
_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_USER = re.compile(r"@\w+:?")
_RT = re.compile(r"^\s*RT\b\s*:?")
_ENTITY = re.compile(r"&#?\w+;")
_TAG = re.compile(r"<[^>]*>")
_PUNCT = string.punctuation


def clean_text(text: str) -> str:
    """Whitespace, URL, @user, RT, HTML, '#' and non-ASCII removal, in that order."""
    t = _WS.sub(" ", text).strip()
    t = _URL.sub("", t)
    t = _USER.sub("", t)
    t = _RT.sub("", t)
    t = _ENTITY.sub("", t)
    t = _TAG.sub("", t)
    t = t.replace("#", "")
    t = t.encode("ascii", "ignore").decode("ascii")
    # removals leave gaps behind
    return _WS.sub(" ", t).strip()


@dataclass(frozen=True)
class SentimentRules:
    normalization_alpha: float = 15.0
    negation_scalar: float = -0.74
    negation_window: int = 3
    booster_increment: float = 0.293
    booster_window: int = 3
    caps_increment: float = 0.733
    exclamation_increment: float = 0.292
    exclamation_max: int = 3
    negation: bool = True
    boosters_on: bool = True
    caps: bool = True
    exclamation: bool = True
    negations: frozenset = frozenset()
    boosters: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "SentimentRules":
        toggles = doc.get("rules") or {}
        return cls(
            normalization_alpha=float(doc.get("normalization_alpha", 15.0)),
            negation_scalar=float(doc.get("negation_scalar", -0.74)),
            negation_window=int(doc.get("negation_window", 3)),
            booster_increment=float(doc.get("booster_increment", 0.293)),
            booster_window=int(doc.get("booster_window", 3)),
            caps_increment=float(doc.get("caps_increment", 0.733)),
            exclamation_increment=float(doc.get("exclamation_increment", 0.292)),
            exclamation_max=int(doc.get("exclamation_max", 3)),
            negation=bool(toggles.get("negation", True)),
            boosters_on=bool(toggles.get("boosters", True)),
            caps=bool(toggles.get("caps", True)),
            exclamation=bool(toggles.get("exclamation", True)),
            negations=frozenset(str(w).lower() for w in doc.get("negations") or ()),
            boosters={str(k).lower(): float(v) for k, v in (doc.get("boosters") or {}).items()},
        )

    @classmethod
    def load(cls, path=None) -> "SentimentRules":
        if path is None:
            text = resources.files("botdetect").joinpath("data/sentiment_rules.yaml").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls.from_dict(yaml.safe_load(text) or {})

    def with_toggles(self, **kw) -> "SentimentRules":
        return replace(self, **kw)


_default_rules: Optional[SentimentRules] = None


def default_rules() -> SentimentRules:
    global _default_rules
    if _default_rules is None:
        _default_rules = SentimentRules.load()
    return _default_rules


def load_lexicon(path) -> dict:
    """Tab-separated ``token<TAB>mean_valence[<TAB>...]``; extra columns ignored."""
    lex = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}: malformed lexicon line {line!r}")
            lex[parts[0].lower()] = float(parts[1])
    return lex


def sample_lexicon() -> dict:
    path = resources.files("botdetect").joinpath("data/sample_lexicon.tsv")
    with resources.as_file(path) as p:
        return load_lexicon(p)


def _is_negation(tok: str, rules: SentimentRules) -> bool:
    return tok in rules.negations or tok.endswith("n't")


def compound_score(text: str, lexicon: dict, rules: Optional[SentimentRules] = None) -> float:
    if lexicon is None:
        raise ValueError("a valence lexicon is required")
    rules = rules or default_rules()
    tokens = [t for t in (w.strip(_PUNCT) for w in text.split()) if t]
    lowered = [t.lower() for t in tokens]
    upper = [t.isupper() for t in tokens]
    mixed_case = any(upper) and not all(upper)

    total = 0.0
    for i, word in enumerate(lowered):
        v = lexicon.get(word)
        if not v or word in rules.boosters:
            continue
        sign = math.copysign(1.0, v)
        if rules.caps and mixed_case and upper[i]:
            v += sign * rules.caps_increment
        if rules.boosters_on:
            for j in range(max(0, i - rules.booster_window), i):
                scale = rules.boosters.get(lowered[j])
                if scale:
                    v += sign * scale * rules.booster_increment
        if rules.negation:
            window = lowered[max(0, i - rules.negation_window) : i]
            if any(_is_negation(w, rules) for w in window):
                v *= rules.negation_scalar
        total += v

    if rules.exclamation and total != 0.0:
        bangs = min(text.count("!"), rules.exclamation_max)
        total += math.copysign(bangs * rules.exclamation_increment, total)
    return total / math.sqrt(total * total + rules.normalization_alpha)


def sentiment_label_from_compound(c: float) -> str:
    # the +-0.05 boundary belongs to the signed classes
    if c >= LABEL_BAND:
        return POSITIVE
    if c <= -LABEL_BAND:
        return NEGATIVE
    return NEUTRAL


def load_hashtag_lexicon(path) -> dict:
    """CSV ``hashtag,valence`` with valence in {-1, 0, 1}."""
    lex = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "hashtag":
                continue
            tag = row[0].strip().lstrip("#").lower()
            val = int(row[1])
            if val not in (-1, 0, 1):
                raise ValueError(f"{path}: valence for {tag!r} must be -1, 0 or 1")
            lex[tag] = val
    return lex


def hashtag_sentiment(hashtags, lexicon: dict) -> str:
    vals = {lexicon.get(h.lower(), 0) for h in hashtags}
    pos, neg = 1 in vals, -1 in vals
    if pos and neg:
        return INCONCLUSIVE
    if pos:
        return POSITIVE
    if neg:
        return NEGATIVE
    return NEUTRAL
