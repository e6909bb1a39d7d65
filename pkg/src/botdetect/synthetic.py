"""Seeded synthetic accounts, timelines and registries for tests and demos."""

from __future__ import annotations

import csv
import json
import string
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import yaml

from .ingest import format_time

EPOCH = datetime(2020, 6, 1, tzinfo=timezone.utc)
KIND_KEYS = ("tweet", "reply", "retweet")

# Dataset class profile from the bot-repository training roster (human, bot).
ROSTER_TRAIN_PROFILE = {
    "botometer_feed": (347, 108),
    "varol": (1525, 690),
    "political": (0, 13),
    "cresci_17": (2907, 5925),
    "celebrity": (5814, 0),
    "vendor": (0, 731),
    "pronbots": (0, 1899),
    "caverlee": (15211, 14619),
}
ROSTER_TEST_PROFILE = {
    "rtbust": (332, 321),
    "gilani": (1418, 1043),
    "kaiser": (1007, 290),
    "botwiki_verified": (1985, 685),
    "midterm": (7416, 37),
    "stock": (6132, 6964),
}


def blobs(n: int = 200, separation: float = 6.0, seed: int = 42, dim: int = 2):
    """Two unit-variance Gaussian blobs ``separation`` sigmas apart; y=1 is the bot blob."""
    rng = np.random.default_rng(seed)
    half = n // 2
    y = np.r_[np.zeros(half, dtype=np.int64), np.ones(n - half, dtype=np.int64)]
    centers = np.zeros((2, dim))
    centers[0, 0], centers[1, 0] = -separation / 2, separation / 2
    X = rng.standard_normal((n, dim)) + centers[y]
    return X, y


def xor_data(n: int = 400, seed: int = 42):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(np.int64)
    return X, y


def periodic_dna(length: int, pattern: str = "AT") -> str:
    return (pattern * (length // len(pattern) + 1))[:length]


def random_dna(length: int, rng, bases: str = "ACT") -> str:
    return "".join(np.asarray(list(bases))[rng.integers(0, len(bases), length)])


_KIND_OF = {"A": "tweet", "C": "reply", "T": "retweet"}


def user_dict(rng, account_id: str, bot: bool, created_at: datetime, protected: bool = False) -> dict:
    letters = string.ascii_lowercase
    if bot:
        screen = "".join(rng.choice(list(letters + string.digits), size=int(rng.integers(8, 15))))
        followers = int(rng.integers(0, 200))
        statuses = int(rng.integers(2000, 60000))
    else:
        screen = "".join(rng.choice(list("aeioulnrst"), size=int(rng.integers(5, 11)))) + "_" + letters[int(rng.integers(26))]
        followers = int(rng.integers(50, 5000))
        statuses = int(rng.integers(10, 8000))
    return {
        "id_str": account_id,
        "screen_name": screen,
        "name": screen.title(),
        "description": "" if bot and rng.random() < 0.6 else "x" * int(rng.integers(5, 160)),
        "statuses_count": statuses,
        "followers_count": followers,
        "friends_count": int(rng.integers(0, 3000)),
        "favourites_count": int(rng.integers(0, 20000)),
        "listed_count": int(rng.integers(0, 50)),
        "default_profile": bool(rng.random() < (0.7 if bot else 0.3)),
        "verified": bool((not bot) and rng.random() < 0.05),
        "created_at": format_time(created_at),
        "protected": protected,
    }


def timeline_dicts(user: dict, dna: str, start: datetime, step_minutes: float = 60.0, lang: str = "en") -> list:
    out = []
    for i, base in enumerate(dna):
        kind = _KIND_OF[base]
        t = {
            "id_str": f"{user['id_str']}-{i}",
            "user": user,
            "created_at": format_time(start + timedelta(minutes=step_minutes * i)),
            "full_text": f"status {i}",
            "entities": {"hashtags": []},
            "lang": lang,
        }
        if kind == "retweet":
            t["retweeted_status"] = {"id_str": "0"}
        elif kind == "reply":
            t["in_reply_to_status_id"] = 1
        out.append(t)
    return out


def account_dna(rng, bot: bool, length: int, noise: float = 0.0) -> str:
    if bot:
        pattern = ["AT", "TTA", "TAC", "T"][int(rng.integers(4))]
        seq = list(periodic_dna(length, pattern))
        for i in np.flatnonzero(rng.random(length) < noise):
            seq[i] = "ACT"[int(rng.integers(3))]
        return "".join(seq)
    probs = rng.dirichlet([2.0, 2.0, 2.0])
    return "".join(np.asarray(list("ACT"))[rng.choice(3, size=length, p=probs)])


def write_dataset(
    root,
    name: str,
    role: str,
    n_human: int,
    n_bot: int,
    seed: int = 0,
    timelines: bool = True,
    timeline_length=(20, 120),
    dna_noise: float = 0.15,
    protected_rate: float = 0.0,
) -> dict:
    """Write users/labels (and optionally timelines) for one dataset; return its manifest entry."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    users_path = root / f"{name}_users.jsonl"
    labels_path = root / f"{name}_labels.csv"
    tl_path = root / f"{name}_timelines.jsonl"
    labels = [("human", i) for i in range(n_human)] + [("bot", i) for i in range(n_bot)]
    with open(users_path, "w", encoding="utf-8") as uf, open(labels_path, "w", newline="", encoding="utf-8") as lf:
        tf = open(tl_path, "w", encoding="utf-8") if timelines else None
        try:
            w = csv.writer(lf, lineterminator="\n")
            w.writerow(["account_id", "label"])
            for label, i in labels:
                account_id = f"{name}-{label[0]}{i}"
                bot = label == "bot"
                created = EPOCH - timedelta(hours=float(rng.uniform(24, 24 * 2000)))
                user = user_dict(rng, account_id, bot, created, protected=bool(rng.random() < protected_rate))
                uf.write(json.dumps(user) + "\n")
                w.writerow([account_id, label])
                if tf is not None and not user["protected"]:
                    n = int(rng.integers(timeline_length[0], timeline_length[1] + 1))
                    dna = account_dna(rng, bot, n, dna_noise)
                    for t in timeline_dicts(user, dna, EPOCH - timedelta(hours=n)):
                        tf.write(json.dumps(t) + "\n")
        finally:
            if tf is not None:
                tf.close()
    entry = {
        "name": name,
        "role": role,
        "users_path": users_path.name,
        "labels_path": labels_path.name,
        "collected_at": format_time(EPOCH),
    }
    if timelines:
        entry["timelines_path"] = tl_path.name
    return entry


def write_registry(root, profile: dict, seed: int = 0, **kw) -> Path:
    """``profile`` maps name -> (role, n_human, n_bot). Returns the manifest path."""
    root = Path(root)
    entries = [
        write_dataset(root, name, role, nh, nb, seed=seed + i, **kw)
        for i, (name, (role, nh, nb)) in enumerate(profile.items())
    ]
    manifest = root / "manifest.yaml"
    manifest.write_text(yaml.safe_dump({"datasets": entries}, sort_keys=False), encoding="utf-8")
    return manifest


def roster_class_profile() -> dict:
    return {n: {"human": h, "bot": b} for n, (h, b) in ROSTER_TRAIN_PROFILE.items()}


def toy_profile() -> dict:
    return {
        "train_a": ("train", 40, 30),
        "train_b": ("train", 0, 25),
        "test_x": ("test", 30, 30),
        "test_y": ("test", 25, 20),
    }
