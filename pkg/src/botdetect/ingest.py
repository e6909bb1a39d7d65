"""Tweet/user JSON-lines parsing, timelines and labeled dataset registries."""

from __future__ import annotations

import csv
import gzip
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime
from pathlib import Path
from typing import Iterable, Iterator, Optional

import yaml

log = logging.getLogger(__name__)

MAX_TIMELINE = 3200
KINDS = ("tweet", "reply", "retweet")
LABELS = ("bot", "human")


class ParseError(ValueError):
    """Malformed JSON; ``offset`` is the byte offset inside the line."""

    def __init__(self, msg: str, offset: int, lineno: Optional[int] = None):
        where = f"line {lineno}, " if lineno is not None else ""
        super().__init__(f"{msg} ({where}byte offset {offset})")
        self.offset = offset
        self.lineno = lineno


class SchemaError(ValueError):
    def __init__(self, field_name: str, msg: str = "missing mandatory field"):
        super().__init__(f"{msg}: {field_name}")
        self.field = field_name


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class UserObject:
    id: str
    screen_name: str
    name: str
    description: str
    statuses_count: int
    followers_count: int
    friends_count: int
    favourites_count: int
    listed_count: int
    default_profile: bool
    verified: bool
    created_at: datetime
    protected: bool = False


@dataclass(frozen=True)
class TweetRecord:
    id: str
    user: UserObject
    created_at: datetime
    text: str
    hashtags: tuple
    kind: str
    lang: Optional[str] = None


@dataclass(frozen=True)
class Timeline:
    account_id: str
    tweets: tuple

    @property
    def probe_time(self) -> datetime:
        return self.tweets[-1].created_at

    def __len__(self):
        return len(self.tweets)


@dataclass
class LabeledEntry:
    user: UserObject
    label: str
    timeline: Optional[Timeline] = None


@dataclass
class LabeledDataset:
    name: str
    role: str
    entries: list = field(default_factory=list)
    collected_at: Optional[datetime] = None

    def counts(self) -> dict:
        out = {"human": 0, "bot": 0}
        for e in self.entries:
            out[e.label] += 1
        return out

    @property
    def has_both_classes(self) -> bool:
        c = self.counts()
        return c["bot"] > 0 and c["human"] > 0


# -- timestamps ---------------------------------------------------------------

TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"


def parse_time(value) -> datetime:
    """Accept Twitter's ``created_at`` format, ISO 8601 or epoch seconds; return UTC."""
    if isinstance(value, datetime):
        dt = value
    elif isinstance(value, (int, float)):
        dt = datetime.fromtimestamp(value, tz=timezone.utc)
    else:
        s = str(value).strip()
        try:
            dt = datetime.strptime(s, TWITTER_TIME)
        except ValueError:
            try:
                dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
            except ValueError:
                dt = parsedate_to_datetime(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_time(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(TWITTER_TIME)


# -- parsing ------------------------------------------------------------------


def _require(obj: dict, key: str, prefix: str = ""):
    if key not in obj or obj[key] is None:
        raise SchemaError(prefix + key)
    return obj[key]


def _count(obj: dict, key: str) -> int:
    value = int(obj.get(key) or 0)
    if value < 0:
        raise SchemaError(f"user.{key}", "negative count")
    return value


def parse_user(obj: dict) -> UserObject:
    uid = obj.get("id_str") or (str(obj["id"]) if obj.get("id") is not None else None)
    if not uid:
        raise SchemaError("user.id_str")
    try:
        created = parse_time(_require(obj, "created_at", "user."))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("user.created_at", "unparseable timestamp") from exc
    return UserObject(
        id=str(uid),
        screen_name=str(_require(obj, "screen_name", "user.")),
        name=str(obj.get("name") or ""),
        description=str(obj.get("description") or ""),
        statuses_count=_count(obj, "statuses_count"),
        followers_count=_count(obj, "followers_count"),
        friends_count=_count(obj, "friends_count"),
        favourites_count=_count(obj, "favourites_count"),
        listed_count=_count(obj, "listed_count"),
        default_profile=bool(obj.get("default_profile", False)),
        verified=bool(obj.get("verified", False)),
        created_at=created,
        protected=bool(obj.get("protected", False)),
    )


def classify_kind(obj: dict) -> str:
    # retweet wins over reply when both markers are present
    if obj.get("retweeted_status") is not None:
        return "retweet"
    if obj.get("in_reply_to_status_id") is not None or obj.get("in_reply_to_status_id_str"):
        return "reply"
    return "tweet"


def tweet_from_dict(obj: dict) -> TweetRecord:
    tid = obj.get("id_str") or (str(obj["id"]) if obj.get("id") is not None else None)
    if not tid:
        raise SchemaError("id_str")
    user = parse_user(_require(obj, "user"))
    try:
        created = parse_time(_require(obj, "created_at"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError("created_at", "unparseable timestamp") from exc
    text = obj.get("full_text")
    if text is None:
        text = obj.get("text")
    if text is None:
        raise SchemaError("text")
    entities = obj.get("entities") or {}
    hashtags = tuple(str(h["text"]).lower() for h in entities.get("hashtags") or [] if h.get("text"))
    return TweetRecord(
        id=str(tid),
        user=user,
        created_at=created,
        text=str(text),
        hashtags=hashtags,
        kind=classify_kind(obj),
        lang=obj.get("lang"),
    )


def _loads(line: str, lineno: Optional[int] = None) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        offset = len(line[: exc.pos].encode("utf-8"))
        raise ParseError(exc.msg, offset, lineno) from exc
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", 0, lineno)
    return obj


def parse_tweet_json(line: str) -> TweetRecord:
    return tweet_from_dict(_loads(line))


def parse_user_json(line: str) -> UserObject:
    return parse_user(_loads(line))


def user_to_dict(user: UserObject) -> dict:
    return {
        "id_str": user.id,
        "screen_name": user.screen_name,
        "name": user.name,
        "description": user.description,
        "statuses_count": user.statuses_count,
        "followers_count": user.followers_count,
        "friends_count": user.friends_count,
        "favourites_count": user.favourites_count,
        "listed_count": user.listed_count,
        "default_profile": user.default_profile,
        "verified": user.verified,
        "created_at": format_time(user.created_at),
        "protected": user.protected,
    }


def tweet_to_dict(tweet: TweetRecord) -> dict:
    obj = {
        "id_str": tweet.id,
        "user": user_to_dict(tweet.user),
        "created_at": format_time(tweet.created_at),
        "full_text": tweet.text,
        "entities": {"hashtags": [{"text": h} for h in tweet.hashtags]},
        "lang": tweet.lang,
    }
    if tweet.kind == "retweet":
        obj["retweeted_status"] = {}
    elif tweet.kind == "reply":
        obj["in_reply_to_status_id_str"] = "0"
        obj["in_reply_to_status_id"] = 0
    return obj


def serialize_tweet(tweet: TweetRecord) -> str:
    return json.dumps(tweet_to_dict(tweet), ensure_ascii=False)


def open_text(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def iter_json_lines(path) -> Iterator[dict]:
    with open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                yield _loads(line, lineno)


def read_tweets(path) -> list:
    return [tweet_from_dict(obj) for obj in iter_json_lines(path)]


def read_users(path) -> list:
    # user lines may also be whole tweet objects carrying a user
    out = []
    for obj in iter_json_lines(path):
        out.append(parse_user(obj["user"] if "user" in obj and "screen_name" not in obj else obj))
    return out


# -- timelines ----------------------------------------------------------------


def build_timeline(records: Iterable[TweetRecord]) -> Timeline:
    records = list(records)
    if not records:
        raise ValueError("no timeline")
    ids = {r.user.id for r in records}
    if len(ids) != 1:
        raise ValueError(f"records span {len(ids)} accounts")
    # stable sort keeps input order on equal timestamps
    ordered = sorted(records, key=lambda r: r.created_at)
    return Timeline(account_id=records[0].user.id, tweets=tuple(ordered[-MAX_TIMELINE:]))


def group_timelines(records: Iterable[TweetRecord]) -> dict:
    by_user: dict = {}
    for r in records:
        by_user.setdefault(r.user.id, []).append(r)
    return {uid: build_timeline(rs) for uid, rs in by_user.items()}


# -- registry -----------------------------------------------------------------


def read_labels(path) -> dict:
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("account_id", "id"):
                continue
            account_id, label = row[0].strip(), row[1].strip().lower()
            if label not in LABELS:
                raise RegistryError(f"{path}: bad label {label!r} for account {account_id}")
            labels[account_id] = label
    return labels


def _resolve(base: Path, p) -> Path:
    p = Path(p)
    return p if p.is_absolute() else base / p


def load_dataset(spec: dict, base: Path) -> LabeledDataset:
    for key in ("name", "role", "users_path", "labels_path"):
        if key not in spec:
            raise RegistryError(f"manifest entry missing {key!r}: {spec}")
    if spec["role"] not in ("train", "test"):
        raise RegistryError(f"dataset {spec['name']}: role must be train or test")
    paths = {k: _resolve(base, spec[k]) for k in ("users_path", "labels_path", "timelines_path") if spec.get(k)}
    for key, p in paths.items():
        if not p.is_file():
            raise RegistryError(f"dataset {spec['name']}: cannot read {key} {p}")
    try:
        labels = read_labels(paths["labels_path"])
        users = {u.id: u for u in read_users(paths["users_path"])}
        timelines = group_timelines(read_tweets(paths["timelines_path"])) if "timelines_path" in paths else {}
    except (OSError, UnicodeDecodeError) as exc:
        raise RegistryError(f"dataset {spec['name']}: {exc}") from exc
    entries = []
    missing = 0
    for account_id, label in labels.items():
        user = users.get(account_id)
        if user is None:
            missing += 1
            continue
        entries.append(LabeledEntry(user=user, label=label, timeline=timelines.get(account_id)))
    if missing:
        log.warning("dataset %s: %d labeled accounts have no user object", spec["name"], missing)
    collected = parse_time(spec["collected_at"]) if spec.get("collected_at") else None
    return LabeledDataset(name=spec["name"], role=spec["role"], entries=entries, collected_at=collected)


@dataclass(frozen=True)
class Registry:
    datasets: dict

    def __len__(self):
        return len(self.datasets)

    def __getitem__(self, name) -> LabeledDataset:
        return self.datasets[name]

    def __iter__(self):
        return iter(self.datasets.values())

    def by_role(self, role: str) -> list:
        return [d for d in self.datasets.values() if d.role == role]

    def counts(self) -> dict:
        return {name: d.counts() for name, d in self.datasets.items()}


def load_registry(manifest_path) -> Registry:
    """Load a YAML/JSON manifest with a top-level ``datasets`` list."""
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise RegistryError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise RegistryError(f"malformed manifest {manifest_path}: {exc}") from exc
    specs = (doc or {}).get("datasets") or [] if isinstance(doc, (dict, type(None))) else doc
    if not isinstance(specs, list):
        raise RegistryError("manifest 'datasets' must be a list")
    seen = set()
    for spec in specs:
        name = spec.get("name")
        if name in seen:
            raise RegistryError(f"duplicate dataset name {name!r}")
        seen.add(name)
    datasets = {}
    for spec in specs:
        ds = load_dataset(spec, manifest_path.parent)
        c = ds.counts()
        log.info("dataset %s (%s): %d human / %d bot", ds.name, ds.role, c["human"], c["bot"])
        datasets[ds.name] = ds
    return Registry(datasets)
