import gzip
import json
from datetime import timedelta

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from botdetect import ingest
from conftest import T0, make_tweet, make_user

USER = {
    "id_str": "42",
    "screen_name": "bot_123",
    "name": "Bot",
    "description": "hi",
    "statuses_count": 10,
    "followers_count": 1,
    "friends_count": 2,
    "favourites_count": 3,
    "listed_count": 0,
    "default_profile": True,
    "verified": False,
    "created_at": "Wed Oct 10 20:19:24 +0000 2018",
}


def tweet_obj(**kw):
    obj = {"id_str": "1", "user": USER, "created_at": "Mon Jun 01 00:00:00 +0000 2020", "text": "x"}
    obj.update(kw)
    return obj


def test_retweet_wins_over_reply():
    obj = tweet_obj(retweeted_status={"id_str": "9"}, in_reply_to_status_id=5)
    assert ingest.tweet_from_dict(obj).kind == "retweet"


def test_plain_tweet_and_reply():
    assert ingest.tweet_from_dict(tweet_obj()).kind == "tweet"
    assert ingest.tweet_from_dict(tweet_obj(in_reply_to_status_id=5)).kind == "reply"


def test_hashtags_lowercased():
    t = ingest.tweet_from_dict(tweet_obj(entities={"hashtags": [{"text": "COVID19"}]}))
    assert t.hashtags == ("covid19",)


def test_full_text_preferred():
    assert ingest.tweet_from_dict(tweet_obj(full_text="long")).text == "long"


def test_missing_field_is_schema_error():
    obj = tweet_obj()
    del obj["created_at"]
    with pytest.raises(ingest.SchemaError) as exc:
        ingest.tweet_from_dict(obj)
    assert exc.value.field == "created_at"


def test_malformed_json_reports_offset():
    with pytest.raises(ingest.ParseError) as exc:
        ingest.parse_tweet_json('{"id_str": "1", }')
    assert exc.value.offset == 16


def test_time_formats_agree():
    a = ingest.parse_time("Mon Jun 01 00:00:00 +0000 2020")
    assert a == ingest.parse_time("2020-06-01T00:00:00Z") == ingest.parse_time(a.timestamp())
    assert ingest.parse_time(ingest.format_time(a)) == a


def test_timeline_sorted_with_probe_time():
    u = make_user()
    recs = [make_tweet(i, u, T0 + timedelta(hours=h)) for i, h in enumerate([3, 1, 4, 2])]
    tl = ingest.build_timeline(recs)
    assert [t.created_at for t in tl.tweets] == sorted(r.created_at for r in recs)
    assert tl.probe_time == T0 + timedelta(hours=4)


def test_timeline_keeps_newest_3200():
    u = make_user()
    recs = [make_tweet(i, u, T0 + timedelta(minutes=i)) for i in range(3500)]
    tl = ingest.build_timeline(reversed(recs))
    assert len(tl) == 3200
    assert tl.tweets[0].id == "300" and tl.tweets[-1].id == "3499"


def test_empty_timeline_is_error():
    with pytest.raises(ValueError, match="no timeline"):
        ingest.build_timeline([])


def test_mixed_accounts_rejected():
    with pytest.raises(ValueError):
        ingest.build_timeline([make_tweet(1, make_user("1")), make_tweet(2, make_user("2"))])


def test_read_tweets_gzip(tmp_path):
    p = tmp_path / "t.jsonl.gz"
    with gzip.open(p, "wt", encoding="utf-8") as fh:
        fh.write(json.dumps(tweet_obj()) + "\n\n" + json.dumps(tweet_obj(id_str="2")) + "\n")
    assert [t.id for t in ingest.read_tweets(p)] == ["1", "2"]


def test_bad_line_reports_line_number(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text(json.dumps(tweet_obj()) + "\n{oops\n")
    with pytest.raises(ingest.ParseError) as exc:
        ingest.read_tweets(p)
    assert exc.value.lineno == 2


def test_roster_registry_counts(roster_registry_path):
    reg = ingest.load_registry(roster_registry_path)
    assert reg["caverlee"].counts() == {"human": 15211, "bot": 14619}
    assert reg["celebrity"].counts() == {"human": 5814, "bot": 0}
    assert len(reg) == 8


def test_empty_manifest(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text("datasets: []\n")
    assert len(ingest.load_registry(p)) == 0


def test_duplicate_dataset_name(tmp_path):
    (tmp_path / "u.jsonl").write_text(json.dumps(USER) + "\n")
    (tmp_path / "l.csv").write_text("account_id,label\n42,bot\n")
    entry = {"name": "varol", "role": "train", "users_path": "u.jsonl", "labels_path": "l.csv"}
    p = tmp_path / "m.yaml"
    p.write_text(yaml.safe_dump({"datasets": [entry, entry]}))
    with pytest.raises(ingest.RegistryError, match="duplicate"):
        ingest.load_registry(p)


def test_unreadable_dataset_path(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text(yaml.safe_dump({"datasets": [{"name": "x", "role": "train", "users_path": "nope", "labels_path": "nope"}]}))
    with pytest.raises(ingest.RegistryError):
        ingest.load_registry(p)


def test_bad_label(tmp_path):
    (tmp_path / "l.csv").write_text("account_id,label\n42,cyborg\n")
    with pytest.raises(ingest.RegistryError):
        ingest.read_labels(tmp_path / "l.csv")


text_st = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40)


@settings(max_examples=100, deadline=None)
@given(
    screen=st.from_regex(r"[A-Za-z0-9_]{1,15}", fullmatch=True),
    text=text_st,
    tags=st.lists(st.from_regex(r"[a-z0-9_]{1,10}", fullmatch=True), max_size=4),
    kind=st.sampled_from(ingest.KINDS),
    seconds=st.integers(0, 10**9),
    counts=st.tuples(*[st.integers(0, 10**7)] * 5),
    flags=st.tuples(st.booleans(), st.booleans(), st.booleans()),
)
def test_parse_serialize_roundtrip(screen, text, tags, kind, seconds, counts, flags):
    when = ingest.parse_time(seconds)
    user = make_user(
        "7", screen, created_at=when - timedelta(days=3), description=text,
        statuses_count=counts[0], followers_count=counts[1], friends_count=counts[2],
        favourites_count=counts[3], listed_count=counts[4],
        default_profile=flags[0], verified=flags[1], protected=flags[2],
    )
    t = make_tweet("9", user, when, kind, tags, text)
    once = ingest.parse_tweet_json(ingest.serialize_tweet(t))
    assert once == t
    assert ingest.parse_tweet_json(ingest.serialize_tweet(once)) == once
