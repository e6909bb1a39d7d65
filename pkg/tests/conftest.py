from datetime import datetime, timedelta, timezone

import pytest

from botdetect import kernels, synthetic
from botdetect.ingest import UserObject, TweetRecord

T0 = datetime(2020, 6, 1, tzinfo=timezone.utc)


@pytest.fixture(scope="session", params=kernels.available_backends())
def backend(request):
    return request.param


def make_user(uid="1", screen_name="alice", created_at=T0 - timedelta(hours=48), **kw):
    base = dict(
        id=uid,
        screen_name=screen_name,
        name=screen_name.title(),
        description="",
        statuses_count=0,
        followers_count=0,
        friends_count=0,
        favourites_count=0,
        listed_count=0,
        default_profile=False,
        verified=False,
        created_at=created_at,
    )
    base.update(kw)
    return UserObject(**base)


def make_tweet(tid, user, created_at=T0, kind="tweet", hashtags=(), text="hello", lang="en"):
    return TweetRecord(str(tid), user, created_at, text, tuple(hashtags), kind, lang)


@pytest.fixture(scope="session")
def toy_registry_path(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    return synthetic.write_registry(root, synthetic.toy_profile(), seed=3)


@pytest.fixture(scope="session")
def roster_registry_path(tmp_path_factory):
    """Users + labels with the training roster's exact class counts (no timelines)."""
    root = tmp_path_factory.mktemp("roster")
    profile = {n: ("train", h, b) for n, (h, b) in synthetic.ROSTER_TRAIN_PROFILE.items()}
    return synthetic.write_registry(root, profile, seed=0, timelines=False)
