import math
import shutil

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from botdetect import ingest, synthetic
from botdetect.light_features import train_bigram_model
from botdetect.selection import (
    FEATURE_SET_IDS,
    DatasetFeatures,
    GridRow,
    ModelSpec,
    build_feature_store,
    competition_ranks,
    enumerate_combos,
    final_select,
    grid_specs,
    pooled_matrix,
    rank_and_screen,
    rank_table,
    read_results_log,
    run_grid,
    run_search,
    RankedRow,
)


def brute_combos(profile):
    names = sorted(profile)
    out = []
    for mask in range(1, 2 ** len(names)):
        members = [n for i, n in enumerate(names) if mask >> i & 1]
        if sum(profile[n]["bot"] for n in members) and sum(profile[n]["human"] for n in members):
            out.append(tuple(members))
    return sorted(out, key=lambda c: (len(c), c))


def test_roster_profile_combos():
    assert len(enumerate_combos(synthetic.roster_class_profile())) == 247


def test_roster_registry_combos(roster_registry_path):
    assert len(enumerate_combos(ingest.load_registry(roster_registry_path))) == 247


def test_single_mixed_dataset():
    assert enumerate_combos({"a": {"bot": 1, "human": 1}}) == [("a",)]


def test_only_bot_datasets():
    assert enumerate_combos({"a": {"bot": 3, "human": 0}, "b": {"bot": 1, "human": 0}}) == []


profile_st = st.dictionaries(
    st.from_regex(r"[a-z]{1,4}", fullmatch=True),
    st.fixed_dictionaries({"bot": st.integers(0, 2), "human": st.integers(0, 2)}),
    max_size=10,
)


@settings(max_examples=150, deadline=None)
@given(profile_st)
def test_combos_brute_force(profile):
    assert enumerate_combos(profile) == brute_combos(profile)


def test_grid_arity():
    combos = enumerate_combos(synthetic.roster_class_profile())
    specs = grid_specs(combos, [f"alg{i}" for i in range(8)], FEATURE_SET_IDS)
    assert len(specs) == 9880 == len(set(specs))


@pytest.fixture(scope="module")
def toy(toy_registry_path):
    reg = ingest.load_registry(toy_registry_path)
    bigram = train_bigram_model(e.user.screen_name for d in reg for e in d.entries)
    return reg, build_feature_store(reg, bigram)


def test_toy_grid_rows(toy):
    reg, store = toy
    combos = enumerate_combos({d.name: d.counts() for d in reg.by_role("train")})
    assert combos == [("train_a",), ("train_a", "train_b")]
    specs = grid_specs(combos, ["logistic_regression", "naive_bayes"], ["A"])
    rows = run_grid(specs, store, ["test_x", "test_y"])
    assert len(rows) == 4
    assert sum(len(r.aucs) for r in rows) == 8
    assert all(0.5 < r.aucs[t] <= 1 for r in rows for t in r.aucs)


def test_parallel_matches_serial(toy, tmp_path):
    _, store = toy
    specs = grid_specs([("train_a",), ("train_a", "train_b")], ["logistic_regression", "random_forest"], ["Light", "D"])
    serial = run_grid(specs, store, ["test_x", "test_y"], workers=1, log_path=tmp_path / "s.csv")
    par = run_grid(specs, store, ["test_x", "test_y"], workers=2, log_path=tmp_path / "p.csv")
    assert [(r.spec, r.aucs, r.cv_auc) for r in serial] == [(r.spec, r.aucs, r.cv_auc) for r in par]
    assert (tmp_path / "s.csv").read_bytes() == (tmp_path / "p.csv").read_bytes()


def test_pooled_dedup_and_bot_wins():
    ids = ["u1", "u2"]
    a = DatasetFeatures("a", ids, np.array([0, 0]), np.ones((2, 19)))
    b = DatasetFeatures("b", ["u2", "u3"], np.array([1, 1]), np.zeros((2, 19)))
    keys, X, y = pooled_matrix({"a": a, "b": b}, ("a", "b"), "Light")
    assert keys == ["u1", "u2", "u3"]
    assert y.tolist() == [0, 1, 1]
    assert X.shape == (3, 19)


def row(alg, combo, aucs, cv=0.9, fs="A"):
    return GridRow(ModelSpec(fs, alg, tuple(combo)), dict(aucs), cv)


def test_competition_ranks():
    assert competition_ranks([0.9, 0.8, 0.9, float("nan"), 0.1]) == [1, 3, 1, 5, 4]


def test_best_everywhere_rank_sum():
    tests = [f"t{i}" for i in range(6)]
    rows = [row("lr", ["a"], {t: 0.9 for t in tests}), row("lr", ["b"], {t: 0.8 for t in tests}), row("rf", ["a"], {t: 0.7 for t in tests})]
    screened = rank_and_screen(rows, tests)["A"]
    lr = next(r for r in screened if r.spec.algorithm == "lr")
    assert lr.rank_sum == 6 and lr.spec.training_combo == ("a",)


def test_two_by_two_hand_ranking():
    tests = ["x", "y"]
    rows = [
        row("lr", ["a"], {"x": 0.9, "y": 0.6}),
        row("lr", ["b"], {"x": 0.7, "y": 0.8}),
        row("rf", ["a"], {"x": 0.8, "y": 0.7}),
        row("rf", ["b"], {"x": 0.6, "y": 0.9}),
    ]
    # x ranks: 1,3,2,4 ; y ranks: 4,2,3,1
    table = {(r.spec.algorithm, r.spec.training_combo): r.rank_sum for r in rank_table(rows, tests)["A"]}
    assert table == {("lr", ("a",)): 5, ("lr", ("b",)): 5, ("rf", ("a",)): 5, ("rf", ("b",)): 5}
    screened = rank_and_screen(rows, tests)["A"]
    # all tied: the lexicographically smallest combo wins per algorithm
    assert [(r.spec.algorithm, r.spec.training_combo) for r in screened] == [("lr", ("a",)), ("rf", ("a",))]


def test_tied_specs_share_rank_sum():
    tests = ["x", "y"]
    rows = [row("lr", ["b"], {"x": 0.8, "y": 0.8}), row("lr", ["a", "b"], {"x": 0.8, "y": 0.8})]
    ranked = rank_table(rows, tests)["A"]
    assert ranked[0].rank_sum == ranked[1].rank_sum == 2
    assert rank_and_screen(rows, tests)["A"][0].spec.training_combo == ("a", "b")


def test_nan_auc_ranks_last():
    tests = ["x"]
    rows = [row("lr", ["a"], {"x": float("nan")}), row("lr", ["b"], {"x": 0.1})]
    assert rank_and_screen(rows, tests)["A"][0].spec.training_combo == ("b",)


def cand(alg, mean, cv):
    return RankedRow(ModelSpec("A", alg, ("a",)), {"x": mean}, {"x": 1}, 1, cv)


def test_final_select_single():
    c = cand("lr", 0.9, 0.8)
    assert final_select([c]) is c


def test_final_select_prefers_cv_when_close():
    a, b = cand("lr", 0.90, 0.80), cand("rf", 0.89, 0.90)
    assert final_select([a, b]) is b


def test_final_select_keeps_best_when_gap_large():
    a, b = cand("lr", 0.90, 0.80), cand("rf", 0.80, 0.95)
    assert final_select([a, b]) is a


def test_final_select_boundaries_inclusive():
    a, b = cand("lr", 0.90, 0.80), cand("rf", 0.88, 0.88)
    assert final_select([a, b]) is b


def test_final_select_empty():
    with pytest.raises(ValueError):
        final_select([])


def test_failed_rows_excluded(toy, tmp_path):
    _, store = toy
    # train_b alone has no humans: the fit fails and the row is dropped from the log
    specs = [ModelSpec("A", "logistic_regression", ("train_b",)), ModelSpec("A", "logistic_regression", ("train_a",))]
    rows = run_grid(specs, store, ["test_x"], log_path=tmp_path / "log.csv")
    assert rows[1].error and "degenerate" in rows[1].error
    assert len(read_results_log(tmp_path / "log.csv", ["test_x"])) == 1
    assert list(rank_and_screen(rows, ["test_x"])["A"][0].spec.training_combo) == ["train_a"]


def test_resume_is_identical(toy_registry_path, tmp_path):
    reg = ingest.load_registry(toy_registry_path)
    bigram = train_bigram_model(e.user.screen_name for d in reg for e in d.entries)
    kw = dict(algorithms=("logistic_regression", "naive_bayes"), feature_sets=("Light", "B"), seed=5)
    run_search(reg, bigram, out_dir=tmp_path / "full", **kw)
    full = tmp_path / "full"
    lines = (full / "results_log.csv").read_text().splitlines(keepends=True)
    part = tmp_path / "part"
    part.mkdir()
    # interrupted mid-way: some complete rows, one half spec, one torn record
    (part / "results_log.csv").write_text("".join(lines[:6]) + lines[6][:9])
    run_search(reg, bigram, out_dir=part, **kw)
    for name in ("results_log.csv", "selection_report.json"):
        assert (part / name).read_bytes() == (full / name).read_bytes()
