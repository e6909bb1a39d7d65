"""Data-selection search over training-set combinations.

Every class-valid combination of training datasets is crossed with each
algorithm and feature set; each model is scored by AUC on every test set,
ranked per test set within its feature-set group, and screened by rank sum.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import classify
from .dna import FEATURE_SETS as DNA_SETS
from .dna import compress_stats, dna_feature_vector, encode_timeline
from .evaluation import auc, best_f1_threshold, kfold_cv, stratified_folds
from .light_features import light_matrix

log = logging.getLogger(__name__)

FEATURE_SET_IDS = ("Light", "A", "B", "C", "D")
LOG_HEADER = ("feature_set", "algorithm", "combo", "test_set", "auc", "cv_auc")


@dataclass(frozen=True, order=True)
class ModelSpec:
    feature_set_id: str
    algorithm: str
    training_combo: tuple

    def __post_init__(self):
        if not self.training_combo:
            raise ValueError("training combo must be non-empty")

    @property
    def combo_id(self) -> str:
        return "+".join(self.training_combo)


# -- features -------------------------------------------------------------------


@dataclass
class DatasetFeatures:
    name: str
    ids: list
    labels: np.ndarray  # 1 = bot
    light: np.ndarray
    dna_ids: list = field(default_factory=list)
    dna_labels: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    dna_stats: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))

    def matrix(self, feature_set_id: str):
        if feature_set_id == "Light":
            return self.ids, self.light, self.labels
        cols = [("original_size", "compressed_size", "ratio").index(c) for c in DNA_SETS[feature_set_id]]
        return self.dna_ids, self.dna_stats[:, cols], self.dna_labels


def _probe_time(entry, dataset):
    if entry.timeline is not None:
        return entry.timeline.probe_time
    if dataset.collected_at is not None:
        return dataset.collected_at
    raise ValueError(
        f"dataset {dataset.name}: account {entry.user.id} has no timeline and the manifest "
        "declares no collected_at timestamp"
    )


def dataset_features(dataset, bigram) -> DatasetFeatures:
    entries = dataset.entries
    ids = [e.user.id for e in entries]
    labels = np.array([e.label == "bot" for e in entries], dtype=np.int64)
    light = light_matrix([e.user for e in entries], [_probe_time(e, dataset) for e in entries], bigram)
    dna_ids, dna_labels, stats = [], [], []
    for e in entries:
        # protected or timeline-less accounts carry no DNA
        if e.user.protected or e.timeline is None or not e.timeline.tweets:
            continue
        cs = compress_stats(encode_timeline(e.timeline))
        dna_ids.append(e.user.id)
        dna_labels.append(e.label == "bot")
        stats.append(dna_feature_vector(cs, "D"))
    return DatasetFeatures(
        name=dataset.name,
        ids=ids,
        labels=labels,
        light=light.reshape(-1, 19),
        dna_ids=dna_ids,
        dna_labels=np.array(dna_labels, dtype=np.int64),
        dna_stats=np.array(stats, dtype=np.float64).reshape(-1, 3),
    )


def build_feature_store(registry, bigram) -> dict:
    return {ds.name: dataset_features(ds, bigram) for ds in registry}


def pooled_matrix(store: dict, names, feature_set_id: str):
    """Pool datasets, keeping each account id once; a bot label wins conflicts."""
    rows: dict = {}
    for name in names:
        ids, X, y = store[name].matrix(feature_set_id)
        for i, account_id in enumerate(ids):
            prev = rows.get(account_id)
            if prev is None:
                rows[account_id] = (X[i], int(y[i]))
            elif prev[1] != y[i]:
                log.warning("account %s labeled inconsistently across %s; keeping bot", account_id, names)
                rows[account_id] = (prev[0], 1)
    if not rows:
        return [], np.empty((0, 0)), np.empty(0, dtype=np.int64)
    keys = list(rows)
    X = np.vstack([rows[k][0] for k in keys])
    y = np.array([rows[k][1] for k in keys], dtype=np.int64)
    return keys, X, y


# -- combinations ---------------------------------------------------------------


def enumerate_combos(class_profile) -> list:
    """All non-empty subsets whose union holds both classes.

    ``class_profile`` maps dataset name -> {"bot": n, "human": n}, or is a
    registry of datasets (``counts()`` is used).
    """
    if hasattr(class_profile, "counts") and callable(class_profile.counts):
        class_profile = class_profile.counts()
    names = sorted(class_profile)
    has_bot = {n: class_profile[n].get("bot", 0) > 0 for n in names}
    has_human = {n: class_profile[n].get("human", 0) > 0 for n in names}
    out = []
    for r in range(1, len(names) + 1):
        for combo in itertools.combinations(names, r):
            if any(has_bot[n] for n in combo) and any(has_human[n] for n in combo):
                out.append(combo)
    return out


def grid_specs(combos, algorithms, feature_sets=FEATURE_SET_IDS) -> list:
    return [
        ModelSpec(fs, alg, tuple(combo))
        for fs in feature_sets
        for alg in algorithms
        for combo in combos
    ]


# -- grid -----------------------------------------------------------------------


@dataclass
class GridRow:
    spec: ModelSpec
    aucs: dict
    cv_auc: float
    error: Optional[str] = None


_STORE: dict = {}


def _init_worker(store):
    global _STORE
    _STORE = store


def _safe_auc(scores, labels) -> float:
    try:
        return auc(scores, labels)
    except ValueError:
        return float("nan")


def evaluate_spec(spec: ModelSpec, test_sets, seed: int = 0, cv_folds: int = 5, store=None) -> GridRow:
    store = _STORE if store is None else store
    try:
        _, X, y = pooled_matrix(store, spec.training_combo, spec.feature_set_id)
        cspec = classify.make_spec(spec.algorithm, spec.feature_set_id, seed=seed)
        model = classify.fit(cspec, X, y, spec.feature_set_id, spec.combo_id)
        aucs = {}
        for t in test_sets:
            _, Xt, yt = store[t].matrix(spec.feature_set_id)
            aucs[t] = _safe_auc(classify.score(model, Xt), yt) if len(yt) else float("nan")
        try:
            cv = kfold_cv(X, y, cspec, k=cv_folds, seed=seed)
        except ValueError as exc:
            log.warning("%s: no cross-validation (%s)", spec, exc)
            cv = float("nan")
        return GridRow(spec, aucs, cv)
    except Exception as exc:  # recorded per row, excluded from ranking
        return GridRow(spec, {}, float("nan"), error=f"{type(exc).__name__}: {exc}")


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def _log_lines(row: GridRow, test_sets):
    for t in test_sets:
        yield [row.spec.feature_set_id, row.spec.algorithm, row.spec.combo_id, t, _fmt(row.aucs[t]), _fmt(row.cv_auc)]


def read_results_log(path, test_sets) -> dict:
    """Completed rows of a (possibly interrupted) results log, keyed by ModelSpec."""
    partial: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return {}
        if tuple(header) != LOG_HEADER:
            raise ValueError(f"{path}: unexpected results-log header {header}")
        for rec in reader:
            if len(rec) != len(LOG_HEADER):
                continue  # torn final line
            fs, alg, combo, t, a, cv = rec
            spec = ModelSpec(fs, alg, tuple(combo.split("+")))
            aucs, _ = partial.setdefault(spec, ({}, float(cv)))
            aucs[t] = float(a)
    return {
        spec: GridRow(spec, aucs, cv)
        for spec, (aucs, cv) in partial.items()
        if all(t in aucs for t in test_sets)
    }


def _canonical_key(row: GridRow, order):
    s = row.spec
    return (order["fs"].get(s.feature_set_id, 99), order["alg"].get(s.algorithm, 99), s.training_combo)


def run_grid(specs, store: dict, test_sets, seed: int = 0, workers: int = 1, log_path=None, cv_folds: int = 5) -> list:
    """Fit and score every spec; returns rows in canonical order.

    With ``log_path`` each completed spec is appended as it finishes, rows
    already in the log are reused, and the log is rewritten in canonical
    order at the end.
    """
    test_sets = list(test_sets)
    done: dict = {}
    if log_path is not None and Path(log_path).is_file():
        done = read_results_log(log_path, test_sets)
        if done:
            log.info("resuming: %d specs already in %s", len(done), log_path)
    todo = [s for s in specs if s not in done]
    rows = [done[s] for s in specs if s in done]

    fh = None
    if log_path is not None:
        # drop torn or partial records before appending
        write_results_log(rows, test_sets, log_path)
        fh = open(log_path, "a", newline="", encoding="utf-8")
        writer = csv.writer(fh, lineterminator="\n")
    try:

        def record(row):
            rows.append(row)
            if row.error:
                log.warning("fit failed for %s: %s", row.spec, row.error)
            elif fh is not None:
                writer.writerows(_log_lines(row, test_sets))
                fh.flush()

        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(store,)) as pool:
                futures = [pool.submit(evaluate_spec, s, test_sets, seed, cv_folds) for s in todo]
                for fut in futures:
                    record(fut.result())
        else:
            for s in todo:
                record(evaluate_spec(s, test_sets, seed, cv_folds, store=store))
    finally:
        if fh is not None:
            fh.close()

    order = {
        "fs": {f: i for i, f in enumerate(FEATURE_SET_IDS)},
        "alg": {a: i for i, a in enumerate(classify.ALGORITHMS)},
    }
    rows.sort(key=lambda r: _canonical_key(r, order))
    if log_path is not None:
        write_results_log(rows, test_sets, log_path)
    return rows


def write_results_log(rows, test_sets, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for r in rows:
            if not r.error:
                w.writerows(_log_lines(r, test_sets))
    tmp.replace(path)


# -- ranking --------------------------------------------------------------------


@dataclass
class RankedRow:
    spec: ModelSpec
    aucs: dict
    ranks: dict
    rank_sum: int
    cv_auc: float

    @property
    def mean_test_auc(self) -> float:
        vals = [v for v in self.aucs.values() if not math.isnan(v)]
        return float(np.mean(vals)) if vals else float("nan")


def competition_ranks(values) -> list:
    """Rank 1 = largest; ties share the minimum rank; NaN ranks after every number."""
    vals = [(-math.inf if math.isnan(v) else v) for v in values]
    return [1 + sum(1 for w in vals if w > v) for v in vals]


def rank_table(rows, test_sets) -> dict:
    """Per feature-set group, rank every successful row on each test set."""
    groups: dict = {}
    for r in rows:
        if r.error:
            continue
        groups.setdefault(r.spec.feature_set_id, []).append(r)
    out = {}
    for fs, group in groups.items():
        ranks = {t: competition_ranks([r.aucs[t] for r in group]) for t in test_sets}
        out[fs] = [
            RankedRow(
                spec=r.spec,
                aucs={t: r.aucs[t] for t in test_sets},
                ranks={t: ranks[t][i] for t in test_sets},
                rank_sum=sum(ranks[t][i] for t in test_sets),
                cv_auc=r.cv_auc,
            )
            for i, r in enumerate(group)
        ]
    return out


def rank_and_screen(rows, test_sets) -> dict:
    """Lowest-rank-sum spec per algorithm in each feature-set group."""
    out = {}
    for fs, ranked in rank_table(rows, test_sets).items():
        best: dict = {}
        for r in ranked:
            cur = best.get(r.spec.algorithm)
            if cur is None or (r.rank_sum, r.spec.training_combo) < (cur.rank_sum, cur.spec.training_combo):
                best[r.spec.algorithm] = r
        out[fs] = sorted(best.values(), key=lambda r: (r.rank_sum, r.spec.algorithm))
    return out


def _nan_low(x: float) -> float:
    return -math.inf if math.isnan(x) else x


def final_select(candidates, delta: float = 0.02, cv_gap: float = 0.08, eps: float = 1e-12) -> RankedRow:
    """Best mean test AUC, unless a near-equal candidate has a much better CV AUC."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to select from")

    def ident(r):
        return (r.spec.algorithm, r.spec.training_combo)

    best = min(candidates, key=lambda r: (-_nan_low(r.mean_test_auc), -_nan_low(r.cv_auc), ident(r)))
    qualifiers = [
        r
        for r in candidates
        if r is not best
        and _nan_low(r.mean_test_auc) >= _nan_low(best.mean_test_auc) - delta - eps
        and _nan_low(r.cv_auc) >= _nan_low(best.cv_auc) + cv_gap - eps
    ]
    if not qualifiers:
        return best
    return min(qualifiers, key=lambda r: (-_nan_low(r.cv_auc), -_nan_low(r.mean_test_auc), ident(r)))


# -- reports ------------------------------------------------------------------------


def _num(x: float):
    return None if math.isnan(x) else float(x)


def ranked_to_dict(r: RankedRow) -> dict:
    return {
        "algorithm": r.spec.algorithm,
        "training_combo": list(r.spec.training_combo),
        "test_auc": {t: _num(v) for t, v in r.aucs.items()},
        "ranks": dict(r.ranks),
        "rank_sum": r.rank_sum,
        "mean_test_auc": _num(r.mean_test_auc),
        "cv_auc": _num(r.cv_auc),
    }


def selection_report(screened: dict, winners: dict, meta: Optional[dict] = None) -> dict:
    return {
        "meta": meta or {},
        "feature_sets": {
            fs: {
                "winner": ranked_to_dict(winners[fs]),
                "candidates": [ranked_to_dict(r) for r in screened[fs]],
            }
            for fs in sorted(screened, key=lambda f: FEATURE_SET_IDS.index(f) if f in FEATURE_SET_IDS else 99)
        },
    }


def write_json(obj, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    tmp.replace(path)


def out_of_fold_scores(X, y, cspec, k: int = 5, seed: int = 0) -> np.ndarray:
    folds = stratified_folds(y, k, seed)
    out = np.empty(len(y))
    for f in range(k):
        test = folds == f
        m = classify.fit(cspec, X[~test], y[~test])
        out[test] = classify.score(m, X[test])
    return out


@dataclass
class SearchResult:
    rows: list
    screened: dict
    winners: dict
    report: dict
    models: dict


def run_search(
    registry,
    bigram,
    algorithms=classify.REQUIRED_ALGORITHMS,
    feature_sets=FEATURE_SET_IDS,
    seed: int = 0,
    workers: int = 1,
    out_dir=None,
    delta: float = 0.02,
    cv_gap: float = 0.08,
    threshold_mode="f1_max",
    cv_folds: int = 5,
) -> SearchResult:
    """Full search: combos, grid, rank-sum screening, final rule, winner models.

    ``threshold_mode`` is ``"f1_max"`` (out-of-fold F1-maximising threshold on
    the winner's training pool) or a fixed float.
    """
    train = registry.by_role("train")
    tests = [d.name for d in registry.by_role("test")]
    if not train:
        raise ValueError("registry has no training datasets")
    if not tests:
        raise ValueError("registry has no test datasets")
    combos = enumerate_combos({d.name: d.counts() for d in train})
    if not combos:
        raise ValueError("no training combination contains both bot and human accounts")
    store = build_feature_store(registry, bigram)
    specs = grid_specs(combos, algorithms, feature_sets)
    log.info("%d combos x %d algorithms x %d feature sets = %d specs", len(combos), len(algorithms), len(feature_sets), len(specs))

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "results_log.csv" if out_dir else None
    rows = run_grid(specs, store, tests, seed=seed, workers=workers, log_path=log_path, cv_folds=cv_folds)
    failures = sum(1 for r in rows if r.error)

    screened = rank_and_screen(rows, tests)
    winners = {fs: final_select(c, delta, cv_gap) for fs, c in screened.items()}
    models = {}
    for fs, w in winners.items():
        _, X, y = pooled_matrix(store, w.spec.training_combo, fs)
        cspec = classify.make_spec(w.spec.algorithm, fs, seed=seed)
        model = classify.fit(cspec, X, y, fs, w.spec.combo_id, bigram=bigram if fs == "Light" else None)
        if threshold_mode == "f1_max":
            thr = best_f1_threshold(out_of_fold_scores(X, y, cspec, cv_folds, seed), y)
        else:
            thr = float(threshold_mode)
        models[fs] = model.with_threshold(thr)

    meta = {
        "seed": seed,
        "algorithms": list(algorithms),
        "feature_sets": list(feature_sets),
        "train_sets": [d.name for d in train],
        "test_sets": tests,
        "n_combos": len(combos),
        "n_specs": len(specs),
        "failures": failures,
        "delta": delta,
        "cv_gap": cv_gap,
        "thresholds": {fs: m.threshold for fs, m in models.items()},
    }
    report = selection_report(screened, winners, meta)
    if out_dir is not None:
        write_json(report, out_dir / "selection_report.json")
        for fs, m in models.items():
            classify.save_model(m, out_dir / f"model_{fs}.bin")
    return SearchResult(rows, screened, winners, report, models)


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1) - 1)
