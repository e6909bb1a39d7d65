"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from . import classify, ingest, plots
from .casestudy import TopicSpec, build_case_report, compare_score_distributions
from .dna import compress_stats, encode_timeline
from .evaluation import best_f1_threshold, confusion_metrics, reports_to_csv_rows, reports_to_json
from .light_features import FEATURE_NAMES, BigramModel, light_matrix, train_bigram_model
from .selection import FEATURE_SET_IDS, dataset_features, run_search, write_json
from .sentiment import SentimentRules, load_hashtag_lexicon, load_lexicon, sample_lexicon

log = logging.getLogger("botdetect")

PATH_KEYS = ("manifest", "bigram", "lexicon", "hashtag_lexicon", "rules", "model")
ENV_PREFIX = "BOTDETECT_"


class UsageError(Exception):
    """Bad arguments or unreadable/invalid input; exit code 2."""


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    out: Path = Path("out")
    paths: dict = field(default_factory=dict)
    delta: float = 0.02
    cv_gap: float = 0.08
    threshold: object = "f1_max"  # "f1_max" or a float
    algorithms: tuple = classify.REQUIRED_ALGORITHMS
    feature_sets: tuple = FEATURE_SET_IDS
    cv_folds: int = 5
    casestudy: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.delta < 0 or self.cv_gap < 0:
            raise UsageError("selection delta and cv_gap must be non-negative")
        if self.threshold != "f1_max":
            try:
                t = float(self.threshold)
            except (TypeError, ValueError):
                raise UsageError(f"threshold must be 'f1_max' or a number, got {self.threshold!r}") from None
            if not 0.0 <= t <= 1.0:
                raise UsageError("fixed threshold must lie in [0, 1]")
            self.threshold = t
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        bad = set(self.algorithms) - set(classify.ALGORITHMS)
        if bad:
            raise UsageError(f"unknown algorithms: {sorted(bad)}")
        bad = set(self.feature_sets) - set(FEATURE_SET_IDS)
        if bad:
            raise UsageError(f"unknown feature sets: {sorted(bad)}")
        return self

    def path(self, key: str, required: bool = True) -> Optional[Path]:
        p = self.paths.get(key)
        if p is None and required:
            raise UsageError(f"no {key} path given (flag, config paths.{key} or {ENV_PREFIX}{key.upper()})")
        return Path(p) if p is not None else None


def load_config(path: Optional[str]) -> RunConfig:
    doc: dict = {}
    base = Path(".")
    if path:
        try:
            doc = yaml.safe_load(Path(path).read_text("utf-8")) or {}
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise UsageError(f"malformed config {path}: {exc}") from exc
        base = Path(path).parent
    sel = doc.get("selection") or {}
    paths = {}
    for k, v in (doc.get("paths") or {}).items():
        paths[k] = str(v if Path(v).is_absolute() else base / v)
    for k in PATH_KEYS:
        env = os.environ.get(ENV_PREFIX + k.upper())
        if env:
            paths[k] = env
    out = doc.get("out")
    cfg = RunConfig(
        seed=int(doc.get("seed", 0)),
        workers=int(doc.get("workers", 1)),
        out=Path(os.environ.get(ENV_PREFIX + "OUT") or (base / out if out else "out")),
        paths=paths,
        delta=float(sel.get("delta", 0.02)),
        cv_gap=float(sel.get("cv_gap", 0.08)),
        threshold=doc.get("threshold", "f1_max"),
        algorithms=tuple(sel.get("algorithms", classify.REQUIRED_ALGORITHMS)),
        feature_sets=tuple(sel.get("feature_sets", FEATURE_SET_IDS)),
        cv_folds=int(sel.get("cv_folds", 5)),
        casestudy=doc.get("casestudy") or {},
    )
    return cfg


# -- helpers ---------------------------------------------------------------------


def _registry(cfg):
    return ingest.load_registry(cfg.path("manifest"))


def _bigram(cfg, registry=None) -> BigramModel:
    p = cfg.path("bigram", required=registry is None)
    if p is not None:
        try:
            return BigramModel.load(p)
        except OSError as exc:
            raise UsageError(f"cannot read bigram model {p}: {exc}") from exc
    log.warning("no bigram model configured; training one on the registry's screen names")
    return train_bigram_model(e.user.screen_name for ds in registry for e in ds.entries)


def _model(cfg) -> classify.FittedModel:
    p = cfg.path("model")
    try:
        return classify.load_model(p)
    except OSError as exc:
        raise UsageError(f"cannot read model {p}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_csv(path: Path, rows) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    tmp.replace(path)


def _select_datasets(registry, names, role="test"):
    if names:
        missing = [n for n in names if n not in registry.datasets]
        if missing:
            raise UsageError(f"unknown datasets: {missing}")
        return [registry[n] for n in names]
    return registry.by_role(role)


def _model_inputs(model, dataset, bigram=None):
    feats = dataset_features(dataset, bigram or model.bigram or _fallback_bigram(dataset))
    fs = model.feature_set_id or "Light"
    _, X, y = feats.matrix(fs)
    return X, y


def _fallback_bigram(dataset):
    return train_bigram_model(e.user.screen_name for e in dataset.entries)


# -- commands ----------------------------------------------------------------------


def cmd_bigram_train(cfg, args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_file():
        raise UsageError(f"corpus not found: {corpus}")
    with ingest.open_text(corpus) as fh:
        names = [line.strip() for line in fh if line.strip()]
    try:
        model = train_bigram_model(names, alpha=args.alpha)
    except ValueError as exc:
        raise UsageError(f"{corpus}: {exc}") from exc
    out = Path(args.model_out) if args.model_out else cfg.out / "bigram.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    print(f"names read: {len(names)}, dropped: {model.dropped}, bigrams: {model.probabilities.size} -> {out}")
    return 0


def cmd_features(cfg, args) -> int:
    registry = _registry(cfg)
    bigram = _bigram(cfg, registry)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for ds in _select_datasets(registry, args.datasets, role=None) if args.datasets else registry:
        probes = []
        for e in ds.entries:
            if e.timeline is not None:
                probes.append(e.timeline.probe_time)
            elif ds.collected_at is not None:
                probes.append(ds.collected_at)
            else:
                raise UsageError(f"dataset {ds.name}: account {e.user.id} has no probe time")
        X = light_matrix([e.user for e in ds.entries], probes, bigram)
        rows = [["account_id", "label", *FEATURE_NAMES]]
        rows += [[e.user.id, e.label, *map(repr, x.tolist())] for e, x in zip(ds.entries, X)]
        path = cfg.out / f"features_{ds.name}.csv"
        _write_csv(path, rows)
        print(f"{ds.name}: {len(ds.entries)} accounts -> {path}")
    return 0


DNA_COLUMNS = ("account_id", "label", "original_size", "compressed_size", "ratio")


def cmd_dna(cfg, args) -> int:
    registry = _registry(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for ds in _select_datasets(registry, args.datasets, role=None) if args.datasets else registry:
        rows = []
        for e in ds.entries:
            if e.user.protected or e.timeline is None:
                continue
            st = compress_stats(encode_timeline(e.timeline))
            rows.append({
                "account_id": e.user.id,
                "label": e.label,
                "original_size": st.original_size,
                "compressed_size": st.compressed_size,
                "ratio": st.ratio,
            })
        path = cfg.out / f"dna_{ds.name}.csv"
        _write_csv(path, [list(DNA_COLUMNS)] + [[r[c] for c in DNA_COLUMNS] for r in rows])
        svg = cfg.out / f"dna_{ds.name}.svg"
        plots.scatter(rows, args.x, args.y, svg, title=ds.name)
        print(f"{ds.name}: {len(rows)} DNA sequences -> {path}, {svg}")
    return 0


def cmd_search(cfg, args) -> int:
    registry = _registry(cfg)
    bigram = _bigram(cfg, registry)
    try:
        result = run_search(
            registry,
            bigram,
            algorithms=cfg.algorithms,
            feature_sets=cfg.feature_sets,
            seed=cfg.seed,
            workers=cfg.workers,
            out_dir=cfg.out,
            delta=cfg.delta,
            cv_gap=cfg.cv_gap,
            threshold_mode=cfg.threshold,
            cv_folds=cfg.cv_folds,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    failures = result.report["meta"]["failures"]
    for fs, w in result.winners.items():
        print(f"{fs}: {w.spec.algorithm} on {w.spec.combo_id} (rank sum {w.rank_sum}, cv {w.cv_auc:.3f})")
    if failures:
        print(f"warning: {failures} model fits failed; see log", file=sys.stderr)
    return 0


def cmd_evaluate(cfg, args) -> int:
    model = _model(cfg)
    registry = _registry(cfg)
    if args.threshold is not None:
        thr = args.threshold
    elif cfg.threshold != "f1_max":
        thr = float(cfg.threshold)
    elif model.threshold is not None:
        thr = model.threshold
    else:
        raise UsageError("model carries no threshold; pass --threshold or run 'threshold --write'")
    rows = []
    model_id = f"{model.feature_set_id}:{model.spec.algorithm}:{model.training_combo_id}"
    for ds in _select_datasets(registry, args.datasets):
        X, y = _model_inputs(model, ds)
        rows.append((ds.name, model_id, confusion_metrics(classify.score(model, X), y, thr)))
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.out / "metrics.csv", reports_to_csv_rows(rows))
    (cfg.out / "metrics.json").write_text(reports_to_json(rows) + "\n", encoding="utf-8")
    for d, _, r in rows:
        print(f"{d}: auc={r.auc:.3f} f1={r.f1:.3f} acc={r.accuracy:.3f} rec={r.recall:.3f} "
              f"prec={r.precision:.3f} spec={r.specificity:.3f} @ {r.threshold:.4f}")
    return 0


def cmd_threshold(cfg, args) -> int:
    model = _model(cfg)
    registry = _registry(cfg)
    scores, labels = [], []
    for ds in _select_datasets(registry, args.datasets):
        X, y = _model_inputs(model, ds)
        scores.extend(classify.score(model, X).tolist())
        labels.extend(y.tolist())
    try:
        thr = best_f1_threshold(scores, labels)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    r = confusion_metrics(scores, labels, thr)
    print(f"threshold={thr!r} f1={r.f1:.4f}")
    if args.write:
        classify.save_model(model.with_threshold(thr), cfg.path("model"))
    return 0


def _topics(cfg, args) -> list:
    if args.topic:
        seeds = [s for s in (args.seeds or "").split(",") if s]
        if not seeds:
            raise UsageError("--topic needs --seeds")
        return [TopicSpec(args.topic, tuple(seeds), args.match_mode)]
    topics = cfg.casestudy.get("topics") or []
    if not topics:
        raise UsageError("no topics: pass --topic/--seeds or set casestudy.topics in the config")
    try:
        return [TopicSpec.from_dict(t) for t in topics]
    except (KeyError, ValueError) as exc:
        raise UsageError(f"invalid topic spec: {exc}") from exc


def cmd_casestudy(cfg, args) -> int:
    model = _model(cfg)
    if model.feature_set_id != "Light" or model.bigram is None:
        raise UsageError("case studies need a Light-feature model (from 'search')")
    thr = args.threshold if args.threshold is not None else (
        float(cfg.threshold) if cfg.threshold != "f1_max" else model.threshold
    )
    if thr is None:
        raise UsageError("model carries no threshold; pass --threshold")
    tweet_paths = args.tweets or cfg.casestudy.get("tweets") or []
    if not tweet_paths:
        raise UsageError("no tweet files given")
    tweets = []
    for p in tweet_paths:
        if not Path(p).is_file():
            raise UsageError(f"tweet file not found: {p}")
        tweets.extend(ingest.read_tweets(p))
    lex_path = cfg.path("lexicon", required=False)
    lexicon = load_lexicon(lex_path) if lex_path else sample_lexicon()
    rules = SentimentRules.load(cfg.path("rules", required=False))
    ht_path = cfg.path("hashtag_lexicon", required=False)
    hashtag_lexicon = load_hashtag_lexicon(ht_path) if ht_path else None

    cfg.out.mkdir(parents=True, exist_ok=True)
    samples = {}
    for topic in _topics(cfg, args):
        report = build_case_report(
            tweets,
            topic,
            model,
            thr,
            lexicon=lexicon,
            rules=rules,
            hashtag_lexicon=hashtag_lexicon,
            top_n=int(cfg.casestudy.get("top_n", 20)),
            exclude_seed_hashtags=bool(cfg.casestudy.get("exclude_seed_hashtags", False)),
            english_only=bool(cfg.casestudy.get("english_only", True)),
        )
        stem = cfg.out / f"case_{topic.name}"
        write_json(report.to_dict(), stem.with_suffix(".json"))
        if report.tweet_count:
            _case_figures(report, stem)
            samples[topic.name] = list(report.score_samples["bot"]) + list(report.score_samples["human"])
        print(f"{topic.name}: {report.tweet_count} tweets matched, {report.account_count} accounts, "
              f"bots {report.bot_fraction_accounts:.2%} of accounts / {report.bot_fraction_tweets:.2%} of tweets")
    if len(samples) > 1:
        write_json(compare_score_distributions(samples), cfg.out / "score_distribution_tests.json")
    return 0


def _case_figures(report, stem: Path) -> None:
    name = report.topic.name
    plots.score_histogram(report.score_samples, report.score_histograms["edges"],
                          f"{stem}_scores.svg", title=name, threshold=report.threshold)
    plots.proportion_bars(
        {
            "accounts": {"bot": report.bot_fraction_accounts, "human": 1 - report.bot_fraction_accounts},
            "tweets": {"bot": report.bot_fraction_tweets, "human": 1 - report.bot_fraction_tweets},
        },
        f"{stem}_proportions.svg",
        title=name,
    )
    for source, per_class in report.sentiment.items():
        plots.proportion_bars(per_class, f"{stem}_sentiment_{source}.svg", title=f"{name} ({source})")
    for cls, ranked in report.top_hashtags.items():
        if ranked:
            plots.hashtag_bars(ranked, f"{stem}_hashtags_{cls}.svg", title=f"{name}: {cls}",
                               color=plots.COLORS[cls])


def cmd_plot(cfg, args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise UsageError(f"input not found: {src}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    if args.kind == "scatter":
        with open(src, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        out = cfg.out / f"{src.stem}_{args.x}_{args.y}.svg"
        plots.scatter(rows, args.x, args.y, out, title=src.stem)
    else:
        doc = json.loads(src.read_text("utf-8"))
        h = doc.get("score_histograms") or {}
        if not h:
            raise UsageError(f"{src}: report has no score histograms")
        edges = h["edges"]
        centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
        samples = {k: [c for c, n in zip(centers, h[k]) for _ in range(n)] for k in ("bot", "human")}
        out = cfg.out / f"{src.stem}_scores.svg"
        plots.score_histogram(samples, edges, out, title=doc["topic"]["name"], threshold=doc.get("threshold"))
    print(f"-> {out}")
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="botdetect", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bigram-train", help="train the screen-name bigram model")
    s.add_argument("corpus", help="one screen name per line")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--model-out")

    for name, helptext in (("features", "write Light feature CSVs"), ("dna", "write DNA statistics CSV + scatterplot")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--manifest")
        s.add_argument("--bigram")
        s.add_argument("--datasets", nargs="*")
        if name == "dna":
            s.add_argument("--x", default="original_size", choices=DNA_COLUMNS[2:])
            s.add_argument("--y", default="ratio", choices=DNA_COLUMNS[2:])

    s = sub.add_parser("search", help="data-selection grid search")
    s.add_argument("--manifest")
    s.add_argument("--bigram")
    s.add_argument("--algorithms", nargs="+", choices=classify.ALGORITHMS)
    s.add_argument("--feature-sets", nargs="+", choices=FEATURE_SET_IDS)
    s.add_argument("--delta", type=float)
    s.add_argument("--cv-gap", type=float)

    for name in ("evaluate", "threshold"):
        s = sub.add_parser(name, help="metric report" if name == "evaluate" else "F1-maximising threshold")
        s.add_argument("--model")
        s.add_argument("--manifest")
        s.add_argument("--datasets", nargs="*")
        if name == "evaluate":
            s.add_argument("--threshold", type=float)
        else:
            s.add_argument("--write", action="store_true", help="store the threshold in the model file")

    s = sub.add_parser("casestudy", help="topic bot-presence and sentiment report")
    s.add_argument("--model")
    s.add_argument("--tweets", nargs="+")
    s.add_argument("--topic")
    s.add_argument("--seeds", help="comma-separated seed hashtags")
    s.add_argument("--match-mode", default="prefix", choices=("prefix", "substring"))
    s.add_argument("--threshold", type=float)
    s.add_argument("--lexicon")
    s.add_argument("--hashtag-lexicon")
    s.add_argument("--rules")

    s = sub.add_parser("plot", help="re-render figures from CSV/JSON outputs")
    s.add_argument("kind", choices=("scatter", "report"))
    s.add_argument("input")
    s.add_argument("--x", default="original_size")
    s.add_argument("--y", default="ratio")
    return p


COMMANDS = {
    "bigram-train": cmd_bigram_train,
    "features": cmd_features,
    "dna": cmd_dna,
    "search": cmd_search,
    "evaluate": cmd_evaluate,
    "threshold": cmd_threshold,
    "casestudy": cmd_casestudy,
    "plot": cmd_plot,
}


def _apply_args(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out:
        cfg.out = Path(args.out)
    for key in PATH_KEYS:
        v = getattr(args, key, None)
        if v:
            cfg.paths[key] = v
    if getattr(args, "algorithms", None):
        cfg.algorithms = tuple(args.algorithms)
    if getattr(args, "feature_sets", None):
        cfg.feature_sets = tuple(args.feature_sets)
    if getattr(args, "delta", None) is not None:
        cfg.delta = args.delta
    if getattr(args, "cv_gap", None) is not None:
        cfg.cv_gap = args.cv_gap
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_args(load_config(args.config), args)
        return COMMANDS[args.command](cfg, args)
    except (UsageError, ingest.RegistryError, ingest.ParseError, ingest.SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
