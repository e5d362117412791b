"""Command-line surface for the pipeline.

Every artifact-writing run records a manifest under ``<out>/manifests/``
echoing the fully resolved parameters and seed; ``kanhope replay`` re-runs
a manifest and reproduces the artifacts byte-identically (timestamps live
only inside manifests and report run_meta). Option precedence:
defaults < config file < KANHOPE_* environment < explicit flags.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, agreement, classifiers, corpus, features, metrics, plots, preprocess
from . import dualchannel as dc
from .dualchannel.model import MODEL_BINARY_MAGIC
from .dualchannel.translate import MODES as TRANSLATE_MODES
from .util import derive_seed

CLASS_NAMES = ("Not-Hope", "Hope")
ENV_PREFIX = "KANHOPE_"


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().lower()] = value.strip()
    return values


class Settings:
    """Layered option resolution: flag > environment > config file > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_values = _load_config_file(getattr(args, "config", None))
        self.resolved: dict = {}

    def get(self, key: str, default, cast=str):
        flag = getattr(self.args, key, None)
        if flag is not None:
            value = flag
        else:
            raw = os.environ.get(ENV_PREFIX + key.upper(), self.file_values.get(key))
            if raw is None:
                value = default
            elif cast is bool:
                value = str(raw).strip().lower() in ("1", "true", "yes", "on")
            else:
                value = cast(raw)
        self.resolved[key] = value
        return value


def _out_layout(out_dir: str) -> dict[str, Path]:
    root = Path(out_dir)
    layout = {name: root / name for name in ("splits", "models", "reports", "manifests")}
    for path in layout.values():
        path.mkdir(parents=True, exist_ok=True)
    return layout


def _write_manifest(out_dir: str, command: str, resolved: dict) -> Path:
    manifests = _out_layout(out_dir)["manifests"]
    counter = 0
    while (manifests / f"{command}-{counter:03d}.json").exists():
        counter += 1
    path = manifests / f"{command}-{counter:03d}.json"
    payload = {
        "command": command,
        "resolved": {k: v for k, v in sorted(resolved.items())},
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "toolkit_version": __version__,
    }
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8")
    return path


def _load_classification_data(path: str, features_model) -> tuple[list, list]:
    data = corpus.load_dataset(path)
    data = corpus.filter_labels(data, corpus.CLASSIFICATION_LABELS)
    docs = [features.prepare_doc(c.text, features_model.analyzer) for c in data]
    X = features.transform_all(features_model, docs)
    y = [1 if c.label is corpus.Label.HOPE else 0 for c in data]
    return X, y


def _dataset_to_dc_rows(dataset: corpus.Dataset, provider: dc.TranslationProvider | None):
    rows = []
    for c in dataset:
        translation = c.translation
        if translation is None and provider is not None:
            translated, _ = dc.translate(provider, c.text)
            translation = translated if translated != c.text else None
        label = 1 if c.label is corpus.Label.HOPE else 0
        rows.append((c.text, translation, label))
    return rows


def _make_provider(params: dict) -> dc.TranslationProvider | None:
    mode = params.get("translate_mode", "identity")
    cache_path = params.get("translate_cache")
    cache = dc.load_cache(cache_path) if cache_path else {}
    if mode == "identity" and not cache_path:
        return None
    return dc.TranslationProvider(
        mode=mode,
        cache=cache,
        url=params.get("translate_url"),
        cache_path=Path(cache_path) if cache_path and mode == "http" else None,
    )


# ---------------------------------------------------------------- handlers

def run_stats(params: dict) -> int:
    data = corpus.load_dataset(params["in_path"])
    if params.get("classification_only"):
        data = corpus.filter_labels(data, corpus.CLASSIFICATION_LABELS)
    stats = corpus.corpus_stats(data)
    text = json.dumps(stats.to_dict(), indent=2)
    if params.get("json_out"):
        Path(params["json_out"]).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def run_clean(params: dict) -> int:
    table = (
        preprocess.load_emoji_table(params["emoji_map"])
        if params.get("emoji_map")
        else None
    )
    if params.get("text") is not None:
        print(preprocess.clean(params["text"], table))
        return 0
    data = corpus.load_dataset(params["in_path"])
    cleaned = corpus.Dataset(
        [
            corpus.Comment(c.id, preprocess.clean(c.text, table), c.label, c.translation)
            for c in data
        ],
        name=data.name,
    )
    corpus.save_dataset(cleaned, params["out_file"])
    print(f"wrote {len(cleaned)} cleaned comments to {params['out_file']}")
    return 0


def run_codemix(params: dict) -> int:
    lexicon = (
        preprocess.load_lexicon(params["lexicon"]) if params.get("lexicon") else None
    )
    data = corpus.load_dataset(params["in_path"])
    lines = []
    for c in data:
        profile = preprocess.codemix_type(
            c.text,
            english_lexicon=lexicon,
            english_low=params.get("english_low", preprocess.ENGLISH_FRACTION_LOW),
            english_high=params.get("english_high", preprocess.ENGLISH_FRACTION_HIGH),
        )
        lines.append(
            json.dumps(
                {
                    "id": c.id,
                    "mix_type": profile.mix_type.value,
                    "token_tags": [
                        [tok, tag.value, eng] for tok, tag, eng in profile.token_tags
                    ],
                },
                ensure_ascii=False,
            )
        )
    output = "\n".join(lines) + "\n"
    if params.get("jsonl_out"):
        Path(params["jsonl_out"]).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


def run_agreement(params: dict) -> int:
    records = agreement.load_annotations(params["annotations"])
    matrix = agreement.coincidence_matrix(records)
    alpha = agreement.krippendorff_alpha(records)
    payload = {"alpha": alpha, "alpha_rounded": round(alpha, 2), "coincidence": matrix.to_dict()}
    if params.get("roster"):
        roster = agreement.load_roster(params["roster"])
        payload["annotators"] = [
            {
                "annotator_id": row.annotator_id,
                "annotations": row.num_annotations,
                "gender": row.gender,
                "higher_education": row.higher_education,
                "medium_of_schooling": row.medium_of_schooling,
            }
            for row in agreement.annotator_summary(records, roster)
        ]
    print(json.dumps(payload, indent=2, ensure_ascii=False))
    return 0


def run_split(params: dict) -> int:
    data = corpus.load_dataset(params["in_path"])
    if not params.get("keep_all_labels"):
        # label filtering always precedes splitting
        data = corpus.filter_labels(data, corpus.CLASSIFICATION_LABELS)
    fractions = params["fractions"]
    spec = corpus.SplitSpec(
        train_fraction=fractions[0],
        dev_fraction=fractions[1],
        test_fraction=fractions[2],
        seed=params["seed"],
        stratified=params.get("stratified", True),
    )
    train, dev, test = corpus.split(data, spec)
    prefix = params["out_prefix"]
    for part, suffix in ((train, "train"), (dev, "dev"), (test, "test")):
        corpus.save_dataset(part, f"{prefix}{suffix}.csv")
    print(
        f"split {len(data)} comments into {len(train)}/{len(dev)}/{len(test)} "
        f"at {prefix}{{train,dev,test}}.csv"
    )
    return 0


def run_featurize(params: dict) -> int:
    data = corpus.load_dataset(params["train"])
    data = corpus.filter_labels(data, corpus.CLASSIFICATION_LABELS)
    analyzer = params.get("analyzer", "word")
    docs = [features.prepare_doc(c.text, analyzer) for c in data]
    model = features.fit_tfidf(
        docs,
        n_range=(params.get("ngram_min", 1), params.get("ngram_max", 5)),
        min_df=params.get("min_df", 1),
        analyzer=analyzer,
    )
    features.save_tfidf(model, params["model_out"])
    print(f"fitted TF-IDF vocabulary of {model.num_features} n-grams -> {params['model_out']}")
    return 0


def run_train(params: dict) -> int:
    kind = params["kind"]
    if kind == "dc":
        return _train_dc(params)
    fmodel = features.load_tfidf(params["features"])
    X, y = _load_classification_data(params["train"], fmodel)
    n_features = fmodel.num_features
    if kind == "lr":
        model = classifiers.fit_logreg(
            X,
            y,
            C=params.get("c", 0.1),
            n_features=n_features,
            tol=params.get("tol", 1e-4),
            max_iter=params.get("max_iter", 1000),
        )
    elif kind == "nb":
        model = classifiers.fit_nb(X, y, alpha=params.get("alpha", 1.0), n_features=n_features)
    elif kind == "knn":
        model = classifiers.fit_knn(
            X, y, k=params.get("k", 3), p=params.get("p", 2.0), n_features=n_features
        )
    elif kind == "tree":
        model = classifiers.fit_tree(
            X,
            y,
            max_depth=params.get("max_depth", 800),
            min_samples_split=params.get("min_samples_split", 5),
            n_features=n_features,
        )
    elif kind == "forest":
        model = classifiers.fit_forest(
            X,
            y,
            n_trees=params.get("n_trees", 100),
            max_depth=params.get("max_depth", 800),
            min_samples_split=params.get("min_samples_split", 5),
            max_features=params.get("max_features", "sqrt"),
            bootstrap=params.get("bootstrap", True),
            seed=params["seed"],
            n_features=n_features,
            n_jobs=params.get("n_jobs", 1),
        )
    else:
        raise UsageError(f"unknown classifier kind {kind!r}")
    classifiers.save_model(model, params["model_out"])
    print(f"trained {kind} on {len(y)} examples -> {params['model_out']}")
    return 0


def _train_dc(params: dict) -> int:
    cfg = dc.TrainConfig(
        batch_size=params.get("batch_size", 32),
        dropout=params.get("dropout", 0.1),
        learning_rate=params.get("lr", 2e-3),
        epochs=params.get("epochs", 10),
        weight_decay=params.get("weight_decay", 0.01),
        seed=params["seed"],
        vocab_size=2 ** params.get("vocab_bits", 15),
        dim=params.get("dim", 64),
        max_length=params.get("max_length", 128),
    )
    provider = _make_provider(params)
    tokenizer = dc.HashTokenizer(vocab_size=cfg.vocab_size, max_length=cfg.max_length)
    train_data = corpus.filter_labels(
        corpus.load_dataset(params["train"]), corpus.CLASSIFICATION_LABELS
    )
    train_examples = dc.make_examples(_dataset_to_dc_rows(train_data, provider), tokenizer)
    dev_examples = None
    if params.get("dev"):
        dev_data = corpus.filter_labels(
            corpus.load_dataset(params["dev"]), corpus.CLASSIFICATION_LABELS
        )
        dev_examples = dc.make_examples(_dataset_to_dc_rows(dev_data, provider), tokenizer)
    missing = sum(e.translation_missing for e in train_examples)
    if missing:
        print(f"note: {missing} training examples lack translations; identity fallback used")
    model = dc.init_model(
        vocab_size=cfg.vocab_size,
        dim=cfg.dim,
        dropout_rate=cfg.dropout,
        seed=derive_seed(cfg.seed, "dc.model"),
    )
    model, history = dc.train(model, train_examples, cfg, dev_examples)
    dc.save_dc_model(model, params["model_out"])
    if params.get("history_out"):
        Path(params["history_out"]).write_text(dc.history_csv(history), encoding="utf-8")
    last = history[-1] if history else None
    tail = f"; final train loss {last.train_loss:.4f}" if last else ""
    print(f"trained dual-channel model on {len(train_examples)} examples{tail} -> {params['model_out']}")
    return 0


def _is_dc_model(path: str) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(MODEL_BINARY_MAGIC)) == MODEL_BINARY_MAGIC


def run_eval(params: dict) -> int:
    data = corpus.filter_labels(
        corpus.load_dataset(params["data"]), corpus.CLASSIFICATION_LABELS
    )
    y_true = [CLASS_NAMES[1] if c.label is corpus.Label.HOPE else CLASS_NAMES[0] for c in data]
    model_id = params.get("model_id") or Path(params["model"]).stem
    if _is_dc_model(params["model"]):
        model = dc.load_dc_model(params["model"])
        tokenizer = dc.HashTokenizer(vocab_size=model.vocab_size, max_length=params.get("max_length", 128))
        provider = _make_provider(params)
        examples = dc.make_examples(_dataset_to_dc_rows(data, provider), tokenizer)
        proba = dc.predict_proba_dc(model, examples)
        y_pred = [CLASS_NAMES[int(p >= 0.5)] for p in proba]
    else:
        fmodel = features.load_tfidf(params["features"])
        X, _ = _load_classification_data(params["data"], fmodel)
        labels = classifiers.predict(classifiers.load_model(params["model"]), X)
        y_pred = [CLASS_NAMES[int(l)] for l in labels]
    report = metrics.evaluate(
        y_true,
        y_pred,
        CLASS_NAMES,
        model_id=model_id,
        run_meta={
            "model_file": str(params["model"]),
            "seed": params["seed"],
            "timestamp": datetime.now(timezone.utc).isoformat(),
        },
    )
    out_path = params.get("report_out")
    if out_path:
        Path(out_path).write_text(report.to_json() + "\n", encoding="utf-8")
    row = metrics.aggregate([report])[0]
    print(metrics.render_table([row], CLASS_NAMES))
    if params.get("figures") and out_path:
        fig = plots.save_confusion_heatmap(
            report.matrix, Path(out_path).with_suffix(".png"), title=model_id
        )
        print(f"figure: {fig}")
    return 0


def run_report(params: dict) -> int:
    reports = []
    for path in params["inputs"]:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        reports.append(metrics.report_from_dict(payload))
    rows = metrics.aggregate(reports)
    class_names = reports[0].matrix.class_names
    table = metrics.render_table(rows, class_names)
    print(table)
    out_dir = Path(params["report_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "benchmark.txt").write_text(table + "\n", encoding="utf-8")
    csv_lines = ["model,seeds,accuracy,weighted_precision,weighted_recall,weighted_f1"]
    for row in rows:
        seeds = ";".join(str(s) for s in row.seeds)
        csv_lines.append(
            f"{row.model_id},{seeds},{row.accuracy:.6f},"
            f"{row.weighted[0]:.6f},{row.weighted[1]:.6f},{row.weighted[2]:.6f}"
        )
    (out_dir / "benchmark.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    written = [out_dir / "benchmark.txt", out_dir / "benchmark.csv"]
    if params.get("figures", True):
        written.append(plots.save_model_comparison(rows, out_dir / "comparison.png"))
        for rep in reports:
            written.append(
                plots.save_confusion_heatmap(
                    rep.matrix,
                    out_dir / f"confusion_{rep.model_id}.png",
                    title=rep.model_id,
                )
            )
    for path in written:
        print(f"wrote {path}")
    return 0


def run_gradcheck(params: dict) -> int:
    rng_seed = params["seed"]
    vocab = params.get("vocab", 8)
    dim = params.get("dim", 4)
    batch = params.get("batch", 4)
    model = dc.init_model(vocab_size=vocab, dim=dim, dropout_rate=0.0, seed=rng_seed)
    rng = np.random.Generator(np.random.PCG64(derive_seed(rng_seed, "gradcheck.batch")))
    examples = [
        dc.Example(
            ids_cm=rng.integers(0, vocab, size=rng.integers(1, 6)),
            ids_en=rng.integers(0, vocab, size=rng.integers(1, 6)),
            label=int(rng.integers(0, 2)),
        )
        for _ in range(batch)
    ]
    error = dc.grad_check(model, examples, epsilon=params.get("epsilon", 1e-5))
    print(f"max relative error: {error:.3e}")
    if error >= 1e-4:
        print("gradient check FAILED (threshold 1e-4)")
        return 2
    return 0


def run_replay(params: dict) -> int:
    manifest = json.loads(Path(params["manifest"]).read_text(encoding="utf-8"))
    command = manifest["command"]
    handler = HANDLERS.get(command)
    if handler is None:
        raise UsageError(f"manifest names unknown command {command!r}")
    return handler(manifest["resolved"])


HANDLERS = {
    "stats": run_stats,
    "clean": run_clean,
    "codemix": run_codemix,
    "agreement": run_agreement,
    "split": run_split,
    "featurize": run_featurize,
    "train": run_train,
    "eval": run_eval,
    "report": run_report,
    "gradcheck": run_gradcheck,
}


# ---------------------------------------------------------------- parsing

def _add_globals(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    # subparsers take SUPPRESS defaults so they never clobber values the
    # root parser already captured (argparse overwrites otherwise)
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="master seed (default 0)")
    parser.add_argument("--config", default=default, help="flat key=value config file")
    parser.add_argument("--out", default=default, help="artifact directory (default ./out)")


class _Subparsers:
    """Attach the global flags to every subcommand so they work trailing."""

    def __init__(self, sub):
        self._sub = sub

    def add_parser(self, *args, **kwargs):
        p = self._sub.add_parser(*args, **kwargs)
        _add_globals(p, suppress=True)
        return p


def _build_parser() -> Parser:
    parser = Parser(prog="kanhope", description=__doc__)
    _add_globals(parser)
    sub = _Subparsers(parser.add_subparsers(dest="command"))

    p = sub.add_parser("stats", help="corpus statistics as JSON")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--classification-only", action="store_true", default=None)
    p.add_argument("--json-out", dest="json_out")

    p = sub.add_parser("clean", help="apply the cleaning rules")
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out-file", dest="out_file")
    p.add_argument("--text")
    p.add_argument("--emoji-map", dest="emoji_map")

    p = sub.add_parser("codemix", help="code-mixing profile per comment (JSON lines)")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--jsonl-out", dest="jsonl_out")
    p.add_argument("--english-low", dest="english_low", type=float)
    p.add_argument("--english-high", dest="english_high", type=float)

    p = sub.add_parser("agreement", help="Krippendorff's alpha over an annotations CSV")
    p.add_argument("--annotations", required=True)
    p.add_argument("--roster")

    p = sub.add_parser("split", help="write train/dev/test CSVs")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--fractions", default=None, help="e.g. 0.8,0.1,0.1")
    p.add_argument("--out-prefix", dest="out_prefix")
    p.add_argument("--no-stratified", dest="stratified", action="store_false", default=None)
    p.add_argument("--keep-all-labels", action="store_true", default=None)

    p = sub.add_parser("featurize", help="fit the TF-IDF model")
    p.add_argument("--train", required=True)
    p.add_argument("--model-out", dest="model_out")
    p.add_argument("--ngram-min", dest="ngram_min", type=int)
    p.add_argument("--ngram-max", dest="ngram_max", type=int)
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--analyzer", choices=("word", "char"))

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("kind", choices=("lr", "nb", "knn", "tree", "forest", "dc"))
    p.add_argument("--features")
    p.add_argument("--train", required=True)
    p.add_argument("--dev")
    p.add_argument("--model-out", dest="model_out")
    p.add_argument("--C", dest="c", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--min-samples-split", dest="min_samples_split", type=int)
    p.add_argument("--n-trees", dest="n_trees", type=int)
    p.add_argument("--max-features", dest="max_features")
    p.add_argument("--no-bootstrap", dest="bootstrap", action="store_false", default=None)
    p.add_argument("--n-jobs", dest="n_jobs", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--vocab-bits", dest="vocab_bits", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--max-length", dest="max_length", type=int)
    p.add_argument("--history-out", dest="history_out")
    p.add_argument("--translate-mode", dest="translate_mode", choices=TRANSLATE_MODES)
    p.add_argument("--translate-url", dest="translate_url")
    p.add_argument("--translate-cache", dest="translate_cache")

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--features")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report-out", dest="report_out")
    p.add_argument("--model-id", dest="model_id")
    p.add_argument("--figures", action="store_true", default=None)
    p.add_argument("--max-length", dest="max_length", type=int)
    p.add_argument("--translate-mode", dest="translate_mode", choices=TRANSLATE_MODES)
    p.add_argument("--translate-url", dest="translate_url")
    p.add_argument("--translate-cache", dest="translate_cache")

    p = sub.add_parser("report", help="merge eval reports into the benchmark table")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--report-dir", dest="report_dir")
    p.add_argument("--no-figures", dest="figures", action="store_false", default=None)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--dim", type=int)
    p.add_argument("--vocab", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    return parser


def _parse_fractions(raw) -> tuple[float, float, float]:
    if isinstance(raw, (list, tuple)):
        parts = [float(x) for x in raw]
    else:
        parts = [float(x) for x in str(raw).split(",")]
    if len(parts) != 3:
        raise UsageError("--fractions expects three comma-separated values")
    return tuple(parts)


def _resolve(settings: Settings, command: str, args: argparse.Namespace) -> dict:
    out_dir = settings.get("out", "out")
    seed = settings.get("seed", 0, int)
    layout = _out_layout(out_dir)
    params: dict = {"out": out_dir, "seed": seed}

    def opt(key, default, cast=str):
        params[key] = settings.get(key, default, cast)

    if command == "stats":
        opt("in_path", None)
        opt("classification_only", False, bool)
        opt("json_out", None)
    elif command == "clean":
        opt("in_path", None)
        opt("out_file", None)
        opt("text", None)
        opt("emoji_map", None)
        if params["text"] is None and not (params["in_path"] and params["out_file"]):
            raise UsageError("clean requires --text or both --in and --out-file")
    elif command == "codemix":
        opt("in_path", None)
        opt("lexicon", None)
        opt("jsonl_out", None)
        opt("english_low", preprocess.ENGLISH_FRACTION_LOW, float)
        opt("english_high", preprocess.ENGLISH_FRACTION_HIGH, float)
    elif command == "agreement":
        opt("annotations", None)
        opt("roster", None)
    elif command == "split":
        opt("in_path", None)
        params["fractions"] = _parse_fractions(
            settings.get("fractions", "0.8,0.1,0.1")
        )
        opt("stratified", True, bool)
        opt("keep_all_labels", False, bool)
        opt("out_prefix", str(layout["splits"]) + os.sep)
    elif command == "featurize":
        opt("train", None)
        opt("ngram_min", 1, int)
        opt("ngram_max", 5, int)
        opt("min_df", 1, int)
        opt("analyzer", "word")
        opt("model_out", str(layout["models"] / "features.json"))
    elif command == "train":
        params["kind"] = args.kind
        opt("train", None)
        opt("features", str(layout["models"] / "features.json"))
        opt("model_out", str(layout["models"] / f"{args.kind}.model"))
        opt("c", 0.1, float)
        opt("tol", 1e-4, float)
        opt("max_iter", 1000, int)
        opt("alpha", 1.0, float)
        opt("k", 3, int)
        opt("p", 2.0, float)
        opt("max_depth", 800, int)
        opt("min_samples_split", 5, int)
        opt("n_trees", 100, int)
        opt("max_features", "sqrt")
        opt("bootstrap", True, bool)
        opt("n_jobs", 1, int)
        opt("dev", None)
        opt("dim", 64, int)
        opt("vocab_bits", 15, int)
        opt("batch_size", 32, int)
        opt("dropout", 0.1, float)
        opt("lr", 2e-3, float)
        opt("epochs", 10, int)
        opt("weight_decay", 0.01, float)
        opt("max_length", 128, int)
        opt("history_out", None)
        opt("translate_mode", "identity")
        opt("translate_url", None)
        opt("translate_cache", None)
    elif command == "eval":
        opt("features", str(layout["models"] / "features.json"))
        opt("model", None)
        opt("data", None)
        opt("report_out", None)
        opt("model_id", None)
        opt("figures", False, bool)
        opt("max_length", 128, int)
        opt("translate_mode", "identity")
        opt("translate_url", None)
        opt("translate_cache", None)
        if params["report_out"] is None:
            stem = params["model_id"] or Path(params["model"]).stem
            params["report_out"] = str(layout["reports"] / f"{stem}.json")
    elif command == "report":
        params["inputs"] = list(args.inputs)
        opt("figures", True, bool)
        opt("report_dir", str(layout["reports"]))
    elif command == "gradcheck":
        opt("dim", 4, int)
        opt("vocab", 8, int)
        opt("batch", 4, int)
        opt("epsilon", 1e-5, float)
    elif command == "replay":
        params["manifest"] = args.manifest
    return params


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            print(parser.format_usage(), file=sys.stderr)
            return 1
        settings = Settings(args)
        params = _resolve(settings, args.command, args)
        if args.command == "replay":
            return run_replay(params)
        _write_manifest(params["out"], args.command, params)
        return HANDLERS[args.command](params)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (
        FileNotFoundError,
        corpus.DatasetError,
        agreement.UndefinedAlphaError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except dc.TrainingDivergedError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2 by contract
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
