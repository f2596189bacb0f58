"""Command-line orchestration of the benchmark pipeline.

One JSON config drives every subcommand; each run writes its declared
artifacts plus a machine-readable manifest (inputs, config hash, outputs).
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import audio, benchset, duration, evaluate, ngram, prominence
from .buckeye import parse_buckeye
from .corpus import AlignedCorpus, emit_aligned_tsv, parse_aligned_tsv, validate
from .errors import ProsobenchError
from .textgrid import parse_textgrid

log = logging.getLogger("prosobench")

SUBCOMMANDS = ["ingest", "validate", "durmodel", "reduce", "prominence",
               "emit-bench", "stats", "ngram", "score", "correlate",
               "winners", "errwords", "freqcurve"]

USAGE_ERROR = 1
DATA_ERROR = 2


class ConfigError(ProsobenchError):
    pass


def config_hash(config: dict) -> str:
    # the output location is not part of the pipeline configuration
    slim = {k: v for k, v in config.items() if k != "out"}
    canonical = json.dumps(slim, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_config(path: str, overrides: argparse.Namespace) -> dict:
    if not os.path.exists(path):
        raise FileNotFoundError("config file not found: %s" % path)
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    if overrides.seed is not None:
        config["seed"] = overrides.seed
    if overrides.out is not None:
        config["out"] = overrides.out
    config.setdefault("seed", 0)
    config.setdefault("folds", 8)
    config.setdefault("theta_prominence", prominence.THETA_PROMINENCE)
    config.setdefault("out", "out")
    if "language" not in config:
        raise ConfigError("config is missing 'language'")
    return config


def theta_reduction(config: dict) -> float:
    theta = config.get("theta_reduction")
    if isinstance(theta, dict):
        return theta[config["language"]]
    if theta is not None:
        return float(theta)
    return duration.THETA_DEFAULTS.get(config["language"], 0.5)


class Runner:
    """Collects inputs/outputs so the manifest declares every file touched."""

    def __init__(self, subcommand: str, config: dict):
        self.subcommand = subcommand
        self.config = config
        self.out_dir = Path(config["out"])
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.inputs: list[str] = []
        self.outputs: list[str] = []

    def read_text(self, path: str) -> str:
        if not os.path.exists(path):
            raise FileNotFoundError("input not found: %s" % path)
        self.inputs.append(str(path))
        with open(path, encoding="utf-8") as fh:
            return fh.read()

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.outputs.append(str(path))
        return path

    def write_json(self, name: str, data) -> Path:
        return self.write_text(name, json.dumps(data, indent=2, sort_keys=True,
                                                allow_nan=True) + "\n")

    def write_manifest(self) -> None:
        manifest = {
            "subcommand": self.subcommand,
            "config_hash": config_hash(self.config),
            "inputs": sorted(set(self.inputs)),
            "outputs": sorted(set(self.outputs)),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        path = self.out_dir / ("%s.manifest.json" % self.subcommand)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(json.dumps(manifest))


# ---------------------------------------------------------------------------
# corpus loading

def load_corpus(runner: Runner) -> AlignedCorpus:
    config = runner.config
    spec = config.get("corpus")
    if not spec or "format" not in spec:
        raise ConfigError("config is missing corpus.format")
    fmt = spec["format"]
    recordings = []
    if fmt == "tsv":
        for path in spec.get("paths", []):
            rec = parse_aligned_tsv(runner.read_text(path), Path(path).stem)
            recordings.append(rec)
    elif fmt == "textgrid":
        for path in spec.get("paths", []):
            stem = Path(path).stem
            rec = parse_textgrid(
                runner.read_text(path),
                word_tier=spec.get("word_tier", "words"),
                phone_tier=spec.get("phone_tier", "phones"),
                syllable_tier=spec.get("syllable_tier"),
                recording_id=stem,
                speaker_id=spec.get("speakers", {}).get(stem, stem))
            recordings.append(rec)
    elif fmt == "buckeye":
        for words_path, phones_path in spec.get("pairs", []):
            stem = Path(words_path).stem
            rec = parse_buckeye(runner.read_text(words_path),
                                runner.read_text(phones_path),
                                recording_id=stem,
                                speaker_id=spec.get("speakers", {}).get(stem, stem))
            recordings.append(rec)
    else:
        raise ConfigError("unknown corpus format %r" % fmt)
    if not recordings:
        raise ConfigError("corpus spec lists no files")
    return AlignedCorpus(config["language"], tuple(recordings))


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(runner: Runner, args) -> None:
    corpus = load_corpus(runner)
    for rec in corpus.recordings:
        runner.write_text("ingest/%s.tsv" % rec.id, emit_aligned_tsv(rec))


def cmd_validate(runner: Runner, args) -> None:
    corpus = load_corpus(runner)
    report = validate(corpus)
    runner.write_json("validate.json", {
        "ok": report.ok,
        "findings": [vars(f) for f in report.findings],
    })


def cmd_durmodel(runner: Runner, args) -> None:
    corpus = load_corpus(runner)
    variant = runner.config.get("reduction_variant", "segment")
    fit = (duration.fit_segment_table if variant == "segment"
           else duration.fit_syllable_model)
    half_a, half_b, imbalance = duration.split_halves(corpus,
                                                      runner.config["seed"])
    for name, half in (("a", half_a), ("b", half_b)):
        meta = {"half": name, "seed": runner.config["seed"],
                "imbalance": imbalance,
                "recordings": [r.id for r in half.recordings]}
        runner.write_text("durmodel.%s.json" % name,
                          duration.model_to_json_str(fit(half), meta))


def cmd_reduce(runner: Runner, args) -> None:
    config = runner.config
    corpus = load_corpus(runner)
    theta = theta_reduction(config)
    result = duration.label_reductions(
        corpus, config.get("reduction_variant", "segment"), theta,
        config["seed"])
    lang = config["language"]
    runner.write_text("reduction.%s.tsv" % lang,
                      duration.reduction_tsv(result.records))
    hist = duration.ratio_histogram(result.records, theta=theta)
    runner.write_text("reduction_hist.%s.csv" % lang, hist.to_csv())
    runner.write_json("reduction_meta.%s.json" % lang, {
        **result.metadata, "excluded": result.excluded,
        "n_records": len(result.records),
        "label_rate": (sum(r.label for r in result.records)
                       / len(result.records) if result.records else None),
    })


def cmd_prominence(runner: Runner, args) -> None:
    config = runner.config
    corpus = load_corpus(runner)
    theta = config["theta_prominence"]
    wavs = config.get("wavs", {})
    tracks = config.get("tracks", {})
    channels = config.get("channels", {})
    records = []
    for rec in corpus.recordings:
        if rec.id in tracks:
            track = prominence.track_from_tsv(runner.read_text(tracks[rec.id]))
        elif rec.id in wavs:
            path = wavs[rec.id]
            if not os.path.exists(path):
                raise FileNotFoundError("audio not found: %s" % path)
            runner.inputs.append(path)
            samples, rate = audio.read_wav(path, channels.get(rec.id, 0))
            track = prominence.track_from_audio(samples, rate)
        else:
            raise ConfigError("no audio or track configured for recording %r"
                              % rec.id)
        records.extend(prominence.score_recording(track, rec, theta))
    lang = config["language"]
    runner.write_text("prominence.%s.tsv" % lang,
                      prominence.prominence_tsv(records))
    hist = prominence.score_histogram(records, theta=theta)
    runner.write_text("prominence_hist.%s.csv" % lang, hist.to_csv())


def _read_labeled_rows(runner: Runner, path: str):
    """Rows of a reduce/prominence TSV: provenance, word and binary label."""
    text = runner.read_text(path)
    lines = text.splitlines()
    header = lines[0].split("\t")
    for col in ("speaker", "utt", "idx", "word", "label"):
        if col not in header:
            raise ConfigError("labels file %s lacks column %r" % (path, col))
    ix = {name: header.index(name) for name in header}
    rows = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cols = line.split("\t")
        prov = (cols[ix["speaker"]], int(cols[ix["utt"]]), int(cols[ix["idx"]]))
        rows.append((prov, cols[ix["word"]], cols[ix["label"]] == "1"))
    return rows


def cmd_emit_bench(runner: Runner, args) -> None:
    config = runner.config
    task = args.task
    rows = _read_labeled_rows(runner, args.labels)
    utterances = []
    current_key = None
    for prov, word, label in rows:
        key = (prov[0], prov[1])
        if key != current_key:
            utterances.append([])
            current_key = key
        utterances[-1].append((prov, word, label))
    dataset = benchset.emit_bio(utterances, task)
    counts: dict[str, int] = {}
    for prov, _, _ in rows:
        counts[prov[0]] = counts.get(prov[0], 0) + 1
    folds = benchset.folds_from_counts(counts, config["folds"], config["seed"])
    lang = config["language"]
    for i, sub in sorted(benchset.split_by_fold(dataset, folds).items()):
        runner.write_text("%s.%s.fold%d.conll" % (task, lang, i),
                          benchset.to_conll(sub))
    runner.write_text("%s.%s.gold.tsv" % (task, lang), benchset.gold_tsv(dataset))
    runner.write_json("%s.%s.folds.json" % (task, lang),
                      {"k": folds.k, "mapping": folds.mapping})
    runner.write_json("%s.%s.stats.json" % (task, lang),
                      benchset.dataset_stats(dataset, folds))


def _load_folds(runner: Runner, path: str) -> benchset.FoldAssignment:
    data = json.loads(runner.read_text(path))
    return benchset.FoldAssignment(data["k"], dict(data["mapping"]))


def cmd_stats(runner: Runner, args) -> None:
    gold = evaluate.parse_prediction_tsv(runner.read_text(args.gold), args.task)
    dataset = benchset.dataset_from_rows(gold.tokens, args.task)
    folds = _load_folds(runner, args.folds) if args.folds else None
    runner.write_json("stats.json", benchset.dataset_stats(dataset, folds))


def cmd_ngram(runner: Runner, args) -> None:
    config = runner.config
    corpus = load_corpus(runner)
    params = config.get("ngram", {})
    utterances = [[tok.orthography for tok in utt]
                  for rec in corpus.recordings for utt in rec.utterances]
    model = ngram.train(utterances,
                        order=params.get("order", 3),
                        discount=params.get("discount", 0.75),
                        unk_cutoff=params.get("unk_cutoff", 2))
    records = []
    for rec in corpus.recordings:
        for utt in rec.utterances:
            if not utt:
                continue
            records.extend(ngram.surprisal(
                model, [t.orthography for t in utt],
                speaker=utt[0].speaker_id,
                utterance_index=utt[0].utterance_index))
    lang = config["language"]
    runner.write_text("surprisal.%s.tsv" % lang, ngram.surprisal_tsv(records))
    runner.write_json("ngram.%s.json" % lang, {
        "order": model.order, "discount": model.discount,
        "vocab_size": len(model.vocab),
        "perplexity": ngram.perplexity(model, [u for u in utterances if u]),
    })


def cmd_score(runner: Runner, args) -> None:
    gold_set = evaluate.parse_prediction_tsv(runner.read_text(args.gold),
                                             args.task)
    dataset = benchset.dataset_from_rows(gold_set.tokens, args.task)
    pred = evaluate.parse_prediction_tsv(runner.read_text(args.pred),
                                         args.task, args.model_name)
    folds = _load_folds(runner, args.folds) if args.folds else None
    report = evaluate.score(dataset, pred, folds)
    runner.write_json("score.%s.json" % args.model_name, report.to_json())
    runner.write_text("score.%s.txt" % args.model_name, report.to_text())


def _surprisal_by_prov(text: str) -> dict:
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != ["speaker", "utt", "idx", "word",
                                             "surprisal"]:
        raise ConfigError("bad surprisal TSV header")
    out = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        cols = line.split("\t")
        out[(cols[0], int(cols[1]), int(cols[2]))] = float(cols[4])
    return out


def cmd_correlate(runner: Runner, args) -> None:
    gold = evaluate.parse_prediction_tsv(runner.read_text(args.gold), args.task)
    sur = _surprisal_by_prov(runner.read_text(args.surprisal))
    labels, values = [], []
    for prov, _, tag in gold.tokens:
        if prov in sur:
            labels.append(evaluate.is_positive(tag))
            values.append(sur[prov])
    report = evaluate.correlate_surprisal(labels, values,
                                          seed=runner.config["seed"])
    runner.write_json("correlation.json", vars(report))


def cmd_winners(runner: Runner, args) -> None:
    raw = json.loads(runner.read_text(args.data))
    data = {}
    for key, criteria in raw.items():
        language, task = key.split("/", 1)
        data[(language, task)] = criteria
    rows = evaluate.winners_table(data, args.model_a, args.model_b,
                                  seed=runner.config["seed"])
    runner.write_json("winners.json", rows)
    runner.write_text("winners.txt", evaluate.winners_text(rows))


def _paired_rows(runner: Runner, args):
    gold = evaluate.parse_prediction_tsv(runner.read_text(args.gold), args.task)
    pred = evaluate.parse_prediction_tsv(runner.read_text(args.pred), args.task)
    evaluate.check_alignment(gold.tokens, pred.tokens)
    return [(word, evaluate.is_positive(gtag), evaluate.is_positive(ptag))
            for (_, word, gtag), (_, _, ptag) in zip(gold.tokens, pred.tokens)]


def cmd_errwords(runner: Runner, args) -> None:
    rows = _paired_rows(runner, args)
    table = evaluate.rate_difference(rows, min_count=args.min_count,
                                     language=runner.config["language"])
    runner.write_text("rate_difference.tsv", evaluate.rate_diff_tsv(table))
    runner.write_json("rate_difference_topbottom.json", {
        "top": [vars(e) for e in table.top],
        "bottom": [vars(e) for e in table.bottom],
    })


def cmd_freqcurve(runner: Runner, args) -> None:
    rows = _paired_rows(runner, args)
    curve = evaluate.frequency_curve(rows, language=runner.config["language"])
    runner.write_text("frequency_curve.csv",
                      evaluate.frequency_curve_csv(curve))


HANDLERS = {
    "ingest": cmd_ingest,
    "validate": cmd_validate,
    "durmodel": cmd_durmodel,
    "reduce": cmd_reduce,
    "prominence": cmd_prominence,
    "emit-bench": cmd_emit_bench,
    "stats": cmd_stats,
    "ngram": cmd_ngram,
    "score": cmd_score,
    "correlate": cmd_correlate,
    "winners": cmd_winners,
    "errwords": cmd_errwords,
    "freqcurve": cmd_freqcurve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prosobench")
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=1)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("ingest", "validate", "durmodel", "reduce", "prominence",
                 "ngram"):
        sub.add_parser(name)
    p = sub.add_parser("emit-bench")
    p.add_argument("--labels", required=True)
    p.add_argument("--task", required=True, choices=["reduction", "prominence"])
    p = sub.add_parser("stats")
    p.add_argument("--gold", required=True)
    p.add_argument("--folds", default=None)
    p.add_argument("--task", default="reduction")
    p = sub.add_parser("score")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--folds", default=None)
    p.add_argument("--task", default="reduction")
    p.add_argument("--model-name", default="model")
    p = sub.add_parser("correlate")
    p.add_argument("--gold", required=True)
    p.add_argument("--surprisal", required=True)
    p.add_argument("--task", default="reduction")
    p = sub.add_parser("winners")
    p.add_argument("--data", required=True)
    p.add_argument("--model-a", default="conv")
    p.add_argument("--model-b", default="wiki")
    for name in ("errwords", "freqcurve"):
        p = sub.add_parser(name)
        p.add_argument("--gold", required=True)
        p.add_argument("--pred", required=True)
        p.add_argument("--task", default="reduction")
        if name == "errwords":
            p.add_argument("--min-count", type=int, default=50)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PROSOBENCH_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    try:
        config = load_config(args.config, args)
    except ConfigError as exc:
        print("prosobench: config error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print("prosobench: %s" % exc, file=sys.stderr)
        return DATA_ERROR
    runner = Runner(args.subcommand, config)
    try:
        HANDLERS[args.subcommand](runner, args)
    except ConfigError as exc:
        print("prosobench: config error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    except (ProsobenchError, FileNotFoundError, KeyError, ValueError) as exc:
        print("prosobench: %s: %s" % (args.subcommand, exc), file=sys.stderr)
        return DATA_ERROR
    runner.write_manifest()
    return 0


if __name__ == "__main__":
    sys.exit(main())
