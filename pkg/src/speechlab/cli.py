"""Command-line surface for the detection pipeline.

Subcommands: synth-corpus, extract, train, eval, export-melspec,
dump-bicoherence. Exit codes: 0 success, 1 runtime failure, 2 usage error.
Every command is deterministic given its flags, inputs and seed.
SPEECHLAB_THREADS caps the worker count used for per-clip extraction.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import audio_io, features, melspec_image, synth
from .bicoherence import estimate_bicoherence
from .classifiers import load_model, save_model, train_model, FAMILIES
from .evaluation import evaluate_predictions, kfold_cv
from .exceptions import SpeechLabError
from .labels import BINARY_LABELS, MULTICLASS_LABELS, coerce_label, mode_labels


def max_workers() -> int:
    value = os.environ.get("SPEECHLAB_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _map_clips(fn, items):
    workers = max_workers()
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_entry_clips(manifest, entry):
    return audio_io.canonicalize(audio_io.load_wav(manifest.resolve(entry)))


def cmd_extract(args) -> int:
    manifest = audio_io.load_manifest(args.manifest, mode=args.mode)
    if not manifest.entries:
        print("manifest has no entries", file=sys.stderr)
        return 1

    def extract_entry(entry):
        try:
            clips = _load_entry_clips(manifest, entry)
        except (OSError, ValueError) as exc:
            return entry, exc
        label = coerce_label(entry.label, args.mode)
        return entry, [features.extract(clip, args.mode, label) for clip in clips]

    results = _map_clips(extract_entry, manifest.entries)

    vectors = []
    failures = 0
    for entry, outcome in results:
        if isinstance(outcome, Exception):
            failures += 1
            print(f"skipping {entry.path}: {outcome}", file=sys.stderr)
        else:
            vectors.extend(outcome)
    if not vectors:
        print("no clips could be extracted", file=sys.stderr)
        return 1

    counts = {}
    for v in vectors:
        counts[v.label] = counts.get(v.label, 0) + 1
    for label in mode_labels(args.mode):
        print(f"{label}: {counts.get(label, 0)} clips")
    if failures:
        print(f"{failures} entries failed", file=sys.stderr)
    features.write_csv(vectors, args.out_csv)
    print(f"wrote {len(vectors)} rows to {args.out_csv}")
    return 0


def _dataset_from_vectors(vectors, columns):
    """(X, y, class_names) with class order following the label vocabulary."""
    present = {v.label for v in vectors}
    ordered = [l for l in BINARY_LABELS + MULTICLASS_LABELS if l in present]
    class_names = list(dict.fromkeys(ordered))
    index = {name: i for i, name in enumerate(class_names)}
    X = np.array([v.values[list(columns)] for v in vectors])
    y = np.array([index[v.label] for v in vectors])
    return X, y, class_names


def cmd_train(args) -> int:
    vectors = features.read_csv(args.features_csv)
    columns = features.FEATURE_GROUPS[args.features]
    X, y, class_names = _dataset_from_vectors(vectors, columns)

    report = kfold_cv(
        X, y, FAMILIES[args.model](), class_names=class_names, k=5, seed=args.seed
    )
    print(f"5-fold CV accuracy: {report.accuracy:.4f}")
    print(f"per-fold: {[round(a, 4) for a in report.per_fold_accuracy]}")

    model = train_model(args.model, X, y, class_names, seed=args.seed)
    model.feature_group_ = args.features
    save_model(model, args.out_model)
    print(f"wrote model to {args.out_model}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    class_names = model.class_names_
    columns = features.FEATURE_GROUPS[args.features]

    data_path = Path(args.data)
    if data_path.suffix.lower() == ".csv":
        vectors = features.read_csv(data_path)
    else:
        mode = "binary" if class_names == list(BINARY_LABELS) else "multiclass"
        manifest = audio_io.load_manifest(data_path, mode=mode)
        vectors = []
        for entry in manifest.entries:
            label = coerce_label(entry.label, mode)
            for clip in _load_entry_clips(manifest, entry):
                vectors.append(features.extract(clip, mode, label))
    if not vectors:
        print("no data to evaluate", file=sys.stderr)
        return 1

    if len(columns) != model.n_features_in_:
        print(
            f"feature mismatch: model expects {model.n_features_in_} features but "
            f"--features {args.features} selects {len(columns)}; pass the group "
            "the model was trained with",
            file=sys.stderr,
        )
        return 1

    index = {name: i for i, name in enumerate(class_names)}
    unknown = sorted({v.label for v in vectors} - set(index))
    if unknown:
        print(f"data contains labels unknown to the model: {unknown}", file=sys.stderr)
        return 1

    X = np.array([v.values[list(columns)] for v in vectors])
    y = np.array([index[v.label] for v in vectors])
    pred = model.predict(X)
    scores = model.predict_proba(X)
    report = evaluate_predictions(y, pred, scores, class_names)

    print(f"accuracy: {report.accuracy:.4f}")
    print(f"macro F1: {report.macro_f1:.4f}")
    print(f"ROC-AUC:  {report.roc_auc:.4f}")
    print("confusion (rows = true, columns = predicted):")
    width = max(len(n) for n in class_names)
    for name, row in zip(class_names, report.confusion):
        print(f"  {name:>{width}} {' '.join(f'{v:5d}' for v in row)}")
    if args.report:
        Path(args.report).write_text(report.to_json())
        print(f"wrote report to {args.report}")
    return 0


def cmd_export_melspec(args) -> int:
    manifest = audio_io.load_manifest(args.manifest, mode="multiclass")
    if not manifest.entries:
        print("manifest has no entries", file=sys.stderr)
        return 1
    summary = melspec_image.export_dataset(manifest, args.out_dir)
    for path, reason in summary.failures:
        print(f"failed {path}: {reason}", file=sys.stderr)
    print(f"exported {len(summary.exported)} images to {args.out_dir}")
    print(f"index: {summary.index_path}")
    if not summary.exported:
        return 1
    return 0


def cmd_synth_corpus(args) -> int:
    manifest_path = synth.generate_corpus(args.out_dir, args.n_per_class, seed=args.seed)
    total = args.n_per_class * len(MULTICLASS_LABELS)
    print(f"generated {total} clips in {args.out_dir}")
    print(f"manifest: {manifest_path}")
    return 0


def cmd_dump_bicoherence(args) -> int:
    clips = audio_io.canonicalize(audio_io.load_wav(args.wav))
    if not clips:
        print("clip is shorter than 5 s; nothing to analyze", file=sys.stderr)
        return 1
    bmap = estimate_bicoherence(clips[0], seg_len=args.seg_len, overlap=args.overlap)
    fi, fj = np.nonzero(bmap.mask)
    lines = ["f1_hz,f2_hz,magnitude,phase"]
    for i, j in zip(fi, fj):
        lines.append(
            f"{bmap.freq_hz[i]:g},{bmap.freq_hz[j]:g},"
            f"{bmap.magnitude[i, j]:.17g},{bmap.phase[i, j]:.17g}"
        )
    Path(args.out_csv).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(fi)} cells to {args.out_csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechlab",
        description="Synthetic-speech detection pipeline: features, classifiers, images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract feature vectors from a corpus manifest")
    p.add_argument("manifest")
    p.add_argument("out_csv")
    p.add_argument("--mode", choices=["binary", "multiclass"], default="binary")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("train", help="cross-validate and train a classifier")
    p.add_argument("features_csv")
    p.add_argument("out_model")
    p.add_argument("--model", choices=sorted(FAMILIES), default="bagged")
    p.add_argument("--features", choices=sorted(features.FEATURE_GROUPS), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a CSV or manifest")
    p.add_argument("model")
    p.add_argument("data", help="feature CSV or corpus manifest JSON")
    p.add_argument("--features", choices=sorted(features.FEATURE_GROUPS), default="all")
    p.add_argument("--report", help="write the evaluation report JSON here")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("export-melspec", help="export 64x64 mel-spectrogram PNGs")
    p.add_argument("manifest")
    p.add_argument("out_dir")
    p.set_defaults(fn=cmd_export_melspec)

    p = sub.add_parser("synth-corpus", help="generate the synthetic labeled corpus")
    p.add_argument("out_dir")
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth_corpus)

    p = sub.add_parser("dump-bicoherence", help="dump a clip's bicoherence triangle as CSV")
    p.add_argument("wav")
    p.add_argument("out_csv")
    p.add_argument("--seg-len", type=int, default=256)
    p.add_argument("--overlap", type=float, default=0.5)
    p.set_defaults(fn=cmd_dump_bicoherence)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SpeechLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
