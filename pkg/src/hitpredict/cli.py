"""Command-line pipeline: each subcommand reads files, writes one output directory.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import io
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from hitpredict import __version__
from hitpredict._dates import CHART_WINDOW, LISTENING_WINDOW, DateWindow
from hitpredict.canonicalize import load_featuring_tokens
from hitpredict.charts import LabelTable, build_label_table, filter_window, ingest_summary, parse_chart_csv
from hitpredict.errors import DataError, InvariantError
from hitpredict.evaluation import cross_validate, emit_report, load_reports
from hitpredict.features import build_audio_dataset, build_listening_dataset, load_dataset, save_dataset
from hitpredict.learners import ModelSpec, resolve_algorithm
from hitpredict.scrobbles import clean_scrobbles, parse_scrobbles, scrobbles_csv
from hitpredict.synth import SynthConfig, generate

log = logging.getLogger("hitpredict")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _window(text: str) -> DateWindow:
    try:
        return DateWindow.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _algorithms(text: str) -> list[str]:
    try:
        return [resolve_algorithm(a) for a in text.split(",") if a.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="")


def _featuring(args):
    return load_featuring_tokens(args.feat_tokens) if args.feat_tokens else None


def write_manifest(out: Path, args, digests: dict, seed: int | None = None) -> None:
    flags = {
        k: (str(v) if isinstance(v, (Path, DateWindow)) else [str(x) for x in v] if isinstance(v, list) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("func", "command")
    }
    manifest = {
        "subcommand": args.command,
        "flags": flags,
        "input_digests": digests,
        "seed": seed,
        "tool_version": __version__,
        "created_at": dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    _write(out / "manifest.json", json.dumps(manifest, sort_keys=True, indent=1) + "\n")


def _out_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    return path


# --------------------------------------------------------------------------
# subcommands


def cmd_ingest_charts(args) -> dict:
    text = _read_text(args.input)
    result = parse_chart_csv(io.StringIO(text), _featuring(args), args.max_reject_fraction, str(args.input))
    entries = filter_window(result, args.window)
    out_of_window = len(result) - len(entries)
    table = build_label_table(entries, args.top_n)
    out = _out_dir(args.out)
    _write(out / "labels.json", table.to_json())
    _write(out / "rejects.csv", result.rejects_csv())
    summary = dict(ingest_summary(entries, table), rows_read=result.rows_read, rejected=len(result.rejects),
                   out_of_window=out_of_window, window=str(args.window))
    _write(out / "summary.json", json.dumps(summary, sort_keys=True, indent=1) + "\n")
    write_manifest(out, args, {"input": file_digest(args.input)})
    log.info("%s: %d entries, %d hits, %d non-hits, %d rejects", args.input, len(entries), summary["hits"],
             summary["nonhits"], len(result.rejects))
    return summary


def cmd_ingest_scrobbles(args) -> dict:
    text = _read_text(args.input)
    result = parse_scrobbles(io.StringIO(text), _featuring(args), args.max_reject_fraction, str(args.input))
    cleaned = clean_scrobbles(result, args.window, args.near_duplicate_seconds)
    out = _out_dir(args.out)
    _write(out / "scrobbles.csv", scrobbles_csv(cleaned))
    _write(out / "rejects.csv", result.rejects_csv())
    summary = dict(cleaned.summary(), rows_read=result.rows_read, rejected=len(result.rejects), window=str(args.window))
    _write(out / "cleaning.json", json.dumps(summary, sort_keys=True, indent=1) + "\n")
    write_manifest(out, args, {"input": file_digest(args.input)})
    log.info("%s: %d retained of %d parsed, %d rejects", args.input, len(cleaned), len(result), len(result.rejects))
    return summary


def cmd_build_features(args) -> dict:
    labels_path = args.labels / "labels.json"
    labels = LabelTable.from_json(_read_text(labels_path))
    digests = {"labels": file_digest(labels_path)}
    config = {"mode": args.mode}
    if args.mode == "listening":
        scrobble_path = args.scrobbles / "scrobbles.csv"
        cleaning = json.loads(_read_text(args.scrobbles / "cleaning.json"))
        window = args.window or DateWindow.parse(cleaning["window"])
        scrobbles = parse_scrobbles(io.StringIO(_read_text(scrobble_path)), source=str(scrobble_path))
        if scrobbles.rejects:
            raise DataError(f"{scrobble_path}:{scrobbles.rejects[0].line}: {scrobbles.rejects[0].reason}")
        data = build_listening_dataset(scrobbles, labels, window, args.count_mode, args.include_post_hit)
        digests["scrobbles"] = file_digest(scrobble_path)
        config.update(count_mode=args.count_mode, include_post_hit=args.include_post_hit, window=str(window))
    else:
        meta = _read_text(args.meta_features).split() if args.meta_features else []
        data = build_audio_dataset(io.StringIO(_read_text(args.audio_csv)), labels, args.feature_set, meta,
                                   _featuring(args), source=str(args.audio_csv))
        digests["audio_csv"] = file_digest(args.audio_csv)
        if args.meta_features:
            digests["meta_features"] = file_digest(args.meta_features)
        config.update(feature_set=args.feature_set, meta_features=sorted(meta))
    out = _out_dir(args.out)
    save_dataset(data, out, config, digests)
    write_manifest(out, args, digests)
    log.info("dataset %s rows x %s features, %d positives", *data.shape, int(data.labels.sum()))
    return {"rows": data.shape[0], "features": data.shape[1], "positives": int(data.labels.sum()), "join": data.report["join"]}


def cmd_evaluate(args) -> dict:
    data = load_dataset(args.dataset)
    name = args.name or args.dataset.name
    reports = []
    for algorithm in args.algorithms:
        hp = {"C": args.svm_c} if algorithm == "linear_svm" and args.svm_c is not None else {}
        spec = ModelSpec(algorithm, hp, args.seed)
        log.info("%s: %d-fold CV of %s", name, args.k, spec.short_name)
        reports.append(cross_validate(spec, data, args.k, args.seed, name))
    digests = {"features": file_digest(next(p for p in sorted(args.dataset.glob("features*.csv")))),
               "meta": file_digest(args.dataset / "meta.json")}
    out = _out_dir(args.out)
    emit_report(reports, out, digests)
    write_manifest(out, args, digests, args.seed)
    return {r.spec.short_name: {"mean_auc": r.mean_auc, "pooled_auc": r.pooled_roc.auc} for r in reports}


def cmd_synth(args) -> dict:
    try:
        config = SynthConfig.from_json_file(args.config)
    except OSError as exc:
        raise DataError(f"{args.config}: {exc.strerror or exc}") from exc
    except (ValueError, TypeError) as exc:
        raise DataError(f"{args.config}: {exc}") from exc
    corpus = generate(config)
    out = _out_dir(args.out)
    corpus.write(out)
    write_manifest(out, args, {"config": file_digest(args.config)}, config.seed)
    return {"hits": len(corpus.truth["hits"]), "nonhits": len(corpus.truth["nonhits"]),
            "scrobbles": corpus.truth["n_scrobbles"], "window": corpus.truth["window"]}


def cmd_report(args) -> dict:
    reports = [r for run in args.runs for r in load_reports(run)]
    digests = {f"run{i}": file_digest(run / "run.json") for i, run in enumerate(args.runs) if (run / "run.json").exists()}
    out = _out_dir(args.out)
    emit_report(reports, out, digests)
    write_manifest(out, args, digests)
    return {r.name: r.mean_auc for r in reports}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a one-line JSON summary on stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="hitpredict", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"hitpredict {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def ingest_flags(p):
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--out", type=Path, required=True)
        p.add_argument("--feat-tokens", type=Path, help="featuring tokens, one per line")
        p.add_argument("--max-reject-fraction", type=float, default=0.10)

    p = sub.add_parser("ingest-charts", parents=[common], help="parse charts and derive hit labels")
    ingest_flags(p)
    p.add_argument("--top-n", type=int, default=20)
    p.add_argument("--window", type=_window, default=CHART_WINDOW, help="START..END (YYYY-MM-DD)")
    p.set_defaults(func=cmd_ingest_charts)

    p = sub.add_parser("ingest-scrobbles", parents=[common], help="parse and clean listening records")
    ingest_flags(p)
    p.add_argument("--window", type=_window, default=LISTENING_WINDOW, help="START..END (YYYY-MM-DD)")
    p.add_argument("--near-duplicate-seconds", type=int, default=0)
    p.set_defaults(func=cmd_ingest_scrobbles)

    p = sub.add_parser("build-features", parents=[common], help="build a listening or audio dataset")
    p.add_argument("--mode", choices=["listening", "audio"], required=True)
    p.add_argument("--labels", type=Path, required=True, help="ingest-charts output directory")
    p.add_argument("--scrobbles", type=Path, help="ingest-scrobbles output directory")
    p.add_argument("--audio-csv", type=Path)
    p.add_argument("--feature-set", choices=["meta", "audio"], default="meta")
    p.add_argument("--meta-features", type=Path, help="meta feature names, whitespace separated")
    p.add_argument("--count-mode", choices=["cumulative", "weekly"], default="cumulative")
    p.add_argument("--include-post-hit", action="store_true")
    p.add_argument("--window", type=_window, help="override the listening window")
    p.add_argument("--feat-tokens", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_build_features)

    p = sub.add_parser("evaluate", parents=[common], help="k-fold CV of one or more learners")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--algorithms", type=_algorithms, default=_algorithms("lr,nb,svm,tree,rules"))
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--name", help="row label in the AUC table (default: dataset directory name)")
    p.add_argument("--svm-c", type=float)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--config", type=Path, required=True, help="JSON SynthConfig")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common], help="merge evaluate runs into one table")
    p.add_argument("--runs", type=Path, nargs="+", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_report)
    return parser


def _check_flag_dependencies(args) -> None:
    if args.command == "build-features":
        if args.mode == "listening" and args.scrobbles is None:
            raise UsageError("build-features --mode listening requires --scrobbles")
        if args.mode == "audio" and args.audio_csv is None:
            raise UsageError("build-features --mode audio requires --audio-csv")
        if args.feature_set == "audio" and args.meta_features is None:
            raise UsageError("--feature-set audio requires --meta-features")
    if args.command == "evaluate" and args.k < 2:
        raise UsageError("--k must be at least 2")
    if args.command == "ingest-charts" and args.top_n < 1:
        raise UsageError("--top-n must be at least 1")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_flag_dependencies(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="hitpredict: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        summary = args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.json:
        print(json.dumps(summary, sort_keys=True, separators=(",", ":")))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
