"""Command-line front door.

Each subcommand wraps one module; the only logic here is file plumbing
and flag parsing. Reports go to stdout as JSON, logs to stderr, so
`natiq eval wer ... | jq` works. Exit codes: 0 ok, 1 bad input, 2 bug.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .audio import read_wav, write_wav
from .diacritizer import (
    DiacritizerBackend,
    EchoBackend,
    FailurePolicy,
    HttpBackend,
    TableBackend,
    diacritize,
)
from .evaluation import (
    EvalReport,
    EvalRow,
    char_error_rate,
    is_real_time,
    real_time_factor,
    word_error_rate,
)
from .manifest import ManifestRow, write_manifest
from .mos import (
    aggregate_mos,
    assign_raters,
    build_pool,
    load_study,
    record_rating,
    save_study,
)
from .normalizer import Case, Gender, NormalizeConfig, normalize
from .pipeline import run_pipeline
from .segmenter import (
    DEFAULT_MAX_SEGMENT_S,
    DEFAULT_MIN_SILENCE_S,
    DEFAULT_THRESHOLD_DB,
    detect_silences,
    pair_marks,
    segment,
)
from .synth import DEFAULT_OUTPUT_RATE, list_voices

log = logging.getLogger("natiq")

DEFAULT_SEED = 1337


class InputError(Exception):
    """User-correctable problem: missing file, bad flag, malformed data."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on flag errors; bad flags are input errors here.
    def error(self, message):
        raise InputError(message)


def _read_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return [line for line in text.splitlines() if line.strip()]


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def _print_json(payload: dict) -> None:
    json.dump(payload, sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")


def _normalize_config(args) -> NormalizeConfig:
    return NormalizeConfig(gender=Gender(args.gender), case=Case(args.case))


def _backend_from_flags(args) -> DiacritizerBackend:
    if getattr(args, "endpoint", None) and getattr(args, "table", None):
        raise InputError("--endpoint and --table are mutually exclusive")
    if getattr(args, "endpoint", None):
        return HttpBackend(args.endpoint)
    if getattr(args, "table", None):
        try:
            table = json.loads(Path(args.table).read_text(encoding="utf-8-sig"))
        except OSError as exc:
            raise InputError(f"cannot read {args.table}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.table} is not valid JSON: {exc}") from None
        if not isinstance(table, dict):
            raise InputError(f"{args.table} must map words to vowelized words")
        try:
            return TableBackend(table)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return EchoBackend()


def _input_lines(args) -> list[str]:
    if args.text is not None and args.text_file is not None:
        raise InputError("--text and --text-file are mutually exclusive")
    if args.text is not None:
        if not args.text.strip():
            raise InputError("--text is empty")
        return [args.text]
    if args.text_file is not None:
        lines = _read_lines(args.text_file)
        if not lines:
            raise InputError(f"{args.text_file} has no non-empty lines")
        return lines
    raise InputError("one of --text or --text-file is required")


# --- subcommands ---------------------------------------------------


def cmd_normalize(args) -> int:
    config = _normalize_config(args)
    out_lines = [normalize(line, config).text for line in _input_lines(args)]
    body = "\n".join(out_lines) + "\n"
    if args.out:
        _write_text(args.out, body)
    else:
        sys.stdout.write(body)
    return 0


def cmd_diacritize(args) -> int:
    backend = _backend_from_flags(args)
    policy = FailurePolicy(args.policy)
    out_lines = [
        diacritize(line, backend, policy).content for line in _input_lines(args)
    ]
    body = "\n".join(out_lines) + "\n"
    if args.out:
        _write_text(args.out, body)
    else:
        sys.stdout.write(body)
    return 0


def _synth_one(text: str, args):
    return run_pipeline(
        text,
        voice=args.voice,
        output_rate=args.rate,
        backend=_backend_from_flags(args),
        policy=FailurePolicy(args.policy),
        normalize_config=_normalize_config(args),
    )


def cmd_synth(args) -> int:
    lines = _input_lines(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Threads may finish out of order; indexing keeps output order stable.
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(lambda line: _synth_one(line, args), lines))
    written = []
    for index, result in enumerate(results, start=1):
        path = out_dir / f"{args.prefix}-{index:04d}.wav"
        write_wav(path, result.waveform)
        written.append(
            {
                "file": path.name,
                "text": lines[index - 1],
                "duration_s": round(result.waveform.duration_s, 4),
                "rtf": result.rtf,
            }
        )
    _print_json({"voice": args.voice, "rate": args.rate, "utterances": written})
    return 0


def cmd_segment(args) -> int:
    wave = read_wav(args.audio)
    transcript = Path(args.transcript).read_text(encoding="utf-8-sig").strip()
    if not transcript:
        raise InputError(f"{args.transcript} is empty")
    silences = detect_silences(wave, args.threshold_db, args.min_silence)
    marks = pair_marks(transcript, silences)
    segments = segment(
        wave,
        transcript,
        silences,
        args.target_mean,
        marks=marks,
        max_duration_s=args.max_duration,
        id_prefix=args.prefix,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for seg in segments:
        write_wav(out_dir / f"{seg.id}.wav", seg.audio)
        rows.append(
            ManifestRow(
                id=seg.id,
                raw_transcript=seg.transcript,
                diacritized_transcript=seg.transcript,
            )
        )
    write_manifest(out_dir / "manifest.psv", rows)
    _print_json(
        {
            "segments": len(segments),
            "mean_duration_s": round(
                sum(s.duration_s for s in segments) / len(segments), 3
            ),
            "warnings": sorted({w for s in segments for w in s.warnings}),
            "manifest": str(out_dir / "manifest.psv"),
        }
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    config = load_config(args.config) if args.config else load_config()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    uvicorn.run(create_app(config), host=config.host, port=config.port)
    return 0


def _corpus_error_rate(refs, hyps, metric) -> tuple[float, list]:
    """Pool edits over the corpus: 100 * sum(errors) / sum(ref length)."""
    if len(refs) != len(hyps):
        raise InputError(
            f"line count mismatch: {len(refs)} references vs {len(hyps)} hypotheses"
        )
    traces = []
    errors = 0
    length = 0
    for index, (ref, hyp) in enumerate(zip(refs, hyps), start=1):
        _, trace = metric(ref, hyp)
        traces.append((f"utt-{index:04d}", trace))
        errors += trace.cost
        length += trace.reference_length
    if length == 0:
        raise InputError("references are empty after normalization")
    return 100.0 * errors / length, traces


def cmd_eval_text_metric(args, metric_name: str) -> int:
    metric = word_error_rate if metric_name == "wer" else char_error_rate
    refs = _read_lines(args.ref)
    hyps = _read_lines(args.hyp)
    percent, traces = _corpus_error_rate(refs, hyps, metric)
    payload = {
        "metric": metric_name,
        metric_name: round(percent, 4),
        "n_utterances": len(refs),
        "errors": sum(t.cost for _, t in traces),
        "reference_length": sum(t.reference_length for _, t in traces),
    }
    if args.out_dir:
        report = EvalReport(
            rows=[
                EvalRow(
                    model=args.model,
                    voice=args.voice_label,
                    wer=percent if metric_name == "wer" else None,
                    cer=percent if metric_name == "cer" else None,
                    n_utterances=len(refs),
                )
            ],
            metadata={"metric": metric_name},
        )
        from .reporting import write_eval_outputs

        files = write_eval_outputs(args.out_dir, report, diffs=traces)
        payload["files"] = [str(f) for f in files]
    _print_json(payload)
    return 0


def cmd_eval_rtf(args) -> int:
    lines = _input_lines(args)
    synth_s = 0.0
    audio_s = 0.0
    per_utt = []
    for line in lines:
        result = run_pipeline(line, voice=args.voice, output_rate=args.rate)
        synth_s += result.timings.synth_s
        audio_s += result.waveform.duration_s
        per_utt.append(result.rtf)
    rtf = real_time_factor(synth_s, audio_s)
    payload = {
        "metric": "rtf",
        "rtf": rtf,
        "real_time": is_real_time(rtf),
        "n_utterances": len(lines),
        "synth_s": round(synth_s, 6),
        "audio_s": round(audio_s, 4),
        "worst_utterance_rtf": max(per_utt),
    }
    if args.out_dir:
        report = EvalReport(
            rows=[
                EvalRow(
                    model=args.model,
                    voice=args.voice,
                    rtf=rtf,
                    n_utterances=len(lines),
                )
            ],
            metadata={"metric": "rtf"},
        )
        from .reporting import write_eval_outputs

        payload["files"] = [str(f) for f in write_eval_outputs(args.out_dir, report)]
    _print_json(payload)
    return 0


def cmd_mos_build(args) -> int:
    sentences = _read_lines(args.sentences)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    voices = [v.strip() for v in args.voices.split(",") if v.strip()]
    if not models or not voices:
        raise InputError("--models and --voices must each name at least one entry")

    audio_dir = Path(args.audio_dir) if args.audio_dir else None
    if audio_dir:
        audio_dir.mkdir(parents=True, exist_ok=True)

    def synth_fn(text: str, model: str, voice: str) -> str:
        digest = hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]
        name = f"{model}.{voice}.{digest}.wav"
        if audio_dir is None:
            return name
        result = run_pipeline(text, voice=voice, output_rate=args.rate)
        write_wav(audio_dir / name, result.waveform)
        return str(audio_dir / name)

    study = build_pool(sentences, models, voices, synth_fn)
    save_study(args.study, study)
    _print_json(
        {
            "study": args.study,
            "pool": len(study.pool),
            "skipped": study.metadata.get("skipped", 0),
        }
    )
    return 0


def cmd_mos_assign(args) -> int:
    study = load_study(args.study)
    try:
        assignments = assign_raters(study, args.raters, args.per_rater, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    save_study(args.study, study)
    _print_json(
        {
            "study": args.study,
            "raters": len(assignments),
            "per_rater": args.per_rater,
            "seed": args.seed,
        }
    )
    return 0


def cmd_mos_rate(args) -> int:
    study = load_study(args.study)
    applied = 0
    for lineno, line in enumerate(_read_lines(args.ratings), start=1):
        try:
            doc = json.loads(line)
            record_rating(study, doc["rater"], doc["entry_id"], doc["score"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"{args.ratings} line {lineno}: {exc}") from None
        except ValueError as exc:
            raise InputError(f"{args.ratings} line {lineno}: {exc}") from None
        applied += 1
    save_study(args.study, study)
    _print_json({"study": args.study, "ratings_applied": applied})
    return 0


def cmd_mos_report(args) -> int:
    study = load_study(args.study)
    cells = aggregate_mos(study)
    payload = {
        "cells": [
            {"model": m, "voice": v, "mean": round(c.mean, 4), "count": c.count}
            for (m, v), c in cells.items()
        ],
        "n_ratings": len(study.ratings),
        "n_pool": len(study.pool),
    }
    if args.out_dir:
        from .reporting import write_mos_outputs

        payload["files"] = [str(f) for f in write_mos_outputs(args.out_dir, study)]
    _print_json(payload)
    return 0


# --- parser --------------------------------------------------------


def _add_text_source(parser):
    parser.add_argument("--text", help="one utterance given inline")
    parser.add_argument("--text-file", help="utterances, one per line")


def _add_normalize_flags(parser):
    parser.add_argument(
        "--gender",
        choices=[g.value for g in Gender],
        default=Gender.MASCULINE.value,
        help="gender agreement for spelled-out numbers",
    )
    parser.add_argument(
        "--case",
        choices=[c.value for c in Case],
        default=Case.ACCUSATIVE_GENITIVE.value,
        help="grammatical case for spelled-out numbers",
    )


def _add_backend_flags(parser):
    parser.add_argument("--endpoint", help="HTTP diacritizer base URL")
    parser.add_argument("--table", help="JSON word table used as the diacritizer")
    parser.add_argument(
        "--policy",
        choices=[p.value for p in FailurePolicy],
        default=FailurePolicy.PASSTHROUGH.value,
        help="on backend failure: fail the run or pass text through",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="natiq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="spell out digits, dates, abbreviations")
    _add_text_source(p)
    _add_normalize_flags(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("diacritize", help="restore short vowels")
    _add_text_source(p)
    _add_backend_flags(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_diacritize)

    p = sub.add_parser("synth", help="text to WAV files")
    _add_text_source(p)
    _add_normalize_flags(p)
    _add_backend_flags(p)
    p.add_argument("--voice", default="hamza", choices=list_voices())
    p.add_argument("--rate", type=int, default=DEFAULT_OUTPUT_RATE)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prefix", default="utt", help="output file name prefix")
    p.add_argument("--jobs", type=int, default=2, help="parallel synthesis workers")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", help="cut a long recording at silences")
    p.add_argument("--audio", required=True, help="input WAV")
    p.add_argument("--transcript", required=True, help="matching transcript file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--target-mean", type=float, default=10.0)
    p.add_argument("--max-duration", type=float, default=DEFAULT_MAX_SEGMENT_S)
    p.add_argument("--threshold-db", type=float, default=DEFAULT_THRESHOLD_DB)
    p.add_argument("--min-silence", type=float, default=DEFAULT_MIN_SILENCE_S)
    p.add_argument("--prefix", default="seg")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="error rates and timing")
    eval_sub = p.add_subparsers(dest="eval_metric", required=True)
    for metric_name in ("wer", "cer"):
        q = eval_sub.add_parser(metric_name)
        q.add_argument("--ref", required=True, help="reference text, one per line")
        q.add_argument("--hyp", required=True, help="hypothesis text, one per line")
        q.add_argument("--out-dir", help="also write report files and charts here")
        q.add_argument("--model", default="system", help="label for the report row")
        q.add_argument("--voice-label", default="-", help="label for the report row")
        q.set_defaults(func=lambda a, m=metric_name: cmd_eval_text_metric(a, m))
    q = eval_sub.add_parser("rtf")
    _add_text_source(q)
    q.add_argument("--voice", default="hamza", choices=list_voices())
    q.add_argument("--rate", type=int, default=DEFAULT_OUTPUT_RATE)
    q.add_argument("--out-dir", help="also write report files and charts here")
    q.add_argument("--model", default="reference")
    q.set_defaults(func=cmd_eval_rtf)

    p = sub.add_parser("mos", help="listening study bookkeeping")
    mos_sub = p.add_subparsers(dest="mos_step", required=True)
    q = mos_sub.add_parser("build")
    q.add_argument("--sentences", required=True, help="text file, one per line")
    q.add_argument("--models", required=True, help="comma-separated config labels")
    q.add_argument("--voices", required=True, help="comma-separated voice names")
    q.add_argument("--study", required=True, help="study JSON to write")
    q.add_argument("--audio-dir", help="synthesize stimuli into this directory")
    q.add_argument("--rate", type=int, default=DEFAULT_OUTPUT_RATE)
    q.set_defaults(func=cmd_mos_build)
    q = mos_sub.add_parser("assign")
    q.add_argument("--study", required=True)
    q.add_argument("--raters", type=int, required=True)
    q.add_argument("--per-rater", type=int, default=15)
    q.add_argument(
        "--seed", type=int, default=DEFAULT_SEED, help="assignment sampling seed"
    )
    q.set_defaults(func=cmd_mos_assign)
    q = mos_sub.add_parser("rate")
    q.add_argument("--study", required=True)
    q.add_argument(
        "--ratings",
        required=True,
        help='JSONL: {"rater": ..., "entry_id": ..., "score": 1-5} per line',
    )
    q.set_defaults(func=cmd_mos_rate)
    q = mos_sub.add_parser("report")
    q.add_argument("--study", required=True)
    q.add_argument("--out-dir", help="also write mos.json/tsv and chart here")
    q.set_defaults(func=cmd_mos_report)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"natiq: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as exc:
        print(f"natiq: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        if args.verbose:
            log.exception("command failed")
        print(f"natiq: internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
