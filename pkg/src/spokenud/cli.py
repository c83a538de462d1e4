"""Command line entry point: ``spokenud convert|validate|stats|sample``.

Options can also come from a ``key = value`` configuration file given with
``--config`` or the ``SPOKENUD_CONFIG`` environment variable. Keys are the
long option names with dashes replaced by underscores; a ``command.key``
entry applies to one subcommand only. Command line flags always win.

Exit status: 0 success, 1 validation found Error diagnostics, 2 usage,
configuration, input or I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .conllu import DEFAULT_URL_TEMPLATE, SoundUrlTemplate
from .eaf import load_conversation_store, load_speaker_store
from .errors import SpokenUDError
from .normalize import FillerLexicon, NormalizationTable
from .pipeline import STRATEGIES, ConvertConfig, default_jobs, emit_corpus, find_eaf_files
from .sample import DEFAULT_RATIOS, corpus_stats, plan_sample, split_plan
from .segment import DEFAULT_MAX_GAP_MS
from .validate import validate_corpus

log = logging.getLogger("spokenud")

CONFIG_ENV = "SPOKENUD_CONFIG"


class UsageError(Exception):
    pass


def read_config(path) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected key = value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(args, parser_defaults: dict):
    path = args.config or os.environ.get(CONFIG_ENV)
    config = read_config(path) if path else {}
    for dest, default in parser_defaults.items():
        if getattr(args, dest, None) is not None:
            continue
        value = config.get(f"{args.command}.{dest}", config.get(dest))
        setattr(args, dest, value if value is not None else default)


def _int(value, name):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise UsageError(f"--{name.replace('_', '-')} expects an integer, got {value!r}") from None


def _read_bytes(path, what):
    if path is None:
        raise UsageError(f"missing required --{what}")
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc.strerror or exc}") from None


def _read_text(path, what):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {what} file {path}: {exc}") from None


def _existing(path, what):
    if path is not None and not Path(path).exists():
        raise UsageError(f"{what} path {path} does not exist")
    return Path(path) if path is not None else None


def cmd_convert(args) -> int:
    if args.input is None or args.out is None:
        raise UsageError("convert needs --input and --out")
    input_dir = Path(args.input)
    if not input_dir.is_dir():
        raise UsageError(f"input directory {input_dir} does not exist")
    if args.strategy not in STRATEGIES:
        raise UsageError(f"--strategy must be one of {', '.join(STRATEGIES)}")
    if args.strategy == "directives" and not args.directives:
        raise UsageError("--strategy directives requires --directives")
    speakers = load_speaker_store(_read_bytes(args.speakers, "speakers"))
    conversations = load_conversation_store(_read_bytes(args.conversations, "conversations"))
    table = (NormalizationTable.from_tsv(_read_text(args.norm_table, "normalization table"))
             if args.norm_table else NormalizationTable.default())
    lexicon = (FillerLexicon.from_text(_read_text(args.fillers, "filler lexicon"))
               if args.fillers else FillerLexicon.default())
    config = ConvertConfig(
        speakers=speakers,
        conversations=conversations,
        strategy=args.strategy,
        max_gap_ms=_int(args.gap_ms, "gap_ms"),
        directives=_existing(args.directives, "directives"),
        langs=_existing(args.langs, "langs"),
        url_template=SoundUrlTemplate(args.url_template),
        table=table,
        lexicon=lexicon,
        module=args.module,
    )
    files = find_eaf_files(input_dir)
    jobs = _int(args.jobs, "jobs") if args.jobs is not None else default_jobs()
    results = emit_corpus(files, config, args.out, jobs=max(1, jobs))
    n_notices = 0
    for r in results:
        for notice in r.notices:
            n_notices += 1
            log.info("%s", notice)
    hint = "" if args.verbose or not n_notices else " (use -v to list)"
    print(
        f"converted {len(results)} conversation(s), {sum(r.sentences for r in results)} sentences, "
        f"{sum(r.tokens for r in results)} tokens, {n_notices} notice(s){hint}",
        file=sys.stderr,
    )
    return 0


def cmd_validate(args) -> int:
    missing = [p for p in args.paths if not Path(p).exists()]
    lexicon = (FillerLexicon.from_text(_read_text(args.fillers, "filler lexicon"))
               if args.fillers else None)
    summary = validate_corpus(args.paths, lexicon)
    for d in summary.diagnostics:
        if d.severity == "Error":
            log.error("%s", d)
        else:
            log.info("%s", d)
    if args.tsv:
        lines = ["file\tline\trule\tseverity\tmessage"] + [d.tsv() for d in summary.diagnostics]
        Path(args.tsv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    counts = ", ".join(f"{k}:{v}" for k, v in sorted(summary.counts.items())) or "none"
    print(f"validated {len(summary.files)} file(s); diagnostics: {counts}", file=sys.stderr)
    if missing or summary.fatal:
        return 2
    return summary.status


def cmd_stats(args) -> int:
    for p in args.paths:
        if not Path(p).exists():
            raise UsageError(f"path {p} does not exist")
    stats = corpus_stats(args.paths)
    sys.stdout.write(stats.to_tsv())
    return 0


def cmd_sample(args) -> int:
    if args.stats_from is None or args.target is None or args.out is None:
        raise UsageError("sample needs --stats-from, --target and --out")
    if not Path(args.stats_from).is_dir():
        raise UsageError(f"--stats-from {args.stats_from} is not a directory")
    try:
        ratios = tuple(float(x) for x in str(args.ratios).split(","))
    except ValueError:
        raise UsageError(f"--ratios expects A,B,C, got {args.ratios!r}") from None
    stats = corpus_stats([args.stats_from])
    plan = plan_sample(stats, _int(args.target, "target"), _int(args.seed, "seed"))
    plan = split_plan(plan, ratios)
    for w in plan.warnings:
        log.warning("%s", w)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(plan.to_tsv(), encoding="utf-8")
    print(f"selected {len(plan.selected_ids)} conversation(s), "
          f"{plan.achieved} of {plan.target_tokens} target tokens", file=sys.stderr)
    return 0


# option defaults resolved after the config file is read
DEFAULTS = {
    "convert": {
        "input": None, "speakers": None, "conversations": None, "out": None,
        "strategy": "per-tu", "gap_ms": DEFAULT_MAX_GAP_MS, "directives": None,
        "norm_table": None, "fillers": None, "langs": None,
        "url_template": DEFAULT_URL_TEMPLATE, "module": "unknown", "jobs": None,
    },
    "validate": {"fillers": None, "tsv": None},
    "stats": {},
    "sample": {
        "stats_from": None, "target": None, "ratios": ",".join(map(str, DEFAULT_RATIOS)),
        "seed": 0, "out": None,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spokenud", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value configuration file (also ${CONFIG_ENV})")
    common.add_argument("-v", "--verbose", action="store_true", help="also report warnings and notices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", parents=[common], help="EAF transcripts to CoNLL-U")
    p.add_argument("--input", help="directory searched recursively for .eaf files")
    p.add_argument("--speakers", help="speaker metadata JSON")
    p.add_argument("--conversations", help="conversation metadata JSON")
    p.add_argument("--out", help="output directory")
    p.add_argument("--strategy", help="per-tu (default), turns or directives")
    p.add_argument("--gap-ms", help=f"turn merging silence threshold (default {DEFAULT_MAX_GAP_MS})")
    p.add_argument("--directives", help="directive TSV, or directory of {conversation_id}.tsv")
    p.add_argument("--norm-table", help="normalization TSV (default: built-in)")
    p.add_argument("--fillers", help="filler lexicon, one per line (default: built-in)")
    p.add_argument("--langs", help="OrigLang TSV, or directory of {conversation_id}.tsv")
    p.add_argument("--url-template", help="sound URL with {conversation_id} {begin_ms} {end_ms}")
    p.add_argument("--module", help="module label for conversations whose metadata has none")
    p.add_argument("--jobs", help="worker processes (default: number of CPUs)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("validate", parents=[common], help="lint CoNLL-U files")
    p.add_argument("paths", nargs="+", help="files or directories")
    p.add_argument("--fillers", help="filler lexicon (default: built-in)")
    p.add_argument("--tsv", help="also write diagnostics as TSV to this file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", parents=[common], help="corpus statistics as TSV on stdout")
    p.add_argument("paths", nargs="*", help="converted directories or files")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample", parents=[common], help="token-budgeted sample with splits")
    p.add_argument("--stats-from", help="converted corpus directory")
    p.add_argument("--target", help="token budget")
    p.add_argument("--ratios", help="train,dev,test (default 0.8,0.1,0.1)")
    p.add_argument("--seed", help="seed for ordering equal-size conversations")
    p.add_argument("--out", help="plan TSV path")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        _apply_config(args, DEFAULTS[args.command])
        return args.func(args)
    except (UsageError, SpokenUDError, OSError) as exc:
        log.error("%s", exc)
        return 2
