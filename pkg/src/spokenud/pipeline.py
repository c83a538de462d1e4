"""Whole-conversation conversion and corpus output."""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .conllu import DEFAULT_URL_TEMPLATE, SoundUrlTemplate, emit_utterance
from .eaf import ConversationRecord, SpeakerRecord, parse_eaf
from .errors import MetadataError, Notice, TableError
from .normalize import FillerLexicon, NormalizationTable, assign_origlang
from .overlap import annotate_overlap, compute_overlaps
from .segment import (
    DEFAULT_MAX_GAP_MS,
    SegmentationDirective,
    apply_directives,
    segment_per_tu,
    segment_turns,
    tokenize_conversation,
)

STRATEGIES = ("per-tu", "turns", "directives")
MANIFEST_NAME = "manifest.tsv"
MANIFEST_HEADER = "file\tconversation_id\tsentences\ttokens\tmodule"


@dataclass
class ConvertConfig:
    speakers: dict[str, SpeakerRecord]
    conversations: dict[str, ConversationRecord]
    strategy: str = "per-tu"
    max_gap_ms: int = DEFAULT_MAX_GAP_MS
    directives: Path | None = None
    langs: Path | None = None
    url_template: SoundUrlTemplate = field(default_factory=lambda: SoundUrlTemplate(DEFAULT_URL_TEMPLATE))
    table: NormalizationTable = field(default_factory=NormalizationTable.default)
    lexicon: FillerLexicon = field(default_factory=FillerLexicon.default)
    module: str = "unknown"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise MetadataError(f"unknown segmentation strategy {self.strategy!r}")
        if self.strategy == "directives" and self.directives is None:
            raise MetadataError("strategy 'directives' requires a directives path")
        if self.max_gap_ms < 0:
            raise MetadataError("gap must be non-negative")


@dataclass
class ConvertedConversation:
    conversation_id: str
    module_id: str
    text: str
    sentences: int
    tokens: int
    notices: list[Notice]

    @property
    def file_name(self) -> str:
        return f"{self.conversation_id}.conllu"


def side_file(path: Path | None, conversation_id: str) -> Path | None:
    """A per-conversation side file: ``DIR/{id}.tsv``, or a single file used as is."""
    if path is None:
        return None
    path = Path(path)
    if path.is_dir():
        candidate = path / f"{conversation_id}.tsv"
        return candidate if candidate.exists() else None
    return path


def convert_conversation(xml_bytes: bytes, conversation_id: str, config: ConvertConfig) -> ConvertedConversation:
    record = config.conversations.get(conversation_id)
    if record is None:
        raise MetadataError(f"conversation {conversation_id!r} is missing from the conversation store")
    module = str(record.extra.get("module") or config.module)
    conv = parse_eaf(xml_bytes, conversation_id, module)
    notices: list[Notice] = []

    missing = sorted(s for s in conv.speaker_ids if s not in config.speakers)
    if missing:
        raise MetadataError(f"{conversation_id}: speakers {', '.join(missing)} missing from the speaker store")
    if len(conv.speaker_ids) != record.participant_count:
        notices.append(Notice(
            "participants",
            f"{len(conv.speaker_ids)} speakers in transcript, {record.participant_count} participants in metadata",
            conversation_id,
        ))

    tokens = tokenize_conversation(conv, notices)
    if config.strategy == "turns":
        utts = segment_turns(conv, config.max_gap_ms, notices, tokens)
    elif config.strategy == "directives":
        path = side_file(config.directives, conversation_id)
        directives = SegmentationDirective(())
        if path is not None:
            directives = SegmentationDirective.from_tsv(path.read_text(encoding="utf-8"))
        utts = apply_directives(conv, directives, notices, tokens)
    else:
        utts = segment_per_tu(conv, notices, tokens)

    origlang = {}
    lang_path = side_file(config.langs, conversation_id)
    if lang_path is not None:
        origlang = assign_origlang(conversation_id, lang_path.read_text(encoding="utf-8"))
        emitted = {(tu_id, i) for u in utts for tu_id, i, _ in u.token_refs()}
        for tu_id, index in sorted(origlang):
            if (tu_id, index) not in emitted:
                raise TableError(
                    f"{lang_path}: entry {tu_id} {index} does not name an emitted token of {conversation_id}"
                )

    report = compute_overlaps(utts)
    blocks = []
    n_tokens = 0
    for utt in utts:
        mark = annotate_overlap(utt, report, notices)
        blocks.append(emit_utterance(
            utt, config.speakers[utt.speaker_id], mark, origlang, config.url_template,
            table=config.table, lexicon=config.lexicon,
        ))
        n_tokens += len(utt.tokens)
    return ConvertedConversation(conversation_id, module, "".join(blocks), len(utts), n_tokens, notices)


def _convert_path(args):
    path, config = args
    path = Path(path)
    return convert_conversation(path.read_bytes(), path.stem, config)


def find_eaf_files(input_dir: Path) -> list[Path]:
    return sorted(p for p in Path(input_dir).rglob("*") if p.suffix.lower() == ".eaf" and p.is_file())


def convert_paths(paths, config: ConvertConfig, jobs: int = 1) -> list[ConvertedConversation]:
    """Convert EAF files, in parallel when ``jobs > 1``; results sorted by conversation id."""
    paths = list(paths)
    dupes = sorted(s for s, n in Counter(Path(p).stem for p in paths).items() if n > 1)
    if dupes:
        raise MetadataError(f"duplicate conversation ids among inputs: {', '.join(dupes)}")
    work = [(p, config) for p in paths]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_convert_path, work, chunksize=max(1, len(work) // (jobs * 4))))
    else:
        results = [_convert_path(w) for w in work]
    return sorted(results, key=lambda r: r.conversation_id)


def write_manifest(results, out_dir: Path) -> Path:
    lines = [MANIFEST_HEADER]
    for r in sorted(results, key=lambda r: r.conversation_id):
        lines.append(f"{r.file_name}\t{r.conversation_id}\t{r.sentences}\t{r.tokens}\t{r.module_id}")
    path = Path(out_dir) / MANIFEST_NAME
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_corpus(paths, config: ConvertConfig, out_dir, jobs: int = 1) -> list[ConvertedConversation]:
    """Convert every EAF file into ``out_dir/{conversation_id}.conllu`` plus a manifest."""
    out_dir = Path(out_dir)
    results = convert_paths(paths, config, jobs)
    out_dir.mkdir(parents=True, exist_ok=True)
    for r in results:
        target = out_dir / r.file_name
        try:
            target.write_text(r.text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise OSError(f"{target}: {exc.strerror or exc}") from exc
    write_manifest(results, out_dir)
    return results


def default_jobs() -> int:
    return os.cpu_count() or 1
