"""Speech-extended CoNLL-U: token rows, sentence blocks and a strict reader."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .eaf import SpeakerRecord
from .errors import ConlluParseError, EmitError, TemplateError
from .normalize import FillerLexicon, NormalizationTable, is_filler, normalize_form
from .overlap import OverlapMark

MISC_ORDER = ("AlignBegin", "AlignEnd", "Intonation", "PauseAfter", "Overlap", "OrigLang", "AttachTo", "Rel")
_MISC_RANK = {key: i for i, key in enumerate(MISC_ORDER)}

METADATA_ORDER = ("sent_id", "speaker_id", "sound_url", "overlap", "text", "text_jefferson")
REQUIRED_METADATA = ("sent_id", "speaker_id", "sound_url", "text", "text_jefferson")

DEFAULT_URL_TEMPLATE = "https://example.org/audio/{conversation_id}?start={begin_ms}&end={end_ms}"


def _misc_key(pair):
    return _MISC_RANK.get(pair[0], len(MISC_ORDER))


@dataclass(frozen=True)
class ConlluToken:
    id: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: str = "_"
    deprel: str = "_"
    deps: str = "_"
    misc: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.id < 1:
            raise EmitError(f"token id must be positive, got {self.id}")
        for name in ("form", "lemma", "upos", "xpos", "feats", "head", "deprel", "deps"):
            value = getattr(self, name)
            if "\t" in value or "\n" in value or "\r" in value:
                raise EmitError(f"token {self.id}: {name} contains a tab or newline")
        # stable sort: known keys in fixed order, anything else after them
        object.__setattr__(self, "misc", tuple(sorted(self.misc, key=_misc_key)))

    def misc_dict(self) -> dict[str, str]:
        return dict(self.misc)

    def misc_text(self) -> str:
        return "|".join(f"{k}={v}" for k, v in self.misc) or "_"

    def line(self) -> str:
        cols = [str(self.id), self.form, self.lemma, self.upos, self.xpos, self.feats,
                self.head, self.deprel, self.deps, self.misc_text()]
        return "\t".join(c if c else "_" for c in cols)


class SoundUrlTemplate:
    PLACEHOLDERS = ("{conversation_id}", "{begin_ms}", "{end_ms}")

    def __init__(self, template: str):
        for ph in self.PLACEHOLDERS:
            count = template.count(ph)
            if count != 1:
                raise TemplateError(
                    f"sound URL template must contain {ph} exactly once (found {count})"
                )
        if any(c in template for c in "\t\r\n"):
            raise TemplateError("sound URL template must not contain whitespace control characters")
        self.template = template

    def __repr__(self):
        return f"SoundUrlTemplate({self.template!r})"


def build_sound_url(tpl: SoundUrlTemplate, conversation_id: str, begin_ms: int, end_ms: int) -> str:
    if begin_ms > end_ms:
        raise EmitError(f"sound URL span [{begin_ms}, {end_ms}] is inverted")
    return (tpl.template
            .replace("{conversation_id}", conversation_id)
            .replace("{begin_ms}", str(begin_ms))
            .replace("{end_ms}", str(end_ms)))


def attach_coconstruction(token: ConlluToken, target_sent_id: str, relation: str, sent_id: str | None = None) -> ConlluToken:
    """Point ``token`` at a head in another sentence via ``AttachTo``/``Rel``."""
    if not target_sent_id:
        raise EmitError("AttachTo target must be a non-empty sent_id")
    if not relation:
        raise EmitError(f"token {token.id}: empty relation for AttachTo={target_sent_id}")
    if sent_id is not None and target_sent_id == sent_id:
        raise EmitError(f"token {token.id}: AttachTo cannot reference its own sentence {sent_id}")
    for value in (target_sent_id, relation):
        if any(c in value for c in "|=\t\n "):
            raise EmitError(f"token {token.id}: {value!r} is not a valid MISC value")
    misc = tuple(p for p in token.misc if p[0] not in ("AttachTo", "Rel"))
    return replace(token, misc=misc + (("AttachTo", target_sent_id), ("Rel", relation)))


def utterance_rows(utt, overlap: OverlapMark | None = None, origlang=None,
                   table: NormalizationTable | None = None,
                   lexicon: FillerLexicon | None = None) -> list[ConlluToken]:
    toks = utt.tokens
    if not toks:
        raise EmitError(f"{utt.sent_id}: cannot emit an empty utterance")
    table = NormalizationTable.default() if table is None else table
    lexicon = FillerLexicon.default() if lexicon is None else lexicon
    origlang = origlang or {}
    marks = overlap.token_marks if overlap is not None else (False,) * len(toks)
    last = len(toks)
    rows = []
    for n, (tu_id, index, tok) in enumerate(utt.token_refs(), 1):
        form = normalize_form(tok.surface, table)
        misc = []
        if n == 1:
            misc.append(("AlignBegin", str(utt.begin_ms)))
        if n == last:
            misc.append(("AlignEnd", str(utt.end_ms)))
        if tok.intonation is not None:
            misc.append(("Intonation", tok.intonation.value))
        if tok.pause_after:
            misc.append(("PauseAfter", "Yes"))
        if marks[n - 1]:
            misc.append(("Overlap", "Yes"))
        lang = origlang.get((tu_id, index))
        if lang is not None:
            misc.append(("OrigLang", str(lang)))
        upos = "INTJ" if is_filler(form, lexicon) else "_"
        rows.append(ConlluToken(n, form, upos=upos, misc=tuple(misc)))
    return rows


def format_block(metadata: dict[str, str], rows) -> str:
    lines = []
    for key in METADATA_ORDER:
        if metadata.get(key) is not None:
            lines.append(f"# {key} = {metadata[key]}")
    for key, value in metadata.items():
        if key not in METADATA_ORDER and value is not None:
            lines.append(f"# {key} = {value}")
    for key, value in metadata.items():
        if value is not None and ("\n" in value or "\r" in value):
            raise EmitError(f"metadata {key} contains a newline")
    lines.extend(row.line() for row in rows)
    return "\n".join(lines) + "\n\n"


def emit_utterance(utt, speaker: SpeakerRecord, overlap: OverlapMark | None,
                   origlang, tpl: SoundUrlTemplate, *,
                   table: NormalizationTable | None = None,
                   lexicon: FillerLexicon | None = None) -> str:
    """Render one utterance as a CoNLL-U block ending in a blank line."""
    if speaker.speaker_id != utt.speaker_id:
        raise EmitError(
            f"{utt.sent_id}: speaker record {speaker.speaker_id} does not match {utt.speaker_id}"
        )
    rows = utterance_rows(utt, overlap, origlang, table, lexicon)
    metadata = {
        "sent_id": utt.sent_id,
        "speaker_id": utt.speaker_id,
        "sound_url": build_sound_url(tpl, utt.conversation_id, utt.begin_ms, utt.end_ms),
        "overlap": overlap.metadata if overlap is not None else None,
        "text": " ".join(r.form for r in rows),
        "text_jefferson": utt.text_jefferson,
    }
    return format_block(metadata, rows)


@dataclass
class Sentence:
    line: int
    metadata: dict[str, str] = field(default_factory=dict)
    tokens: list[ConlluToken] = field(default_factory=list)

    @property
    def sent_id(self) -> str | None:
        return self.metadata.get("sent_id")


def iter_blocks(text: str):
    """Yield ``(first_line_number, [(line_number, line), ...])`` per blank-line separated block."""
    block = []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        if line.strip() == "":
            if block:
                yield block[0][0], block
                block = []
        else:
            block.append((lineno, line))
    if block:
        yield block[0][0], block


def parse_misc(text: str) -> tuple[tuple[str, str], ...]:
    if text == "_":
        return ()
    pairs = []
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"MISC item {item!r} is not key=value")
        pairs.append((key, value))
    return tuple(pairs)


def read_conllu(text: str, file: str | None = None) -> list[Sentence]:
    """Strictly parse CoNLL-U text; raise :class:`ConlluParseError` on any malformed line."""
    sentences = []
    for start, block in iter_blocks(text):
        sent = Sentence(start)
        for lineno, line in block:
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    sent.metadata[key.strip()] = value.strip()
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConlluParseError(f"expected 10 columns, found {len(cols)}", file, lineno)
            try:
                tok_id = int(cols[0])
            except ValueError:
                raise ConlluParseError(f"unsupported token id {cols[0]!r}", file, lineno) from None
            if tok_id != len(sent.tokens) + 1:
                raise ConlluParseError(f"token id {tok_id} out of sequence", file, lineno)
            try:
                misc = parse_misc(cols[9])
            except ValueError as exc:
                raise ConlluParseError(str(exc), file, lineno) from None
            try:
                sent.tokens.append(ConlluToken(tok_id, *cols[1:9], misc=misc))
            except EmitError as exc:
                raise ConlluParseError(str(exc), file, lineno) from None
        if not sent.tokens:
            raise ConlluParseError("sentence block without tokens", file, start)
        sentences.append(sent)
    return sentences
