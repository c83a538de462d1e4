"""Grouping transcription units into sentence-like utterances.

Three strategies are available: one utterance per unit, merging a speaker's
consecutive units into turns, and explicit grouping from a directive file
(illocutionary units prepared by annotators).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .eaf import Conversation, TranscriptionUnit
from .errors import Notice, SegmentationError
from .jefferson import JeffersonToken, render_text_jefferson, tokenize_jefferson

DEFAULT_MAX_GAP_MS = 500


@dataclass(frozen=True)
class Utterance:
    sent_id: str
    speaker_id: str
    units: tuple[tuple[TranscriptionUnit, tuple[JeffersonToken, ...]], ...]

    @property
    def conversation_id(self) -> str:
        return self.units[0][0].conversation_id

    @property
    def source_tus(self) -> tuple[TranscriptionUnit, ...]:
        return tuple(tu for tu, _ in self.units)

    @property
    def tokens(self) -> list[JeffersonToken]:
        return [tok for _, toks in self.units for tok in toks]

    def token_refs(self):
        """Yield ``(tu_id, 1-based index within the unit, token)`` in order."""
        for tu, toks in self.units:
            for i, tok in enumerate(toks, 1):
                yield tu.tu_id, i, tok

    @property
    def begin_ms(self) -> int:
        return min(tu.begin_ms for tu, _ in self.units)

    @property
    def end_ms(self) -> int:
        return max(tu.end_ms for tu, _ in self.units)

    @property
    def text_jefferson(self) -> str:
        return render_text_jefferson(" ".join(tu.raw_jefferson for tu, _ in self.units))


def make_sent_id(conversation_id: str, index: int) -> str:
    return f"{conversation_id}-{index:05d}"


def tokenize_conversation(conv: Conversation, diagnostics: list | None = None):
    """Lex every unit; returns ``{tu_id: tuple of tokens}``."""
    out = {}
    for tu in conv.tus:
        notes = []
        out[tu.tu_id] = tuple(tokenize_jefferson(tu.raw_jefferson, notes))
        if diagnostics is not None:
            where = f"{conv.conversation_id}/{tu.tu_id}"
            diagnostics.extend(Notice(n.code, n.message, f"{where} {n.where}") for n in notes)
    return out


def _keep(conv, tu, tokens, diagnostics):
    if tokens[tu.tu_id]:
        return True
    if diagnostics is not None:
        diagnostics.append(Notice(
            "empty-unit",
            "unit has no orthographic tokens; dropped",
            f"{conv.conversation_id}/{tu.tu_id}",
        ))
    return False


def _finish(conv, groups, tokens):
    groups.sort(key=lambda g: (g[0].begin_ms, g[0].speaker_id, g[0].tu_id))
    return [
        Utterance(
            make_sent_id(conv.conversation_id, i),
            group[0].speaker_id,
            tuple((tu, tokens[tu.tu_id]) for tu in group),
        )
        for i, group in enumerate(groups, 1)
    ]


def segment_per_tu(conv: Conversation, diagnostics: list | None = None, tokens=None) -> list[Utterance]:
    if tokens is None:
        tokens = tokenize_conversation(conv, diagnostics)
    groups = [[tu] for tu in conv.tus if _keep(conv, tu, tokens, diagnostics)]
    return _finish(conv, groups, tokens)


def segment_turns(
    conv: Conversation,
    max_gap_ms: int = DEFAULT_MAX_GAP_MS,
    diagnostics: list | None = None,
    tokens=None,
) -> list[Utterance]:
    """Merge a speaker's consecutive units into turns.

    Two consecutive units of one speaker join when the silence between them
    is at most ``max_gap_ms`` and no unit of another speaker lies entirely
    inside that silence. Other speakers' units that overlap either side
    (backchannels, interjections) do not break the turn. Units without
    orthographic tokens are dropped and never break a turn.
    """
    if max_gap_ms < 0:
        raise SegmentationError("max_gap_ms must be non-negative")
    if tokens is None:
        tokens = tokenize_conversation(conv, diagnostics)
    kept = [tu for tu in conv.tus if _keep(conv, tu, tokens, diagnostics)]
    begins = [tu.begin_ms for tu in kept]

    def intervenes(prev, nxt):
        lo = bisect.bisect_left(begins, prev.end_ms)
        hi = bisect.bisect_left(begins, nxt.begin_ms)
        for other in kept[lo:hi]:
            if other.speaker_id != prev.speaker_id and other.end_ms <= nxt.begin_ms:
                return True
        return False

    open_group: dict[str, list] = {}
    groups = []
    for tu in kept:
        group = open_group.get(tu.speaker_id)
        if group is not None:
            prev = group[-1]
            if tu.begin_ms - prev.end_ms <= max_gap_ms and not intervenes(prev, tu):
                group.append(tu)
                continue
        group = [tu]
        groups.append(group)
        open_group[tu.speaker_id] = group
    return _finish(conv, groups, tokens)


@dataclass(frozen=True)
class SegmentationDirective:
    rows: tuple[tuple[str, str], ...]

    @classmethod
    def from_tsv(cls, text: str) -> "SegmentationDirective":
        rows = []
        seen = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise SegmentationError(f"directive line {lineno}: expected tu_id<TAB>unit_id")
            tu_id, unit_id = parts
            if tu_id in seen:
                raise SegmentationError(
                    f"directive line {lineno}: unit {tu_id} already assigned on line {seen[tu_id]}"
                )
            seen[tu_id] = lineno
            rows.append((tu_id, unit_id))
        return cls(tuple(rows))


def apply_directives(
    conv: Conversation,
    directives: SegmentationDirective,
    diagnostics: list | None = None,
    tokens=None,
) -> list[Utterance]:
    if tokens is None:
        tokens = tokenize_conversation(conv, diagnostics)
    by_id = conv.by_id()
    unit_of: dict[str, str] = {}
    members: dict[str, list[TranscriptionUnit]] = {}
    for row, (tu_id, unit_id) in enumerate(directives.rows, 1):
        if tu_id in unit_of:
            raise SegmentationError(f"directive row {row}: unit {tu_id} listed twice")
        tu = by_id.get(tu_id)
        if tu is None:
            raise SegmentationError(
                f"directive row {row}: unknown unit {tu_id!r} in {conv.conversation_id}"
            )
        group = members.setdefault(unit_id, [])
        if group and group[0].speaker_id != tu.speaker_id:
            raise SegmentationError(
                f"directive row {row}: group {unit_id!r} mixes speakers "
                f"{group[0].speaker_id} and {tu.speaker_id}"
            )
        group.append(tu)
        unit_of[tu_id] = unit_id

    groups = []
    emitted = set()
    for tu in conv.tus:
        unit_id = unit_of.get(tu.tu_id)
        if unit_id is None:
            if _keep(conv, tu, tokens, diagnostics):
                groups.append([tu])
        elif unit_id not in emitted:
            emitted.add(unit_id)
            group = [m for m in members[unit_id] if _keep(conv, m, tokens, diagnostics)]
            if group:
                group.sort(key=lambda t: (t.begin_ms, t.tu_id))
                groups.append(group)
    return _finish(conv, groups, tokens)
