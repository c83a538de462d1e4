"""Reading ELAN ``.eaf`` transcripts and the JSON metadata sidecars.

Only the subset of EAF needed for time-aligned transcription units is read:
``TIME_ORDER/TIME_SLOT``, ``TIER`` with its ``PARTICIPANT`` and the
``ALIGNABLE_ANNOTATION`` elements below it.
"""

from __future__ import annotations

import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.parsers import expat

from .errors import EafError, MetadataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TranscriptionUnit:
    tu_id: str
    conversation_id: str
    speaker_id: str
    begin_ms: int
    end_ms: int
    raw_jefferson: str

    def __post_init__(self):
        if self.begin_ms < 0 or self.end_ms < self.begin_ms:
            raise EafError(
                f"{self.tu_id}: invalid time span [{self.begin_ms}, {self.end_ms}]"
            )


@dataclass(frozen=True)
class Conversation:
    conversation_id: str
    module_id: str
    tus: tuple[TranscriptionUnit, ...]
    speaker_ids: frozenset[str]

    def by_id(self) -> dict[str, TranscriptionUnit]:
        return {tu.tu_id: tu for tu in self.tus}


@dataclass(frozen=True)
class SpeakerRecord:
    speaker_id: str
    gender: str = ""
    age: str = ""
    origin: str = ""
    education: str = ""
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConversationRecord:
    conversation_id: str
    participant_count: int
    place: str = ""
    date: str = ""
    interaction_type: str = ""
    extra: dict = field(default_factory=dict)


def tu_sort_key(tu: TranscriptionUnit):
    return (tu.begin_ms, tu.speaker_id, tu.tu_id)


def _xml_error(xml_bytes: bytes, exc: Exception) -> EafError:
    # ElementTree's C parser hides the byte index; ask expat directly.
    parser = expat.ParserCreate()
    try:
        parser.Parse(xml_bytes, True)
    except expat.ExpatError as err:
        return EafError(
            f"malformed XML at byte offset {parser.ErrorByteIndex}: {expat.ErrorString(err.code)}"
        )
    return EafError(f"malformed XML: {exc}")


def parse_eaf(xml_bytes: bytes, conversation_id: str, module_id: str) -> Conversation:
    """Parse EAF bytes into a :class:`Conversation`.

    Raises :class:`EafError` for malformed XML, dangling or unvalued time
    slots, tiers without a participant, and overlapping units of a single
    speaker. Reference (symbolic) annotations are skipped with a warning.
    """
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        raise _xml_error(xml_bytes, exc) from None

    time_order = root.find("TIME_ORDER")
    if time_order is None:
        raise EafError(f"{conversation_id}: no TIME_ORDER section")
    slots: dict[str, int | None] = {}
    for slot in time_order.iter("TIME_SLOT"):
        slot_id = slot.get("TIME_SLOT_ID")
        if slot_id is None:
            raise EafError(f"{conversation_id}: TIME_SLOT without TIME_SLOT_ID")
        value = slot.get("TIME_VALUE")
        if value is None:
            slots[slot_id] = None
            continue
        try:
            slots[slot_id] = int(value)
        except ValueError:
            raise EafError(
                f"{conversation_id}: time slot {slot_id} has non-integer value {value!r}"
            ) from None

    def resolve(ann_id, ref):
        if ref is None or ref not in slots:
            raise EafError(
                f"{conversation_id}: annotation {ann_id} references missing time slot {ref!r}"
            )
        ms = slots[ref]
        if ms is None:
            raise EafError(
                f"{conversation_id}: annotation {ann_id} uses time slot {ref} "
                "without a time value (interpolation is not supported)"
            )
        return ms

    tus = []
    seen_ids = set()
    for tier in root.iter("TIER"):
        tier_id = tier.get("TIER_ID", "?")
        alignable = list(tier.iter("ALIGNABLE_ANNOTATION"))
        skipped = sum(1 for _ in tier.iter("REF_ANNOTATION"))
        if skipped:
            logger.warning(
                "%s: skipping %d reference annotation(s) on tier %s",
                conversation_id, skipped, tier_id,
            )
        if not alignable:
            continue
        speaker = tier.get("PARTICIPANT")
        if not speaker:
            raise EafError(f"{conversation_id}: tier {tier_id} has no PARTICIPANT attribute")
        for ann in alignable:
            ann_id = ann.get("ANNOTATION_ID")
            if not ann_id:
                raise EafError(f"{conversation_id}: annotation without ANNOTATION_ID on tier {tier_id}")
            if ann_id in seen_ids:
                raise EafError(f"{conversation_id}: duplicate annotation id {ann_id}")
            seen_ids.add(ann_id)
            begin = resolve(ann_id, ann.get("TIME_SLOT_REF1"))
            end = resolve(ann_id, ann.get("TIME_SLOT_REF2"))
            if begin < 0 or end < begin:
                raise EafError(
                    f"{conversation_id}: annotation {ann_id} has invalid span [{begin}, {end}]"
                )
            value = ann.find("ANNOTATION_VALUE")
            text = value.text if value is not None and value.text is not None else ""
            tus.append(TranscriptionUnit(ann_id, conversation_id, speaker, begin, end, text))

    tus.sort(key=tu_sort_key)
    # furthest-reaching earlier unit per speaker; touching or zero-length spans do not overlap
    reach: dict[str, TranscriptionUnit] = {}
    for tu in tus:
        prev = reach.get(tu.speaker_id)
        if prev is not None and min(prev.end_ms, tu.end_ms) > tu.begin_ms:
            raise EafError(
                f"{conversation_id}: units {prev.tu_id} and {tu.tu_id} of speaker "
                f"{tu.speaker_id} overlap in time"
            )
        if prev is None or tu.end_ms > prev.end_ms:
            reach[tu.speaker_id] = tu
    return Conversation(
        conversation_id, module_id, tuple(tus), frozenset(tu.speaker_id for tu in tus)
    )


class _Pairs(list):
    """JSON object kept as its ordered key/value pairs, so duplicates stay visible."""


def _load_json_objects(json_bytes: bytes, what: str) -> list[tuple[str, dict]]:
    try:
        doc = json.loads(json_bytes.decode("utf-8"), object_pairs_hook=_Pairs)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MetadataError(f"{what} store is not valid UTF-8 JSON: {exc}") from None
    if not isinstance(doc, _Pairs):
        raise MetadataError(f"{what} store must be a JSON object keyed by id")
    seen = set()
    entries = []
    for key, value in doc:
        if not key:
            raise MetadataError(f"{what} store has an empty id")
        if key in seen:
            raise MetadataError(f"{what} store has duplicate id {key!r}")
        seen.add(key)
        if not isinstance(value, _Pairs):
            raise MetadataError(f"{what} {key!r}: entry must be a JSON object")
        entries.append((key, {k: _plain(v) for k, v in value}))
    return entries


def _plain(value):
    if isinstance(value, _Pairs):
        return {k: _plain(v) for k, v in value}
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


def _text(value) -> str:
    return "" if value is None else str(value)


def load_speaker_store(json_bytes: bytes) -> dict[str, SpeakerRecord]:
    known = ("gender", "age", "origin", "education")
    store = {}
    for speaker_id, attrs in _load_json_objects(json_bytes, "speaker"):
        extra = {k: v for k, v in attrs.items() if k not in known}
        store[speaker_id] = SpeakerRecord(
            speaker_id, *(_text(attrs.get(k)) for k in known), extra=extra
        )
    return store


def load_conversation_store(json_bytes: bytes) -> dict[str, ConversationRecord]:
    known = ("participants", "place", "date", "interaction_type")
    store = {}
    for conv_id, attrs in _load_json_objects(json_bytes, "conversation"):
        count = attrs.get("participants")
        if isinstance(count, bool) or not isinstance(count, int) or count <= 0:
            raise MetadataError(
                f"conversation {conv_id!r}: participants must be a positive integer, got {count!r}"
            )
        extra = {k: v for k, v in attrs.items() if k not in known}
        store[conv_id] = ConversationRecord(
            conv_id,
            count,
            _text(attrs.get("place")),
            _text(attrs.get("date")),
            _text(attrs.get("interaction_type")),
            extra=extra,
        )
    return store
