"""Cross-speaker overlap detection between utterances."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import Notice


def compute_overlaps(utterances) -> dict[str, list[str]]:
    """Map every sent_id to the sorted sent_ids of other speakers it overlaps.

    Two spans overlap when their intersection is longer than 0 ms, so
    touching endpoints do not count. Sweep over start times, keeping a heap
    of still-open spans keyed by end time.
    """
    report: dict[str, set[str]] = {u.sent_id: set() for u in utterances}
    spans = sorted(
        ((u.begin_ms, u.end_ms, u.speaker_id, u.sent_id) for u in utterances),
    )
    active: list[tuple[int, str, str]] = []
    for begin, end, speaker, sent_id in spans:
        while active and active[0][0] <= begin:
            heapq.heappop(active)
        if end > begin:
            for _, other_speaker, other_id in active:
                if other_speaker != speaker:
                    report[sent_id].add(other_id)
                    report[other_id].add(sent_id)
            heapq.heappush(active, (end, speaker, sent_id))
    return {sent_id: sorted(partners) for sent_id, partners in report.items()}


@dataclass(frozen=True)
class OverlapMark:
    """Overlap metadata for one utterance: ``# overlap`` value and per-token marks."""

    partners: tuple[str, ...]
    token_marks: tuple[bool, ...]

    @property
    def metadata(self) -> str | None:
        return " ".join(self.partners) if self.partners else None


def annotate_overlap(utterance, report, diagnostics: list | None = None) -> OverlapMark:
    """Overlap metadata for one utterance.

    Bracketed tokens are marked only when the utterance overlaps another one
    in time; brackets inside a unit that overlaps nothing are reported and
    left unmarked, so the token mark never appears without ``# overlap``.
    """
    partners = tuple(report.get(utterance.sent_id, ()))
    flags = tuple(tok.in_overlap for tok in utterance.tokens)
    if not partners:
        if any(flags) and diagnostics is not None:
            diagnostics.append(Notice(
                "overlap-without-partner",
                "bracketed overlap but no time-overlapping unit of another speaker; tokens left unmarked",
                utterance.sent_id,
            ))
        return OverlapMark((), (False,) * len(flags))
    return OverlapMark(partners, flags)
