"""Corpus statistics, token-budgeted sampling and conversation-level splits."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .conllu import read_conllu
from .errors import ConlluParseError, SampleError
from .pipeline import MANIFEST_NAME

SPLITS = ("train", "dev", "test")
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


@dataclass
class Counts:
    conversations: int = 0
    sentences: int = 0
    tokens: int = 0
    duration_ms: int = 0

    def add(self, other: "Counts") -> "Counts":
        return Counts(
            self.conversations + other.conversations,
            self.sentences + other.sentences,
            self.tokens + other.tokens,
            self.duration_ms + other.duration_ms,
        )


@dataclass
class ConversationStats:
    conversation_id: str
    module: str
    file: str
    counts: Counts

    @property
    def tokens(self) -> int:
        return self.counts.tokens


@dataclass
class CorpusStats:
    conversations: dict[str, ConversationStats] = field(default_factory=dict)
    speakers: dict[str, Counts] = field(default_factory=dict)

    @property
    def modules(self) -> dict[str, Counts]:
        out: dict[str, Counts] = {}
        for conv in self.conversations.values():
            out[conv.module] = out.get(conv.module, Counts()).add(conv.counts)
        return dict(sorted(out.items()))

    @property
    def total(self) -> Counts:
        total = Counts()
        for conv in self.conversations.values():
            total = total.add(conv.counts)
        return total

    def merge(self, other: "CorpusStats") -> "CorpusStats":
        clash = self.conversations.keys() & other.conversations.keys()
        if clash:
            raise SampleError(f"conversation ids counted twice: {', '.join(sorted(clash))}")
        speakers = dict(self.speakers)
        for spk, c in other.speakers.items():
            speakers[spk] = speakers.get(spk, Counts()).add(c)
        convs = {**self.conversations, **other.conversations}
        return CorpusStats(dict(sorted(convs.items())), dict(sorted(speakers.items())))

    def to_tsv(self) -> str:
        lines = ["level\tid\tmodule\tconversations\tsentences\ttokens\tduration_ms"]

        def row(level, ident, module, c):
            lines.append(f"{level}\t{ident}\t{module}\t{c.conversations}\t{c.sentences}\t{c.tokens}\t{c.duration_ms}")

        row("corpus", "*", "*", self.total)
        for module, c in self.modules.items():
            row("module", module, module, c)
        for conv in sorted(self.conversations.values(), key=lambda c: c.conversation_id):
            row("conversation", conv.conversation_id, conv.module, conv.counts)
        for spk, c in sorted(self.speakers.items()):
            row("speaker", spk, "*", c)
        return "\n".join(lines) + "\n"


def file_stats(text: str, conversation_id: str, module: str, file: str = "<string>") -> CorpusStats:
    """Counts for one CoNLL-U file; every sentence must carry AlignBegin and AlignEnd."""
    counts = Counts(conversations=1)
    speakers: dict[str, Counts] = {}
    for sent in read_conllu(text, file):
        begin = sent.tokens[0].misc_dict().get("AlignBegin")
        end = sent.tokens[-1].misc_dict().get("AlignEnd")
        if begin is None or end is None or not begin.isdigit() or not end.isdigit():
            raise ConlluParseError("sentence lacks integer AlignBegin/AlignEnd", file, sent.line)
        c = Counts(0, 1, len(sent.tokens), int(end) - int(begin))
        counts = counts.add(c)
        spk = sent.metadata.get("speaker_id", "")
        speakers[spk] = speakers.get(spk, Counts()).add(c)
    conv = ConversationStats(conversation_id, module, file, counts)
    return CorpusStats({conversation_id: conv}, speakers)


def _read_manifest(path: Path):
    rows = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("file\t") or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 4:
            raise SampleError(f"{path}:{lineno}: malformed manifest row")
        module = cols[4] if len(cols) > 4 and cols[4] else "unknown"
        try:
            sentences, tokens = int(cols[2]), int(cols[3])
        except ValueError:
            raise SampleError(f"{path}:{lineno}: non-integer counts") from None
        rows[cols[0]] = (cols[1], module, sentences, tokens)
    return rows


def _stats_inputs(paths):
    """Yield (file path, conversation id, module, manifest counts or None)."""
    for p in map(Path, paths):
        if p.is_dir():
            manifest = p / MANIFEST_NAME
            if manifest.exists():
                for name, (conv_id, module, sents, toks) in sorted(_read_manifest(manifest).items()):
                    yield p / name, conv_id, module, (sents, toks)
            else:
                for f in sorted(p.glob("*.conllu")):
                    yield f, f.stem, "unknown", None
        else:
            manifest = p.parent / MANIFEST_NAME
            rows = _read_manifest(manifest) if manifest.exists() else {}
            if p.name in rows:
                conv_id, module, sents, toks = rows[p.name]
                yield p, conv_id, module, (sents, toks)
            else:
                yield p, p.stem, "unknown", None


def corpus_stats(paths) -> CorpusStats:
    stats = CorpusStats()
    for path, conv_id, module, expected in _stats_inputs(paths):
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise SampleError(f"{path}: cannot read: {exc}") from None
        one = file_stats(text, conv_id, module, str(path))
        got = one.conversations[conv_id].counts
        if expected is not None and expected != (got.sentences, got.tokens):
            raise SampleError(
                f"{path}: manifest lists {expected[0]} sentences/{expected[1]} tokens, "
                f"file has {got.sentences}/{got.tokens}"
            )
        stats = stats.merge(one)
    return stats


@dataclass
class SamplePlan:
    target_tokens: int
    seed: int
    quotas: dict[str, int]
    selected: dict[str, list[str]]
    tokens: dict[str, int]
    modules: dict[str, str]
    warnings: list[str] = field(default_factory=list)
    ratios: tuple[float, float, float] | None = None
    assignment: dict[str, str] = field(default_factory=dict)

    @property
    def selected_ids(self) -> list[str]:
        return sorted(c for ids in self.selected.values() for c in ids)

    @property
    def achieved(self) -> int:
        return sum(self.tokens[c] for c in self.selected_ids)

    def module_achieved(self, module: str) -> int:
        return sum(self.tokens[c] for c in self.selected[module])

    def split_ids(self, split: str) -> list[str]:
        return sorted(c for c, s in self.assignment.items() if s == split)

    def to_tsv(self) -> str:
        ratios = ",".join(str(r) for r in self.ratios) if self.ratios else "-"
        lines = [
            f"# target = {self.target_tokens}",
            f"# seed = {self.seed}",
            f"# ratios = {ratios}",
            f"# achieved = {self.achieved}",
            "conversation_id\tmodule\ttokens\tsplit",
        ]
        for c in self.selected_ids:
            lines.append(f"{c}\t{self.modules[c]}\t{self.tokens[c]}\t{self.assignment.get(c, '-')}")
        return "\n".join(lines) + "\n"


def module_quotas(module_tokens: dict[str, int], target: int) -> dict[str, int]:
    """Largest-remainder apportionment of ``target`` by module token share."""
    total = sum(module_tokens.values())
    if total == 0:
        return {m: 0 for m in module_tokens}
    quotas = {m: target * t // total for m, t in module_tokens.items()}
    left = target - sum(quotas.values())
    by_remainder = sorted(module_tokens, key=lambda m: (-(target * module_tokens[m] % total), m))
    for m in by_remainder[:left]:
        quotas[m] += 1
    return dict(sorted(quotas.items()))


def _select(candidates, quota):
    """Greedy whole-conversation fill of one module quota.

    Take the largest conversation that still fits; once nothing fits, the
    smallest remaining one is added if it overshoots by no more than the
    current shortfall, or if the shortfall is at least as large as the
    biggest conversation already taken.
    """
    remaining = sorted(candidates, key=lambda c: (-c[1], c[0]))
    chosen, achieved = [], 0
    while remaining:
        deficit = quota - achieved
        if deficit <= 0 and chosen:
            break
        fit = next((c for c in remaining if c[1] <= deficit), None)
        if fit is not None:
            remaining.remove(fit)
            chosen.append(fit)
            achieved += fit[1]
            continue
        smallest = min(remaining, key=lambda c: (c[1], c[0]))
        overshoot = achieved + smallest[1] - quota
        largest = max((c[1] for c in chosen), default=0)
        if not chosen or overshoot <= deficit or deficit >= largest:
            chosen.append(smallest)
            achieved += smallest[1]
        break
    return chosen, achieved


def _moves(pool, chosen):
    """Single add, remove and swap moves inside one module: (delta, kind, out_id, in_id)."""
    picked = {c for c, _ in chosen}
    rest = [c for c in pool if c[0] not in picked]
    for c in rest:
        yield c[1], 0, "", c[0]
    if len(chosen) > 1:
        for c in chosen:
            yield -c[1], 1, c[0], ""
    for a in chosen:
        for b in rest:
            if a[1] != b[1]:
                yield b[1] - a[1], 2, a[0], b[0]


def _rebalance(by_module, chosen, quotas, target):
    """Shrink the global shortfall or overshoot after the per-module fill.

    Applies the single move that brings the total closest to ``target``
    until none improves it. A move is allowed only if the module keeps at
    least one conversation and stays within its largest selected
    conversation of its quota.
    """
    sizes = {c: t for cs in by_module.values() for c, t in cs}
    total = sum(t for cs in chosen.values() for _, t in cs)
    while True:
        err = abs(total - target)
        best = None
        for module in sorted(chosen):
            picked = chosen[module]
            achieved = sum(t for _, t in picked)
            for delta, kind, out_id, in_id in _moves(by_module[module], picked):
                new_err = abs(total + delta - target)
                if new_err >= err or (best is not None and (new_err, module, kind, out_id, in_id) >= best[0]):
                    continue
                after = [c for c in picked if c[0] != out_id] + ([(in_id, sizes[in_id])] if in_id else [])
                if abs(achieved + delta - quotas[module]) > max(t for _, t in after):
                    continue
                best = ((new_err, module, kind, out_id, in_id), after, delta)
        if best is None:
            return chosen
        module = best[0][1]
        chosen[module] = best[1]
        total += best[2]


def plan_sample(stats: CorpusStats, target_tokens: int, seed: int) -> SamplePlan:
    if target_tokens <= 0:
        raise SampleError("target must be a positive number of tokens")
    total = stats.total.tokens
    if target_tokens > total:
        raise SampleError(f"target {target_tokens} exceeds corpus size {total} tokens")
    by_module: dict[str, list[tuple[str, int]]] = {}
    for conv in stats.conversations.values():
        by_module.setdefault(conv.module, []).append((conv.conversation_id, conv.tokens))
    quotas = module_quotas({m: sum(t for _, t in cs) for m, cs in by_module.items()}, target_tokens)
    chosen = {m: _select(by_module[m], quotas[m])[0] for m in sorted(by_module)}
    chosen = _rebalance(by_module, chosen, quotas, target_tokens)
    selected, warnings = {}, []
    for module in sorted(by_module):
        achieved = sum(t for _, t in chosen[module])
        selected[module] = sorted(c for c, _ in chosen[module])
        if len(chosen[module]) == 1 and achieved > quotas[module]:
            warnings.append(
                f"module {module}: conversation {selected[module][0]} ({achieved} tokens) "
                f"overshoots quota {quotas[module]}"
            )
    return SamplePlan(
        target_tokens, seed, quotas, selected,
        tokens={c.conversation_id: c.tokens for c in stats.conversations.values()},
        modules={c.conversation_id: c.module for c in stats.conversations.values()},
        warnings=warnings,
    )


def _seeded_rank(seed: int, conversation_id: str) -> str:
    return hashlib.sha256(f"{seed}\0{conversation_id}".encode("utf-8")).hexdigest()


def split_plan(plan: SamplePlan, ratios=DEFAULT_RATIOS) -> SamplePlan:
    """Assign whole selected conversations to train/dev/test.

    Conversations go largest first (equal sizes in seeded-hash order) to
    the split furthest below its token target; the last conversations are
    reserved so that no split stays empty.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1) > 1e-9:
        raise SampleError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    ids = plan.selected_ids
    if len(ids) < 3:
        raise SampleError(f"need at least 3 selected conversations to fill 3 splits, have {len(ids)}")
    exact = [Fraction(repr(r)) for r in ratios]
    total = sum(plan.tokens[c] for c in ids)
    targets = [r * total for r in exact]
    assigned = [0, 0, 0]
    members = [0, 0, 0]
    order = sorted(ids, key=lambda c: (-plan.tokens[c], _seeded_rank(plan.seed, c), c))
    assignment = {}
    for pos, conv in enumerate(order):
        left = len(order) - pos
        empty = [i for i in range(3) if members[i] == 0]
        pool = empty if left <= len(empty) else range(3)
        pick = max(pool, key=lambda i: (targets[i] - assigned[i], -i))
        assignment[conv] = SPLITS[pick]
        assigned[pick] += plan.tokens[conv]
        members[pick] += 1
    return replace(plan, ratios=ratios, assignment=dict(sorted(assignment.items())))
