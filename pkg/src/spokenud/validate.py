"""Linting speech-extended CoNLL-U files.

Rule ids are frozen; CI assertions and the TSV report depend on them.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .conllu import REQUIRED_METADATA, iter_blocks
from .normalize import FillerLexicon, is_origlang_value
from .jefferson import Intonation

ERROR = "Error"
WARNING = "Warning"

RULES = {
    "V00": (ERROR, "file cannot be read"),
    "V01": (ERROR, "token line must have 10 TAB-separated columns"),
    "V02": (ERROR, "token ids must be contiguous from 1"),
    "V03": (ERROR, "required metadata missing"),
    "V04": (ERROR, "AlignBegin/AlignEnd placement or value"),
    "V05": (ERROR, "Intonation value"),
    "V06": (ERROR, "PauseAfter value"),
    "V07": (ERROR, "Overlap value or missing # overlap"),
    "V08": (ERROR, "OrigLang value"),
    "V09": (WARNING, "annotated cut-off word relation"),
    "V10": (WARNING, "reparandum dependent is not a cut-off word"),
    "V11": (WARNING, "filler tagging"),
    "V12": (ERROR, "# text does not match FORM column"),
    "V13": (ERROR, "dependency tree structure"),
    "V14": (ERROR, "AttachTo/Rel co-construction reference"),
}

INTONATION_VALUES = frozenset(i.value for i in Intonation)
CUTOFF_RELATIONS = ("reparandum", "parataxis:restart")
_MS = re.compile(r"\d+")


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: str
    file: str
    line: int
    sent_id: str | None
    message: str

    def tsv(self) -> str:
        return f"{self.file}\t{self.line}\t{self.rule_id}\t{self.severity}\t{self.message}"

    def __str__(self):
        where = f"{self.file}:{self.line}"
        sent = f" [{self.sent_id}]" if self.sent_id else ""
        return f"{where}: {self.severity} {self.rule_id}{sent}: {self.message}"


@dataclass
class _Tok:
    line: int
    cols: list[str]

    @property
    def complete(self):
        return len(self.cols) == 10

    def col(self, i):
        return self.cols[i] if i < len(self.cols) else "_"


def _misc(tok):
    """MISC as a dict, plus the list of malformed items."""
    out, bad = {}, []
    text = tok.col(9)
    if not tok.complete or text == "_":
        return out, bad
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key:
            bad.append(item)
        else:
            out[key] = value
    return out, bad


class _Checker:
    def __init__(self, file, lexicon):
        self.file = file
        self.lexicon = lexicon
        self.diags: list[Diagnostic] = []
        self.sent_id = None

    def report(self, rule, line, message):
        self.diags.append(Diagnostic(rule, RULES[rule][0], self.file, line, self.sent_id, message))

    def sentences(self, text):
        out = []
        for start, block in iter_blocks(text):
            meta, meta_lines, toks = {}, {}, []
            for lineno, line in block:
                if line.startswith("#"):
                    key, sep, value = line[1:].partition("=")
                    if sep:
                        meta[key.strip()] = value.strip()
                        meta_lines[key.strip()] = lineno
                else:
                    toks.append(_Tok(lineno, line.split("\t")))
            out.append((start, meta, meta_lines, toks))
        return out

    def run(self, text):
        sentences = self.sentences(text)
        known_ids = {meta.get("sent_id") for _, meta, _, _ in sentences} - {None}
        for start, meta, meta_lines, toks in sentences:
            self.sent_id = meta.get("sent_id")
            self.check_sentence(start, meta, meta_lines, toks, known_ids)
        self.diags.sort(key=lambda d: (d.line, d.rule_id))
        return self.diags

    def check_sentence(self, start, meta, meta_lines, toks, known_ids):
        for key in REQUIRED_METADATA:
            if key not in meta:
                self.report("V03", start, f"missing # {key}")
        # multiword ranges and empty nodes are not part of this format; skip them
        words = [t for t in toks if "-" not in t.cols[0] and "." not in t.cols[0]]
        for t in words:
            if not t.complete:
                self.report("V01", t.line, f"expected 10 columns, found {len(t.cols)}")
        for expected, t in enumerate(words, 1):
            if t.cols[0] != str(expected):
                self.report("V02", t.line, f"token id {t.cols[0]!r}, expected {expected}")
        if not words:
            return
        miscs = []
        for t in words:
            misc, bad = _misc(t)
            for item in bad:
                self.report("V01", t.line, f"MISC item {item!r} is not key=value")
            miscs.append(misc)

        self.check_alignment(words, miscs, start)
        has_overlap_meta = "overlap" in meta
        for t, misc in zip(words, miscs):
            self.check_token(t, misc, has_overlap_meta, known_ids)

        if "text" in meta:
            forms = " ".join(t.col(1) for t in words)
            if meta["text"] != forms:
                self.report("V12", meta_lines["text"], f"# text {meta['text']!r} != FORMs {forms!r}")
        self.check_tree(words)

    def check_alignment(self, words, miscs, start):
        last = len(words) - 1
        begins = [i for i, m in enumerate(miscs) if "AlignBegin" in m]
        ends = [i for i, m in enumerate(miscs) if "AlignEnd" in m]
        if begins != [0]:
            where = words[begins[-1]].line if begins else start
            self.report("V04", where, "AlignBegin must appear exactly once, on the first token")
        if ends != [last]:
            where = words[ends[-1]].line if ends else start
            self.report("V04", where, "AlignEnd must appear exactly once, on the last token")
        values = {}
        for key, idxs in (("AlignBegin", begins), ("AlignEnd", ends)):
            for i in idxs:
                raw = miscs[i][key]
                if not _MS.fullmatch(raw):
                    self.report("V04", words[i].line, f"{key}={raw!r} is not integer milliseconds")
                else:
                    values[key] = int(raw)
        if len(values) == 2 and values["AlignBegin"] > values["AlignEnd"]:
            self.report("V04", words[ends[-1]].line, "AlignBegin is later than AlignEnd")

    def check_token(self, t, misc, has_overlap_meta, known_ids):
        if "Intonation" in misc and misc["Intonation"] not in INTONATION_VALUES:
            self.report("V05", t.line, f"Intonation={misc['Intonation']!r}")
        if "PauseAfter" in misc and misc["PauseAfter"] != "Yes":
            self.report("V06", t.line, f"PauseAfter={misc['PauseAfter']!r}")
        if "Overlap" in misc:
            if misc["Overlap"] != "Yes":
                self.report("V07", t.line, f"Overlap={misc['Overlap']!r}")
            elif not has_overlap_meta:
                self.report("V07", t.line, "token marked Overlap=Yes but sentence has no # overlap")
        if "OrigLang" in misc and not is_origlang_value(misc["OrigLang"]):
            self.report("V08", t.line, f"OrigLang={misc['OrigLang']!r}")

        form, upos, head, deprel = t.col(1), t.col(3), t.col(6), t.col(7)
        if form.endswith("~") and head != "_" and deprel not in CUTOFF_RELATIONS:
            self.report("V09", t.line, f"cut-off {form!r} attached as {deprel!r}, expected reparandum or parataxis:restart")
        if deprel == "reparandum" and not form.endswith("~"):
            self.report("V10", t.line, f"reparandum dependent {form!r} does not end in '~'")
        if form in self.lexicon:
            if upos != "INTJ":
                self.report("V11", t.line, f"filler {form!r} tagged {upos!r}, expected INTJ")
            elif deprel != "_" and not (deprel.startswith("discourse") or deprel == "parataxis:discourse"):
                self.report("V11", t.line, f"filler {form!r} attached as {deprel!r}")

        attach, rel = misc.get("AttachTo"), misc.get("Rel")
        if (attach is None) != (rel is None):
            self.report("V14", t.line, "AttachTo and Rel must appear together")
        if rel is not None and not rel:
            self.report("V14", t.line, "empty Rel")
        if attach is not None:
            if attach == self.sent_id:
                self.report("V14", t.line, "AttachTo references its own sentence")
            elif attach not in known_ids:
                self.report("V14", t.line, f"AttachTo={attach!r} names no sentence in this file")

    def check_tree(self, words):
        n = len(words)
        heads = {}
        for i, t in enumerate(words, 1):
            h = t.col(6)
            if h == "_":
                continue
            if not h.isdigit() or int(h) > n:
                self.report("V13", t.line, f"HEAD {h!r} out of range 0..{n}")
                continue
            heads[i] = int(h)
        if not heads:
            return
        roots = [i for i, h in heads.items() if h == 0]
        if len(roots) > 1:
            self.report("V13", words[roots[1] - 1].line, f"{len(roots)} tokens attached to root")
        elif not roots and len(heads) == n:
            self.report("V13", words[0].line, "no token attached to root")
        reported = set()
        for i in heads:
            seen = []
            node = i
            while node in heads and heads[node] != 0 and node not in seen:
                seen.append(node)
                node = heads[node]
            if node in seen:
                cycle = frozenset(seen[seen.index(node):])
                if cycle not in reported:
                    reported.add(cycle)
                    self.report("V13", words[min(cycle) - 1].line, f"cycle through tokens {sorted(cycle)}")


def validate_file(text: str, file: str = "<string>", lexicon: FillerLexicon | None = None) -> list[Diagnostic]:
    """All diagnostics for one file's text, sorted by (line, rule id)."""
    lexicon = FillerLexicon.default() if lexicon is None else lexicon
    return _Checker(file, lexicon).run(text)


def validate_path(path, lexicon: FillerLexicon | None = None) -> list[Diagnostic]:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return [Diagnostic("V00", ERROR, str(path), 0, None, f"cannot read file: {exc}")]
    return validate_file(text, str(path), lexicon)


@dataclass
class CorpusSummary:
    diagnostics: list[Diagnostic] = field(default_factory=list)
    files: list[str] = field(default_factory=list)

    @property
    def counts(self) -> Counter:
        return Counter(d.rule_id for d in self.diagnostics)

    @property
    def has_errors(self) -> bool:
        return any(d.severity == ERROR for d in self.diagnostics)

    @property
    def fatal(self) -> bool:
        return any(d.rule_id == "V00" for d in self.diagnostics)

    @property
    def status(self) -> int:
        return 1 if self.has_errors else 0


def expand_paths(paths, suffix=".conllu") -> list[Path]:
    """Files as given; directories expanded to their ``*.conllu`` files, sorted."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.rglob(f"*{suffix}")))
        else:
            out.append(p)
    return out


def validate_corpus(paths, lexicon: FillerLexicon | None = None) -> CorpusSummary:
    summary = CorpusSummary()
    for path in expand_paths(paths):
        summary.files.append(str(path))
        summary.diagnostics.extend(validate_path(path, lexicon))
    return summary
