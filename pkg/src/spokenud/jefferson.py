"""Lexer for Jefferson-notated transcription units.

Marker grammar (one unit, whitespace separates words)::

    (.)  (0.5)  (2)    pause after the preceding word
    word.  word?  word,  intonation of the word: Descending, Question, Ascending
    [ ... ]            overlapped talk (unmatched brackets extend to the unit edge)
    word-              cut-off word, emitted as ``word~``
    wo::rd             prolonged sound, colons removed
    ° ... °            quiet talk
    > ... <            fast talk
    < ... >            slow talk
    =                  latching
    WORD               loud (fully upper-case word)
    (word)             uncertain transcription
    ((comment))        transcriber comment, dropped

Prolongation, volume, pace, latching and uncertainty are kept as token flags
only; they never become CoNLL-U features.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace

from .errors import Notice


class Intonation(enum.Enum):
    DESCENDING = "Descending"
    QUESTION = "Question"
    ASCENDING = "Ascending"


TERMINATORS = {
    ".": Intonation.DESCENDING,
    "?": Intonation.QUESTION,
    ",": Intonation.ASCENDING,
}

CONTROL_CHARS = frozenset("[]°><=:()")

_PAUSE = re.compile(r"\((?:\.|\d+(?:\.\d+)?)\)")
# Words that need no per-character work: no markers, no terminators, no hyphen or tilde at the end.
_PLAIN_WORD = re.compile(r"[^\s\[\]°<>=:().?,]*[^\s\[\]°<>=:().?,~-]")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class JeffersonToken:
    surface: str
    cutoff: bool = False
    uncertain: bool = False
    in_overlap: bool = False
    prolonged: bool = False
    quiet: bool = False
    loud: bool = False
    fast: bool = False
    slow: bool = False
    latched: bool = False
    pause_after: bool = False
    intonation: Intonation | None = None

    def __repr__(self):
        flags = [k for k, v in vars(self).items() if v is True]
        if self.intonation is not None:
            flags.append(f"intonation={self.intonation.value}")
        return f"<{self.surface}{{{', '.join(flags)}}}>" if flags else f"<{self.surface}>"


class _Lexer:
    def __init__(self, raw: str, notes: list):
        self.raw = raw
        self.notes = notes
        self.tokens: list[JeffersonToken] = []
        self.buf: list[str] = []
        self.flags: dict[str, bool] = {}
        # active spans
        self.overlap = False
        self.quiet = False
        self.fast = False
        self.slow = False
        self.uncertain = False
        self.pending: dict[str, bool] = {}

    def note(self, code, message, pos):
        self.notes.append(Notice(code, message, f"offset {pos}"))

    def add_char(self, ch):
        f = self.flags
        if self.overlap:
            f["in_overlap"] = True
        if self.quiet:
            f["quiet"] = True
        if self.fast:
            f["fast"] = True
        if self.slow:
            f["slow"] = True
        if self.uncertain:
            f["uncertain"] = True
        self.buf.append(ch)

    def end_word(self, pos, intonation=None):
        if not self.buf:
            return False
        surface = "".join(self.buf)
        flags = self.flags
        self.buf = []
        self.flags = {}
        stem = surface.rstrip("-~")
        if stem != surface:
            if not stem:
                self.note("stray", f"stray {surface!r} dropped", pos)
                return False
            flags["cutoff"] = True
            surface = stem + "~"
        if self.pending:
            flags.update(self.pending)
            self.pending = {}
        if stem.isupper():
            flags["loud"] = True
        self.tokens.append(JeffersonToken(surface, intonation=intonation, **flags))
        return True

    def run(self):
        raw = self.raw
        n = len(raw)
        i = 0
        while i < n:
            ch = raw[i]
            if ch.isspace():
                self.end_word(i)
                i += 1
                continue
            if not self.buf:
                m = _PLAIN_WORD.match(raw, i)
                if m and (m.end() == n or raw[m.end()].isspace()):
                    self.add_char(m.group())
                    self.end_word(m.end())
                    i = m.end()
                    continue
            if ch in TERMINATORS:
                if self.buf:
                    self.end_word(i, TERMINATORS[ch])
                elif not self.tokens:
                    self.note("terminator-at-start", f"intonation mark {ch!r} at unit start dropped", i)
                else:
                    self.note("detached-terminator", f"intonation mark {ch!r} not attached to a word dropped", i)
                i += 1
            elif ch == "(":
                if raw.startswith("((", i):
                    self.end_word(i)
                    close = raw.find("))", i + 2)
                    if close < 0:
                        self.note("unclosed-comment", "unclosed (( comment runs to unit end", i)
                        i = n
                    else:
                        i = close + 2
                    continue
                m = _PAUSE.match(raw, i)
                if m:
                    self.end_word(i)
                    if self.tokens:
                        self.tokens[-1] = replace(self.tokens[-1], pause_after=True)
                    else:
                        self.note("pause-at-start", f"pause {m.group()} at unit start dropped", i)
                    i = m.end()
                    continue
                if self.uncertain:
                    self.note("stray", "nested ( ignored", i)
                self.uncertain = True
                i += 1
            elif ch == ")":
                if self.uncertain:
                    self.uncertain = False
                else:
                    self.note("stray", "unmatched ) stripped", i)
                i += 1
            elif ch == "[":
                if self.overlap:
                    self.note("stray", "nested [ ignored", i)
                self.overlap = True
                i += 1
            elif ch == "]":
                if self.overlap:
                    self.overlap = False
                else:
                    self.note("unmatched-close", "unmatched ] : overlap assumed from unit start", i)
                    self.tokens = [replace(t, in_overlap=True) for t in self.tokens]
                    if self.buf:
                        self.flags["in_overlap"] = True
                i += 1
            elif ch == "°":
                self.quiet = not self.quiet
                i += 1
            elif ch == ">":
                if self.slow:
                    self.slow = False
                else:
                    self.fast = True
                i += 1
            elif ch == "<":
                if self.fast:
                    self.fast = False
                else:
                    self.slow = True
                i += 1
            elif ch == "=":
                if self.buf:
                    self.flags["latched"] = True
                else:
                    self.pending["latched"] = True
                i += 1
            elif ch == ":":
                if self.buf:
                    self.flags["prolonged"] = True
                else:
                    self.pending["prolonged"] = True
                i += 1
            else:
                self.add_char(ch)
                i += 1
        self.end_word(n)
        if self.pending.get("latched") and self.tokens:
            self.tokens[-1] = replace(self.tokens[-1], latched=True)
        if self.overlap:
            self.note("unmatched-open", "unmatched [ : overlap extends to unit end", n)
        if self.uncertain:
            self.note("unmatched-open", "unmatched ( : uncertain span extends to unit end", n)
        if self.quiet or self.fast or self.slow:
            self.note("unmatched-open", "unclosed volume/pace span", n)
        return self.tokens


def tokenize_jefferson(raw: str, diagnostics: list | None = None) -> list[JeffersonToken]:
    """Split one unit's Jefferson string into tokens.

    Never raises. Problems in the markup are appended to ``diagnostics`` as
    :class:`~spokenud.errors.Notice` objects when a list is given.
    """
    notes = [] if diagnostics is None else diagnostics
    return _Lexer(raw, notes).run()


def render_text_jefferson(raw: str) -> str:
    return _SPACE.sub(" ", raw).strip()


def plain_text(tokens) -> str:
    return " ".join(t.surface for t in tokens)
