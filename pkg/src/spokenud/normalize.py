"""Orthographic harmonization, filler lookup and OrigLang values."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources

from .errors import TableError


@dataclass(frozen=True)
class OrigLang:
    """A token's original-language value: ``dialect``, ``uncertain`` or an ISO 639 code."""

    value: str

    DIALECT = "dialect"
    UNCERTAIN = "uncertain"

    def __post_init__(self):
        if not is_origlang_value(self.value):
            raise TableError(f"{self.value!r} is not 'dialect', 'uncertain' or an ISO 639 code")

    @property
    def is_iso(self) -> bool:
        return self.value not in (self.DIALECT, self.UNCERTAIN)

    def __str__(self):
        return self.value


def _data_text(name: str) -> str:
    return resources.files("spokenud").joinpath("data", name).read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def iso639_codes() -> frozenset[str]:
    """Union of ISO 639-1 and ISO 639-3 codes shipped with the package."""
    codes = set()
    for line in _data_text("iso639.tsv").splitlines():
        if line and not line.startswith("#"):
            codes.add(line.split("\t", 1)[0])
    return frozenset(codes)


def is_origlang_value(text: str) -> bool:
    return text in (OrigLang.DIALECT, OrigLang.UNCERTAIN) or text in iso639_codes()


class NormalizationTable:
    """Case-sensitive ``variant -> canonical`` mapping without chains."""

    def __init__(self, mapping):
        mapping = dict(mapping)
        for variant, canonical in mapping.items():
            if not variant or not canonical:
                raise TableError("normalization entries must be non-empty")
            if canonical in mapping:
                raise TableError(
                    f"canonical form {canonical!r} (for {variant!r}) is itself a variant"
                )
        self._map = mapping

    @classmethod
    def from_tsv(cls, text: str) -> "NormalizationTable":
        mapping = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise TableError(f"normalization table line {lineno}: expected variant<TAB>canonical")
            if parts[0] in mapping:
                raise TableError(f"normalization table line {lineno}: duplicate variant {parts[0]!r}")
            mapping[parts[0]] = parts[1]
        return cls(mapping)

    @classmethod
    @functools.lru_cache(maxsize=None)
    def default(cls) -> "NormalizationTable":
        return cls.from_tsv(_data_text("norm_table.tsv"))

    def get(self, surface, default=None):
        return self._map.get(surface, default)

    def __contains__(self, surface):
        return surface in self._map

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()

    def __eq__(self, other):
        return isinstance(other, NormalizationTable) and self._map == other._map

    __hash__ = None


class FillerLexicon(frozenset):
    """Set of canonical filler surfaces."""

    def __new__(cls, surfaces=()):
        surfaces = frozenset(s for s in surfaces if s)
        if not surfaces:
            raise TableError("filler lexicon must not be empty")
        return super().__new__(cls, surfaces)

    @classmethod
    def from_text(cls, text: str) -> "FillerLexicon":
        return cls(
            line.strip() for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )

    @classmethod
    @functools.lru_cache(maxsize=None)
    def default(cls) -> "FillerLexicon":
        return cls.from_text(_data_text("fillers.txt"))


def normalize_form(surface: str, table: NormalizationTable) -> str:
    if surface.endswith("~"):
        return surface
    return table.get(surface, surface)


def is_filler(surface: str, lexicon: FillerLexicon) -> bool:
    return not surface.endswith("~") and surface in lexicon


def assign_origlang(conversation_id: str, annotations: str) -> dict[tuple[str, int], OrigLang]:
    """Read a ``tu_id<TAB>token_index<TAB>value`` file for one conversation.

    Token indices are 1-based positions inside the unit. Whether the
    referenced units and positions exist is checked when tokens are emitted.
    """
    out = {}
    for lineno, line in enumerate(annotations.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise TableError(f"{conversation_id} language annotations line {lineno}: expected 3 columns")
        tu_id, index, value = parts
        try:
            position = int(index)
        except ValueError:
            position = 0
        if not tu_id or position < 1:
            raise TableError(
                f"{conversation_id} language annotations line {lineno}: bad unit id or token index"
            )
        try:
            lang = OrigLang(value)
        except TableError as exc:
            raise TableError(f"{conversation_id} language annotations line {lineno}: {exc}") from None
        if (tu_id, position) in out:
            raise TableError(
                f"{conversation_id} language annotations line {lineno}: duplicate entry for {tu_id} {position}"
            )
        out[(tu_id, position)] = lang
    return out
