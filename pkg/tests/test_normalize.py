import pickle

import pytest
from hypothesis import given, strategies as st

from spokenud.errors import TableError
from spokenud.normalize import (
    FillerLexicon,
    NormalizationTable,
    OrigLang,
    assign_origlang,
    is_filler,
    iso639_codes,
    normalize_form,
)


def test_default_table():
    table = NormalizationTable.default()
    assert normalize_form("okey", table) == "okay"
    assert normalize_form("Okey", table) == "Okey"
    assert normalize_form("casa", table) == "casa"


def test_cutoff_forms_are_never_looked_up():
    table = NormalizationTable({"ok~": "okay"})
    assert normalize_form("ok~", table) == "ok~"


def test_chained_table_rejected():
    with pytest.raises(TableError, match="variant"):
        NormalizationTable({"a": "b", "b": "c"})


@pytest.mark.parametrize("text", ["a\tb\tc\n", "a\n", "a\tb\na\tc\n", "\tb\n"])
def test_bad_tsv(text):
    with pytest.raises(TableError, match="line"):
        NormalizationTable.from_tsv(text)


def test_table_pickles():
    table = NormalizationTable.default()
    assert pickle.loads(pickle.dumps(table)) == table


words = st.text(alphabet="abcoke'~", min_size=1, max_size=6)


@given(st.dictionaries(words, words, max_size=8), words)
def test_normalization_is_idempotent(mapping, surface):
    try:
        table = NormalizationTable(mapping)
    except TableError:
        return
    once = normalize_form(surface, table)
    assert normalize_form(once, table) == once


def test_filler_lexicon():
    lex = FillerLexicon.default()
    assert {"eh", "ehm", "mh"} <= lex
    assert is_filler("eh", lex)
    assert not is_filler("eh~", lex)
    assert not is_filler("casa", lex)
    with pytest.raises(TableError):
        FillerLexicon([])
    with pytest.raises(TableError):
        FillerLexicon.from_text("# nothing\n\n")


def test_iso_codes():
    codes = iso639_codes()
    assert {"it", "en", "ita", "pms", "lij", "nap", "scn"} <= codes
    assert "zz" not in codes and "dialect" not in codes


def test_origlang_values():
    assert OrigLang("dialect").value == "dialect"
    assert not OrigLang("uncertain").is_iso
    assert OrigLang("pms").is_iso
    assert str(OrigLang("en")) == "en"
    with pytest.raises(TableError):
        OrigLang("zz")
    with pytest.raises(TableError):
        OrigLang("Dialect")


def test_assign_origlang():
    text = "# header\na1\t2\tpms\na1\t3\tdialect\n\na2 1 uncertain\n"
    got = assign_origlang("c", text)
    assert got == {("a1", 2): OrigLang("pms"), ("a1", 3): OrigLang("dialect"), ("a2", 1): OrigLang("uncertain")}


@pytest.mark.parametrize("text, fragment", [
    ("a1\t2\n", "line 1: expected 3 columns"),
    ("a1\tx\ten\n", "line 1: bad unit id or token index"),
    ("a1\t0\ten\n", "line 1: bad unit id or token index"),
    ("a1\t1\ten\na1\t1\tit\n", "line 2: duplicate"),
    ("\na1\t1\tzz\n", "line 2: 'zz'"),
])
def test_assign_origlang_errors(text, fragment):
    with pytest.raises(TableError, match=fragment):
        assign_origlang("c", text)
