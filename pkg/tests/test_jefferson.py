import pytest
from hypothesis import given, settings, strategies as st

from spokenud.jefferson import Intonation, plain_text, render_text_jefferson, tokenize_jefferson


def toks(raw):
    notes = []
    out = tokenize_jefferson(raw, notes)
    return out, notes


def codes(notes):
    return [n.code for n in notes]


def test_plain_words():
    out, notes = toks("allora andiamo a casa")
    assert [t.surface for t in out] == ["allora", "andiamo", "a", "casa"]
    assert notes == []
    assert all(t.intonation is None and not t.pause_after for t in out)


@pytest.mark.parametrize("mark, value", [(".", "Descending"), ("?", "Question"), (",", "Ascending")])
def test_terminators(mark, value):
    out, _ = toks(f"va bene{mark}")
    assert out[-1].surface == "bene"
    assert out[-1].intonation == Intonation(value)
    assert out[0].intonation is None


def test_terminator_mid_unit():
    out, _ = toks("sì, va bene.")
    assert [(t.surface, t.intonation) for t in out] == [
        ("sì", Intonation.ASCENDING), ("va", None), ("bene", Intonation.DESCENDING)]


def test_pause_marks_previous_token():
    out, notes = toks("allora (.) andiamo (0.5) a (2) casa")
    assert [t.pause_after for t in out] == [True, True, True, False]
    assert notes == []
    assert all("(" not in t.surface for t in out)


def test_pause_glued_to_word():
    out, _ = toks("allora(.)andiamo")
    assert [(t.surface, t.pause_after) for t in out] == [("allora", True), ("andiamo", False)]


def test_pause_at_unit_start_is_dropped_with_notice():
    out, notes = toks("(.) allora")
    assert [(t.surface, t.pause_after) for t in out] == [("allora", False)]
    assert codes(notes) == ["pause-at-start"]


def test_cutoff_and_tilde():
    out, _ = toks("sta- stavo and~ andavo")
    assert [(t.surface, t.cutoff) for t in out] == [
        ("sta~", True), ("stavo", False), ("and~", True), ("andavo", False)]


def test_internal_hyphen_is_not_a_cutoff():
    out, _ = toks("semi-serio")
    assert [(t.surface, t.cutoff) for t in out] == [("semi-serio", False)]


def test_lone_hyphen_dropped():
    out, notes = toks("allora - sì")
    assert [t.surface for t in out] == ["allora", "sì"]
    assert codes(notes) == ["stray"]


def test_prolongation():
    out, _ = toks("be::ne no:")
    assert [(t.surface, t.prolonged) for t in out] == [("bene", True), ("no", True)]


def test_overlap_brackets():
    out, notes = toks("allora [sì va] bene")
    assert [t.in_overlap for t in out] == [False, True, True, False]
    assert notes == []


def test_unmatched_close_marks_unit_start():
    out, notes = toks("sì va] bene")
    assert [t.in_overlap for t in out] == [True, True, False]
    assert codes(notes) == ["unmatched-close"]


def test_unmatched_open_runs_to_end():
    out, notes = toks("allora [sì va")
    assert [t.in_overlap for t in out] == [False, True, True]
    assert codes(notes) == ["unmatched-open"]


def test_quiet_fast_slow_loud():
    out, _ = toks("°piano° >veloce< <lento> FORTE")
    flags = [(t.surface, t.quiet, t.fast, t.slow, t.loud) for t in out]
    assert flags == [
        ("piano", True, False, False, False),
        ("veloce", False, True, False, False),
        ("lento", False, False, True, False),
        ("FORTE", False, False, False, True),
    ]


def test_latching():
    out, _ = toks("allora= =sì")
    assert [(t.surface, t.latched) for t in out] == [("allora", True), ("sì", True)]


def test_uncertain_and_comment():
    out, notes = toks("(forse) ((ride)) sì")
    assert [(t.surface, t.uncertain) for t in out] == [("forse", True), ("sì", False)]
    assert notes == []


def test_unclosed_comment():
    out, notes = toks("sì ((ride")
    assert [t.surface for t in out] == ["sì"]
    assert codes(notes) == ["unclosed-comment"]


def test_empty_and_marker_only_units():
    assert toks("")[0] == []
    assert toks("   ")[0] == []
    out, notes = toks("((ride))")
    assert out == [] and notes == []
    out, notes = toks("(.)")
    assert out == [] and codes(notes) == ["pause-at-start"]


def test_detached_terminator():
    out, notes = toks("sì .")
    assert [(t.surface, t.intonation) for t in out] == [("sì", None)]
    assert codes(notes) == ["detached-terminator"]
    out, notes = toks("? sì")
    assert codes(notes) == ["terminator-at-start"]


def test_apostrophe_kept():
    out, _ = toks("l'acqua po'")
    assert [t.surface for t in out] == ["l'acqua", "po'"]


def test_no_diagnostics_list():
    assert [t.surface for t in tokenize_jefferson("sì ] [ ((")] == ["sì"]


def test_render_text_jefferson():
    assert render_text_jefferson("  allora\t(.)  [sì]\n ") == "allora (.) [sì]"


def test_plain_text():
    out, _ = toks("sta- [stavo] andando.")
    assert plain_text(out) == "sta~ stavo andando"


@settings(max_examples=400, deadline=None)
@given(st.text(alphabet=st.sampled_from(list("ab Z-~.?,()[]°<>=:0 \t'")) | st.characters(), max_size=40))
def test_lexer_never_raises_and_surfaces_are_clean(raw):
    notes = []
    out = tokenize_jefferson(raw, notes)
    for t in out:
        assert t.surface
        assert not any(c.isspace() for c in t.surface)
        assert not set(t.surface) & set("[]°<>=:()")
        assert t.cutoff == t.surface.endswith("~")
    assert all(n.code and n.where.startswith("offset ") for n in notes)
