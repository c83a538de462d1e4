import pytest
from hypothesis import given, settings, strategies as st

from spokenud.conllu import (
    DEFAULT_URL_TEMPLATE,
    ConlluToken,
    SoundUrlTemplate,
    attach_coconstruction,
    build_sound_url,
    emit_utterance,
    format_block,
    read_conllu,
    utterance_rows,
)
from spokenud.eaf import SpeakerRecord, load_conversation_store, load_speaker_store, parse_eaf
from spokenud.errors import ConlluParseError, EmitError, TemplateError
from spokenud.normalize import OrigLang
from spokenud.overlap import annotate_overlap, compute_overlaps
from spokenud.pipeline import ConvertConfig, convert_conversation
from spokenud.segment import segment_per_tu
from synth import eaf_bytes, random_conversation, seeded

TPL = SoundUrlTemplate(DEFAULT_URL_TEMPLATE)


def one_utt(text, begin=1200, end=3400):
    conv = parse_eaf(eaf_bytes([("a1", "SP1", begin, end, text)]), "conv01", "m")
    return segment_per_tu(conv)[0]


def test_sound_url():
    tpl = SoundUrlTemplate("https://x/{conversation_id}/{begin_ms}-{end_ms}.wav")
    assert build_sound_url(tpl, "conv01", 1200, 3400) == "https://x/conv01/1200-3400.wav"
    with pytest.raises(EmitError):
        build_sound_url(tpl, "conv01", 5, 4)


@pytest.mark.parametrize("tpl", [
    "https://x/{conversation_id}", "{conversation_id}{begin_ms}{end_ms}{end_ms}", "a\t{conversation_id}{begin_ms}{end_ms}",
])
def test_bad_templates(tpl):
    with pytest.raises(TemplateError):
        SoundUrlTemplate(tpl)


def test_emit_hand_written_block():
    utt = one_utt("okey (.) eh [sta- stavo] andando?")
    mark = annotate_overlap(utt, {utt.sent_id: ["conv01-00002"]})
    origlang = {("a1", 5): OrigLang("dialect")}
    block = emit_utterance(utt, SpeakerRecord("SP1"), mark, origlang, TPL)
    assert block == (
        "# sent_id = conv01-00001\n"
        "# speaker_id = SP1\n"
        "# sound_url = https://example.org/audio/conv01?start=1200&end=3400\n"
        "# overlap = conv01-00002\n"
        "# text = okay eh sta~ stavo andando\n"
        "# text_jefferson = okey (.) eh [sta- stavo] andando?\n"
        "1\tokay\t_\t_\t_\t_\t_\t_\t_\tAlignBegin=1200|PauseAfter=Yes\n"
        "2\teh\t_\tINTJ\t_\t_\t_\t_\t_\t_\n"
        "3\tsta~\t_\t_\t_\t_\t_\t_\t_\tOverlap=Yes\n"
        "4\tstavo\t_\t_\t_\t_\t_\t_\t_\tOverlap=Yes\n"
        "5\tandando\t_\t_\t_\t_\t_\t_\t_\tAlignEnd=3400|Intonation=Question|OrigLang=dialect\n"
        "\n"
    )


def test_single_token_carries_both_alignments():
    rows = utterance_rows(one_utt("sì."))
    assert rows[0].misc == (("AlignBegin", "1200"), ("AlignEnd", "3400"), ("Intonation", "Descending"))


def test_speaker_mismatch():
    with pytest.raises(EmitError, match="SP2"):
        emit_utterance(one_utt("sì"), SpeakerRecord("SP2"), None, {}, TPL)


def test_misc_order_is_fixed():
    tok = ConlluToken(1, "x", misc=(("Rel", "conj"), ("Zeta", "1"), ("AlignBegin", "0"), ("Overlap", "Yes")))
    assert tok.misc_text() == "AlignBegin=0|Overlap=Yes|Rel=conj|Zeta=1"


def test_token_rejects_tabs():
    with pytest.raises(EmitError):
        ConlluToken(1, "a\tb")
    with pytest.raises(EmitError):
        ConlluToken(0, "a")


def test_attach_coconstruction():
    tok = attach_coconstruction(ConlluToken(1, "andando"), "conv01-00003", "conj", "conv01-00004")
    assert tok.misc_dict() == {"AttachTo": "conv01-00003", "Rel": "conj"}
    again = attach_coconstruction(tok, "conv01-00002", "obj")
    assert again.misc_text() == "AttachTo=conv01-00002|Rel=obj"
    with pytest.raises(EmitError):
        attach_coconstruction(tok, "conv01-00004", "conj", "conv01-00004")
    with pytest.raises(EmitError):
        attach_coconstruction(tok, "conv01-00003", "")
    with pytest.raises(EmitError):
        attach_coconstruction(tok, "", "conj")
    with pytest.raises(EmitError):
        attach_coconstruction(tok, "a|b", "conj")


def test_format_block_rejects_newline_metadata():
    with pytest.raises(EmitError):
        format_block({"sent_id": "x", "text": "a\nb"}, [ConlluToken(1, "a")])


@pytest.mark.parametrize("text, fragment", [
    ("# sent_id = x\n1\ta\t_\t_\n", ":2: expected 10 columns"),
    ("1-2\tab\t_\t_\t_\t_\t_\t_\t_\t_\n", "unsupported token id"),
    ("1\ta\t_\t_\t_\t_\t_\t_\t_\t_\n3\tb\t_\t_\t_\t_\t_\t_\t_\t_\n", ":2: token id 3"),
    ("# sent_id = x\n", "without tokens"),
    ("1\ta\t_\t_\t_\t_\t_\t_\t_\tfoo\n", "MISC item"),
])
def test_read_conllu_errors(text, fragment):
    with pytest.raises(ConlluParseError, match=fragment) as info:
        read_conllu(text, "f.conllu")
    assert info.value.file == "f.conllu"


def reformat(sentences):
    return "".join(format_block(s.metadata, s.tokens) for s in sentences)


def test_golden_parse_emit_identity(golden_text):
    assert reformat(read_conllu(golden_text)) == golden_text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 30))
def test_emit_parse_identity(seed, n):
    rows = random_conversation(seeded(seed), "c", n)
    speakers = {r[1] for r in rows}
    config = ConvertConfig(
        speakers=load_speaker_store(("{" + ",".join(f'"{s}": {{}}' for s in speakers) + "}").encode()),
        conversations=load_conversation_store(b'{"c": {"participants": 3}}'),
    )
    out = convert_conversation(eaf_bytes(rows), "c", config)
    parsed = read_conllu(out.text)
    assert reformat(parsed) == out.text
    assert len(parsed) == out.sentences
    assert sum(len(s.tokens) for s in parsed) == out.tokens


def test_overlap_metadata_lists_partners():
    rows = [("a1", "A", 0, 1000, "[uno]"), ("a2", "B", 500, 1500, "[due]"), ("a3", "C", 600, 700, "tre")]
    utts = segment_per_tu(parse_eaf(eaf_bytes(rows), "c", "m"))
    report = compute_overlaps(utts)
    mark = annotate_overlap(utts[1], report)
    assert mark.metadata == "c-00001 c-00003"
