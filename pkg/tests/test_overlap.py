import itertools

from hypothesis import given, settings, strategies as st

from spokenud.eaf import parse_eaf
from spokenud.overlap import annotate_overlap, compute_overlaps
from spokenud.segment import segment_per_tu
from synth import eaf_bytes


def brute_force(utts):
    out = {u.sent_id: [] for u in utts}
    for a, b in itertools.combinations(utts, 2):
        if a.speaker_id != b.speaker_id and min(a.end_ms, b.end_ms) - max(a.begin_ms, b.begin_ms) > 0:
            out[a.sent_id].append(b.sent_id)
            out[b.sent_id].append(a.sent_id)
    return {k: sorted(v) for k, v in out.items()}


def utts_of(rows):
    return segment_per_tu(parse_eaf(eaf_bytes(rows), "c", "m"))


def test_hand_worked():
    utts = utts_of([
        ("a1", "A", 0, 1000, "uno"),
        ("a2", "B", 500, 1500, "due"),
        ("a3", "C", 1500, 2000, "tre"),  # touches a2 only
        ("a4", "A", 1200, 1300, "quattro"),
    ])
    ids = {u.source_tus[0].tu_id: u.sent_id for u in utts}
    report = compute_overlaps(utts)
    assert report[ids["a1"]] == [ids["a2"]]
    assert report[ids["a2"]] == sorted([ids["a1"], ids["a4"]])
    assert report[ids["a3"]] == []


def test_zero_length_span_never_overlaps():
    utts = utts_of([("a1", "A", 0, 1000, "uno"), ("a2", "B", 500, 500, "due")])
    assert all(v == [] for v in compute_overlaps(utts).values())


def test_annotation_marks_only_with_partner():
    utts = utts_of([
        ("a1", "A", 0, 1000, "allora [sì]"),
        ("a2", "B", 800, 1200, "[no]"),
        ("a3", "A", 5000, 6000, "[solo] io"),
    ])
    report = compute_overlaps(utts)
    notes = []
    marks = [annotate_overlap(u, report, notes) for u in utts]
    assert marks[0].token_marks == (False, True)
    assert marks[0].metadata == utts[1].sent_id
    assert marks[1].token_marks == (True,)
    assert marks[2].metadata is None and marks[2].token_marks == (False, False)
    assert [n.code for n in notes] == ["overlap-without-partner"]
    assert notes[0].where == utts[2].sent_id


spans = st.lists(
    st.tuples(st.sampled_from("ABCD"), st.integers(0, 60), st.integers(0, 20)),
    max_size=40,
)


@settings(max_examples=500, deadline=None)
@given(spans)
def test_sweep_matches_brute_force(items):
    # coarse grid makes shared and touching endpoints common
    rows, clock = [], {}
    for i, (spk, start, length) in enumerate(items, 1):
        b = max(start * 100, clock.get(spk, 0))
        e = b + length * 100
        clock[spk] = e
        rows.append((f"a{i}", spk, b, e, "x"))
    utts = utts_of(rows)
    report = compute_overlaps(utts)
    assert report == brute_force(utts)
    for k, partners in report.items():
        for p in partners:
            assert k in report[p]
