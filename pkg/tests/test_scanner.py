import json
import random

import pytest
from hypothesis import given, strategies as st

from rawfilter.scanner import RecordSpan, ScannerState, iter_events, scan_byte, segment_records

from conftest import random_json_record, stdlib_in_string_mask


def events(data: bytes):
    return list(iter_events(data))


def test_levels_follow_brackets():
    evs = events(b'{"a":[{"b":1}]}')
    assert [e.level for e in evs] == [1, 1, 1, 1, 1, 2, 3, 3, 3, 3, 3, 3, 3, 2, 1]
    assert evs[-1].record_end
    assert not any(e.record_end for e in evs[:-1])


def test_escaped_quote_keeps_brace_in_string():
    data = b'{"k":"a\\"b{"}'
    evs = events(data)
    brace = evs[10]
    assert data[10:11] == b"{"
    assert brace.in_string
    assert brace.level == 1  # no level change inside the string
    assert evs[-1].level == 1 and evs[-1].record_end


def test_opening_quote_outside_content_and_closing_inside():
    evs = events(b'{"ab":1}')
    # offsets: 0:{ 1:" 2:a 3:b 4:" 5:: 6:1 7:}
    assert [e.in_string for e in evs] == [False, False, True, True, True, False, False, False]


def test_listing_record_is_single_span(listing_record):
    spans = segment_records(listing_record)
    assert spans == [RecordSpan(0, len(listing_record), False)]


def test_scope_ids_are_stable_and_fresh():
    evs = events(b'[{"a":1},{"b":2}]')
    # array scope id 1, first object 2, second object 3
    assert evs[0].scope_id == 1
    assert {e.scope_id for e in evs[1:8]} == {2}
    assert {e.scope_id for e in evs[9:16]} == {3}
    assert evs[8].scope_id == 1  # the comma between the objects
    assert evs[8].structural_comma


def test_segments_count_commas_per_scope():
    evs = events(b'{"a":1,"b":[2,3],"c":4}')
    segs = {e.offset: e.segment for e in evs}
    assert segs[1] == 0  # "a" in first segment
    assert segs[8] == 1  # "b" after the first comma
    assert segs[12] == 0  # 2 inside the array's first segment
    assert segs[14] == 1  # 3 after the array's comma
    assert segs[18] == 2  # "c" in the object's third segment


def test_structural_comma_never_inside_string():
    for ev in events(b'{"a":"x,y",\n"b":[1,2]}'):
        if ev.structural_comma:
            assert not ev.in_string


def test_underflow_clamps_and_flags():
    state = ScannerState()
    out = [scan_byte(state, b) for b in b"}}{}"]
    assert state.malformed
    assert [e.level for e in out] == [0, 0, 1, 1]
    assert out[3].record_end


def test_escape_pending_only_inside_strings():
    state = ScannerState()
    for b in b'\\\\{"a\\\\":1}':
        scan_byte(state, b)
        assert not state.escape_pending or state.in_string


class TestSegmentation:
    def test_two_records_newline(self):
        assert segment_records(b"{}\n{}") == [RecordSpan(0, 2), RecordSpan(3, 5)]

    def test_brace_inside_string_ignored(self):
        assert segment_records(b'{"a":"}"}') == [RecordSpan(0, 9)]

    def test_empty_input(self):
        assert segment_records(b"") == []
        assert segment_records(b"  \n\t ") == []

    def test_back_to_back_records(self):
        assert segment_records(b"{}[]") == [RecordSpan(0, 2), RecordSpan(2, 4)]

    def test_unclosed_tail_is_malformed_but_kept(self):
        spans = segment_records(b'{"a":1}\n{"b":')
        assert spans[0] == RecordSpan(0, 7)
        assert spans[1].malformed and spans[1].end == 13

    def test_scalar_records(self):
        spans = segment_records(b"42\ntrue\n")
        assert [(s.start, s.end) for s in spans] == [(0, 2), (3, 7)]
        assert not any(s.malformed for s in spans)

    def test_string_scalar_with_masked_newline(self):
        spans = segment_records(b'"a\nb"\n42')
        assert [(s.start, s.end) for s in spans] == [(0, 5), (6, 8)]


def test_valid_json_ends_balanced():
    rng = random.Random(0)
    for _ in range(200):
        record = random_json_record(rng)
        state = ScannerState()
        for b in record:
            scan_byte(state, b)
        assert state.nesting_level == 0
        assert not state.malformed
        assert not state.in_string


def test_scan_is_deterministic():
    rng = random.Random(1)
    data = b"\n".join(random_json_record(rng) for _ in range(20))
    assert events(data) == events(data)


def test_stack_depth_tracks_level():
    rng = random.Random(2)
    state = ScannerState()
    for b in random_json_record(rng):
        scan_byte(state, b)
        assert len(state.scope_stack) == state.nesting_level


_json_text = st.recursive(
    st.none()
    | st.booleans()
    | st.integers(-(10**9), 10**9)
    | st.floats(allow_nan=False, allow_infinity=False)
    | st.text(st.characters(min_codepoint=32, max_codepoint=126) | st.sampled_from('"\\{}[],\n'), max_size=12),
    lambda inner: st.lists(inner, max_size=3)
    | st.dictionaries(st.text(st.sampled_from('ab"\\{'), max_size=4), inner, max_size=3),
    max_leaves=12,
).map(lambda v: json.dumps(v, ensure_ascii=True))


@given(_json_text)
def test_string_mask_matches_stdlib_tokenizer(text):
    mask = [e.in_string for e in events(text.encode())]
    assert mask == stdlib_in_string_mask(text)


@given(_json_text)
def test_rescan_yields_identical_events(text):
    data = text.encode()
    assert events(data) == events(data)
