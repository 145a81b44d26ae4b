"""Vectorized corpus pipeline.

Runs the same scanner/primitive/composition semantics as the per-byte
reference path, but over whole buffers with numpy. The structural masks are
computed simdjson-style (backslash-run parity for escapes, quote parity for
the string mask, bracket cumsums for nesting); primitives reduce to lookup
tables, run-length arithmetic and per-token DFA lockstep.

The fast path assumes streams where backslashes only occur inside strings
and brackets never underflow; anything else falls back to the reference
scanner, so results are identical on every input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scanner as _scanner
from .filter import Mode, validate_config
from .query import And, Predicate, QueryAst
from .ranges import NUMERIC_CLASS, RangeDfa, _IS_DIGIT, _IS_EXP, build_range_dfa
from .scanner import RecordSpan
from .strings import build_substring_set, resolve_block_len

_WS = np.zeros(256, dtype=bool)
for _c in b" \t\r\n":
    _WS[_c] = True

_OPEN_LUT = np.zeros(256, dtype=bool)
_OPEN_LUT[ord("{")] = _OPEN_LUT[ord("[")] = True
_CLOSE_LUT = np.zeros(256, dtype=bool)
_CLOSE_LUT[ord("}")] = _CLOSE_LUT[ord("]")] = True


@dataclass
class ScanIndex:
    """Structural view of one buffer: masks plus sparse position tables."""

    data: np.ndarray  # uint8
    in_string: np.ndarray  # bool per byte, content + closing quote
    level: np.ndarray  # int32 per byte, close brackets keep their scope level
    open_pos: np.ndarray  # positions of structural opens; scope id = index + 1
    opens_by_level: dict  # level -> sorted positions of structural opens
    commas_by_level: dict  # level -> sorted positions of structural commas
    rec_starts: np.ndarray
    rec_ends: np.ndarray
    rec_malformed: np.ndarray
    inside: np.ndarray  # bool per byte: belongs to some record span
    rec_start_per_pos: np.ndarray  # int32, valid where inside

    _positions: np.ndarray | None = None
    _tokens: tuple | None = None

    @property
    def n_records(self) -> int:
        return len(self.rec_starts)

    @property
    def positions(self) -> np.ndarray:
        if self._positions is None:
            self._positions = np.arange(len(self.data), dtype=np.int32)
        return self._positions

    def numeric_tokens(self) -> tuple:
        """Digit-bearing token geometry, shared by every range primitive.

        Returns (starts, ends_inclusive, last_digit, heuristic_fire).
        """
        if self._tokens is not None:
            return self._tokens
        d = self.data
        n = len(d)
        empty = np.empty(0, dtype=np.int64)
        if n == 0:
            self._tokens = (empty, empty, empty, np.empty(0, dtype=bool))
            return self._tokens
        num = NUMERIC_CLASS[d] & self.inside
        prev = np.empty(n, dtype=bool)
        prev[0] = False
        prev[1:] = num[:-1]
        nxt = np.empty(n, dtype=bool)
        nxt[-1] = False
        nxt[:-1] = num[1:]
        starts = np.nonzero(num & ~prev)[0]
        if len(starts) == 0:
            self._tokens = (empty, empty, empty, np.empty(0, dtype=bool))
            return self._tokens
        ends = np.nonzero(num & ~nxt)[0]  # inclusive last byte per token

        # Tokens without a digit never fire; drop them before the heavy work.
        isdig = _IS_DIGIT[d]
        dig_cum = np.concatenate(([0], np.cumsum(isdig, dtype=np.int32)))
        has_digit = (dig_cum[ends + 1] - dig_cum[starts]) > 0
        starts, ends = starts[has_digit], ends[has_digit]
        if len(starts) == 0:
            self._tokens = (empty, empty, empty, np.empty(0, dtype=bool))
            return self._tokens

        idx = self.positions
        bounds = np.column_stack((starts, ends + 1)).ravel()
        idx_dig = np.concatenate((np.where(isdig, idx, np.int32(-1)), [np.int32(-1)]))
        last_digit = np.maximum.reduceat(idx_dig, bounds)[::2]
        if bool(np.any(_IS_EXP[d] & num)):
            sentinel = np.int32(-n - 1)
            neg_idx_dig = np.concatenate((np.where(isdig, -idx, sentinel), [sentinel]))
            first_digit = -np.maximum.reduceat(neg_idx_dig, bounds)[::2]
            idx_exp = np.concatenate((np.where(_IS_EXP[d], idx, np.int32(-1)), [np.int32(-1)]))
            last_exp = np.maximum.reduceat(idx_exp, bounds)[::2]
            heuristic = last_exp > first_digit
        else:
            heuristic = np.zeros(len(starts), dtype=bool)
        self._tokens = (starts, ends, last_digit, heuristic)
        return self._tokens

    def spans(self) -> list[RecordSpan]:
        return [
            RecordSpan(int(s), int(e), bool(m))
            for s, e, m in zip(self.rec_starts, self.rec_ends, self.rec_malformed)
        ]

    def record_of(self, positions: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.rec_starts, positions, side="right") - 1

    def attribute_many(self, positions: np.ndarray):
        """Vectorized (record, scope_id, segment) for an array of positions."""
        pos = np.asarray(positions, dtype=np.int64)
        rec = self.record_of(pos)
        scope = np.zeros(len(pos), dtype=np.int64)
        segment = np.zeros(len(pos), dtype=np.int64)
        lvl = self.level[pos]
        for level in np.unique(lvl):
            sel = lvl == level
            p = pos[sel]
            if level <= 0:
                left = self.rec_starts[np.maximum(rec[sel], 0)]
            else:
                opens = self.opens_by_level[int(level)]
                left = opens[np.searchsorted(opens, p, side="right") - 1]
                scope[sel] = np.searchsorted(self.open_pos, left) + 1
            commas = self.commas_by_level.get(int(level))
            if commas is not None and len(commas):
                segment[sel] = np.searchsorted(commas, p, side="left") - np.searchsorted(
                    commas, left, side="right"
                )
        return rec, scope, segment

    def attribute(self, pos: int) -> tuple[int, int]:
        """(scope_id, segment) in effect for the byte at ``pos``."""
        rec, scope, segment = self.attribute_many(np.asarray([pos]))
        return int(scope[0]), int(segment[0])


def _finish_index(data, in_string, level, open_pos, opens_by_level, commas_by_level,
                  rec_starts, rec_ends, rec_malformed) -> ScanIndex:
    n = len(data)
    inside_delta = np.zeros(n + 1, dtype=np.int8)
    if len(rec_starts):
        inside_delta[rec_starts] = 1
        np.subtract.at(inside_delta, rec_ends, 1)
    inside = np.cumsum(inside_delta[:n], dtype=np.int32) > 0
    marker = np.zeros(n, dtype=np.int32)
    if len(rec_starts):
        marker[rec_starts] = 1
        ordinal = np.cumsum(marker, dtype=np.int32) - 1
        rec_start_per_pos = rec_starts.astype(np.int32)[np.maximum(ordinal, 0)]
    else:
        rec_start_per_pos = np.zeros(n, dtype=np.int32)
    return ScanIndex(
        data, in_string, level, open_pos, opens_by_level, commas_by_level,
        rec_starts, rec_ends, rec_malformed, inside, rec_start_per_pos,
    )


def drop_last_record(index: ScanIndex) -> ScanIndex:
    """Remove the final record span in place (chunk carry)."""
    start, end = int(index.rec_starts[-1]), int(index.rec_ends[-1])
    index.inside[start:end] = False
    index.rec_starts = index.rec_starts[:-1]
    index.rec_ends = index.rec_ends[:-1]
    index.rec_malformed = index.rec_malformed[:-1]
    return index


def _segment_fallback(data: bytes, end_positions, newline_positions, eof_in_string):
    """Mirror scanner.segment_records; handles scalars and malformed tails."""
    n = len(data)
    starts, ends, malformed = [], [], []
    p = 0
    while p < n:
        b = data[p]
        if b in b" \t\r\n":
            p += 1
            continue
        if b in b"{[":
            k = int(np.searchsorted(end_positions, p, side="left"))
            if k < len(end_positions):
                end = int(end_positions[k]) + 1
                starts.append(p)
                ends.append(end)
                malformed.append(False)
                p = end
            else:
                starts.append(p)
                ends.append(n)
                malformed.append(True)
                p = n
        else:
            k = int(np.searchsorted(newline_positions, p, side="left"))
            if k < len(newline_positions):
                end = int(newline_positions[k])
                starts.append(p)
                ends.append(end)
                malformed.append(False)
                p = end + 1
            else:
                starts.append(p)
                ends.append(n)
                malformed.append(bool(eof_in_string))
                p = n
    return (
        np.asarray(starts, dtype=np.int64),
        np.asarray(ends, dtype=np.int64),
        np.asarray(malformed, dtype=bool),
    )


def _segment_positions(data: bytes, d, end_positions, newline_positions, eof_in_string):
    """Record spans; vectorized for streams of bracket records (possibly
    with one unclosed trailing record), general fallback for the rest."""
    n = len(d)
    n_rec = len(end_positions)
    if n_rec:
        nonws = np.nonzero(~_WS[d])[0]
        if len(nonws):
            gap_after = np.searchsorted(nonws, end_positions + 1, side="left")
            starts = np.concatenate(([nonws[0]], nonws[gap_after[:-1]]))
            ends = end_positions + 1
            malformed = np.zeros(n_rec, dtype=bool)
            if gap_after[-1] < len(nonws):
                # Bytes after the last balanced record: an unclosed tail.
                tail = int(nonws[gap_after[-1]])
                if _OPEN_LUT[d[tail]]:
                    starts = np.concatenate((starts, [tail]))
                    ends = np.concatenate((ends, [n]))
                    malformed = np.concatenate((malformed, [True]))
                else:
                    starts = None
            if starts is not None and bool(_OPEN_LUT[d[starts]].all()) and bool(
                (starts[:n_rec] <= end_positions).all()
            ):
                return starts.astype(np.int64), ends.astype(np.int64), malformed
    return _segment_fallback(data, end_positions, newline_positions, eof_in_string)


def _build_fast(data: bytes) -> ScanIndex | None:
    d = np.frombuffer(data, dtype=np.uint8)
    n = len(d)

    quote = d == ord('"')
    bs = d == ord("\\")
    if bool(bs.any()):
        # Length of the backslash run immediately before each byte decides
        # whether it is escaped.
        idx = np.arange(n, dtype=np.int32)
        last_non_bs = np.maximum.accumulate(np.where(~bs, idx, np.int32(-1)))
        prev_last = np.empty(n, dtype=np.int32)
        prev_last[0] = -1
        prev_last[1:] = last_non_bs[:-1]
        escaped = ((idx - 1 - prev_last) & 1) == 1
        real_quote = quote & ~escaped
    else:
        real_quote = quote

    qcum = np.cumsum(real_quote, dtype=np.int32)
    parity_excl = (qcum - real_quote) & 1
    in_string = parity_excl == 1
    outside = ~in_string
    if bool(bs.any()) and bool(np.any(bs & outside)):
        return None  # reference escape semantics differ outside strings

    opens = _OPEN_LUT[d] & outside
    closes = _CLOSE_LUT[d] & outside
    lvl_after = np.cumsum(opens.view(np.int8) - closes.view(np.int8), dtype=np.int32)
    if n and int(lvl_after.min()) < 0:
        return None  # bracket underflow clamps in the reference scanner
    level = lvl_after + closes

    end_positions = np.nonzero(closes & (level == 1))[0]
    newline_positions = np.nonzero((d == ord("\n")) & outside & (level == 0))[0]
    eof_in_string = bool(n) and bool(qcum[-1] & 1)
    rec_starts, rec_ends, rec_malformed = _segment_positions(
        data, d, end_positions, newline_positions, eof_in_string
    )

    open_pos = np.nonzero(opens)[0]
    open_level = level[open_pos]
    opens_by_level = {int(lvl): open_pos[open_level == lvl] for lvl in np.unique(open_level)}
    comma_pos = np.nonzero((d == ord(",")) & outside)[0]
    comma_level = level[comma_pos]
    commas_by_level = {
        int(lvl): comma_pos[comma_level == lvl] for lvl in np.unique(comma_level)
    }
    return _finish_index(
        d, in_string, level, open_pos, opens_by_level, commas_by_level,
        rec_starts, rec_ends, rec_malformed,
    )


def _build_reference(data: bytes) -> ScanIndex:
    """Byte-at-a-time construction; used when the fast path bails out."""
    n = len(data)
    in_string = np.zeros(n, dtype=bool)
    level = np.zeros(n, dtype=np.int32)
    open_pos, open_level, comma_pos, comma_level = [], [], [], []
    state = _scanner.ScannerState()
    for ev in _scanner.iter_events(data, state):
        in_string[ev.offset] = ev.in_string
        level[ev.offset] = ev.level
        if not ev.in_string:
            if ev.byte in b"{[":
                open_pos.append(ev.offset)
                open_level.append(ev.level)
            elif ev.structural_comma:
                comma_pos.append(ev.offset)
                comma_level.append(ev.level)
    spans = _scanner.segment_records(data)
    rec_starts = np.asarray([s.start for s in spans], dtype=np.int64)
    rec_ends = np.asarray([s.end for s in spans], dtype=np.int64)
    rec_malformed = np.asarray([s.malformed for s in spans], dtype=bool)
    open_pos = np.asarray(open_pos, dtype=np.int64)
    open_level = np.asarray(open_level, dtype=np.int64)
    opens_by_level = {int(lvl): open_pos[open_level == lvl] for lvl in np.unique(open_level)}
    comma_pos = np.asarray(comma_pos, dtype=np.int64)
    comma_level = np.asarray(comma_level, dtype=np.int64)
    commas_by_level = {
        int(lvl): comma_pos[comma_level == lvl] for lvl in np.unique(comma_level)
    }
    return _finish_index(
        np.frombuffer(data, dtype=np.uint8), in_string, level, open_pos,
        opens_by_level, commas_by_level, rec_starts, rec_ends, rec_malformed,
    )


def build_scan_index(data: bytes) -> ScanIndex:
    fast = _build_fast(data)
    return fast if fast is not None else _build_reference(data)


# --- primitive fires ----------------------------------------------------------


def _exact_fire_positions(index: ScanIndex, pattern: bytes) -> np.ndarray:
    """End positions of exact occurrences fully inside one record."""
    data = index.data.tobytes()
    hits = []
    at = data.find(pattern)
    while at != -1:
        hits.append(at + len(pattern) - 1)
        at = data.find(pattern, at + 1)
    if not hits:
        return np.empty(0, dtype=np.int64)
    ends = np.asarray(hits, dtype=np.int64)
    starts = ends - (len(pattern) - 1)
    ok = index.inside[ends] & (starts >= index.rec_start_per_pos[ends])
    return ends[ok]


def _gram_hit_mask(index: ScanIndex, pattern: bytes, block: int) -> np.ndarray:
    d = index.data
    n = len(d)
    grams = build_substring_set(pattern, block)
    hit = np.zeros(n, dtype=bool)
    if block == 1:
        lut = np.zeros(256, dtype=bool)
        for g in grams:
            lut[g[0]] = True
        hit[:] = lut[d]
    elif block == 2 and n >= 2:
        codes = (d[:-1].astype(np.uint16) << 8) | d[1:]
        gram_codes = np.sort(np.asarray([(g[0] << 8) | g[1] for g in grams], dtype=np.uint16))
        hit[1:] = np.isin(codes, gram_codes)
    else:
        data = d.tobytes()
        for g in grams:
            at = data.find(g)
            while at != -1:
                hit[at + block - 1] = True
                at = data.find(g, at + 1)
    return hit


def string_fire_positions(index: ScanIndex, pattern: bytes, block: int) -> np.ndarray:
    """Positions where the block matcher's run counter sits at threshold."""
    pattern = pattern if isinstance(pattern, bytes) else pattern.encode()
    block = resolve_block_len(pattern, block)
    if block == len(pattern):
        return _exact_fire_positions(index, pattern)
    n = len(index.data)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    idx = index.positions
    hit = _gram_hit_mask(index, pattern, block)
    # Windows must sit inside a single record; runs restart at record starts.
    hit &= index.inside
    if block > 1:
        hit &= idx - np.int32(block - 1) >= index.rec_start_per_pos
    last_miss = np.maximum.accumulate(np.where(~hit, idx, np.int32(-1)))
    barrier = np.maximum(last_miss, index.rec_start_per_pos - np.int32(1))
    threshold = len(pattern) - block + 1
    return np.nonzero(hit & (idx - barrier >= threshold))[0]


def number_fire_positions(index: ScanIndex, rdfa: RangeDfa):
    """(fire offsets, attribution positions of the tokens' last digits)."""
    starts, ends, last_digit, heuristic = index.numeric_tokens()
    empty = np.empty(0, dtype=np.int64)
    if len(starts) == 0:
        return empty, empty
    d = index.data
    lengths = ends - starts + 1
    # Lockstep the DFA over all tokens at once, column by column.
    order = np.argsort(lengths, kind="stable")
    starts_o, lengths_o = starts[order], lengths[order]
    states = np.zeros(len(starts), dtype=np.int16)
    table = rdfa.table
    lo = 0
    for j in range(int(lengths_o[-1])):
        lo = np.searchsorted(lengths_o, j, side="right")
        active = slice(lo, len(starts_o))
        states[active] = table[states[active], d[starts_o[active] + j]]
    accept = np.zeros(len(starts), dtype=bool)
    accept[order] = rdfa.accept_mask[states]
    fired = accept | heuristic
    return (ends[fired] + 1), last_digit[fired]


# --- cached per-primitive record results ---------------------------------------


class PrimitiveFires:
    """Per-record latch flags plus scope/segment fire keys for conjunction."""

    def __init__(self, index: ScanIndex, fire_pos: np.ndarray, attr_pos: np.ndarray):
        self._index = index
        self._fire_pos = fire_pos
        self._attr_pos = attr_pos  # where scope/segment attribution is taken
        rec = index.record_of(attr_pos)
        self.latch = np.zeros(index.n_records, dtype=bool)
        self.latch[rec[rec >= 0]] = True
        self.fire_count = int(len(fire_pos))
        self._scope_keys: np.ndarray | None = None  # sorted unique rec<<32|scope
        self._segments: dict | None = None

    def _attribution(self):
        rec, scope, segment = self._index.attribute_many(self._attr_pos)
        keep = rec >= 0
        return rec[keep], scope[keep], segment[keep]

    @property
    def scope_keys(self) -> np.ndarray:
        if self._scope_keys is None:
            rec, scope, _ = self._attribution()
            self._scope_keys = np.unique((rec << 32) | scope)
        return self._scope_keys

    @property
    def segments(self) -> dict:
        if self._segments is None:
            segments: dict[int, set] = {}
            rec, scope, segment = self._attribution()
            for r, sc, seg in zip(rec.tolist(), scope.tolist(), segment.tolist()):
                segments.setdefault(r, set()).add((sc, seg))
            self._segments = segments
        return self._segments


class CorpusIndex:
    """Scanned corpus plus a cache of primitive results, shared by configs."""

    def __init__(self, data: bytes, index: ScanIndex | None = None):
        self.data = data
        self.index = index if index is not None else build_scan_index(data)
        self._cache: dict = {}

    @property
    def n_records(self) -> int:
        return self.index.n_records

    def records(self) -> list[bytes]:
        return [self.data[int(s) : int(e)] for s, e in zip(self.index.rec_starts, self.index.rec_ends)]

    def string_fires(self, pattern: str | bytes, block) -> PrimitiveFires:
        pattern = pattern.encode() if isinstance(pattern, str) else pattern
        block = resolve_block_len(pattern, block)
        key = ("s", pattern, block)
        if key not in self._cache:
            pos = string_fire_positions(self.index, pattern, block)
            self._cache[key] = PrimitiveFires(self.index, pos, pos)
        return self._cache[key]

    def range_fires(self, bound) -> PrimitiveFires:
        key = ("v", bound)
        if key not in self._cache:
            rdfa = build_range_dfa(bound)
            fire_pos, attr_pos = number_fire_positions(self.index, rdfa)
            self._cache[key] = PrimitiveFires(self.index, fire_pos, attr_pos)
        return self._cache[key]


# --- config evaluation over a corpus -------------------------------------------


def _scope_conj_vector(n_records: int, parts: list) -> np.ndarray:
    common = parts[0].scope_keys
    for p in parts[1:]:
        common = np.intersect1d(common, p.scope_keys, assume_unique=True)
        if len(common) == 0:
            break
    out = np.zeros(n_records, dtype=bool)
    if len(common):
        out[np.unique(common >> 32)] = True
    return out


def _segment_conj_vector(n_records: int, parts: list) -> np.ndarray:
    out = np.zeros(n_records, dtype=bool)
    maps = [p.segments for p in parts]
    base = min(maps, key=len)
    for rec in base:
        sets = [m.get(rec) for m in maps]
        if all(sets) and set.intersection(*sets):
            out[rec] = True
    return out


def evaluate_config_batch(corpus: CorpusIndex, ast: QueryAst, cfg) -> np.ndarray:
    """Accept vector over all records for one configuration."""
    validate_config(ast, cfg)
    n = corpus.n_records
    configs = iter(cfg.predicates)

    def build(node) -> np.ndarray | None:
        if isinstance(node, Predicate):
            pc = next(configs)
            if pc.mode is Mode.OMIT:
                return None
            value = corpus.range_fires(node.bound)
            if pc.mode is Mode.VALUE_ONLY:
                return value.latch.copy()
            string = corpus.string_fires(node.attr, pc.block)
            if pc.mode is Mode.FLAT:
                return string.latch & value.latch
            if pc.mode is Mode.SCOPED:
                return _scope_conj_vector(n, [string, value])
            return _segment_conj_vector(n, [string, value])
        parts = [built for c in node.children if (built := build(c)) is not None]
        if isinstance(node, And):
            out = parts[0]
            for p in parts[1:]:
                out = out & p
            return out
        out = parts[0]
        for p in parts[1:]:
            out = out | p
        return out

    return build(ast)


def primitive_fire_counts(corpus: CorpusIndex, ast: QueryAst, cfg) -> dict:
    """Records latched per primitive, keyed by notation."""
    counts: dict[str, int] = {}
    for leaf, pc in zip(ast.leaves(), cfg.predicates):
        if pc.mode is Mode.OMIT:
            continue
        value = corpus.range_fires(leaf.bound)
        counts[leaf.bound.notation()] = int(value.latch.sum())
        if pc.mode is not Mode.VALUE_ONLY:
            block = resolve_block_len(leaf.attr, pc.block)
            string = corpus.string_fires(leaf.attr, pc.block)
            counts[f's{block}("{leaf.attr}")'] = int(string.latch.sum())
    return counts


# --- streaming over large inputs ------------------------------------------------


def iter_chunk_indexes(stream, chunk_bytes: int = 1 << 22):
    """Yield (ScanIndex, buffer) over record-aligned chunks of a stream."""
    carry = b""
    eof = False
    while not eof or carry:
        buffer = carry
        carry = b""
        while not eof and len(buffer) < chunk_bytes:
            block = stream.read(chunk_bytes)
            if not block:
                eof = True
                break
            buffer += block
        if not buffer:
            break
        index = build_scan_index(buffer)
        if not eof and index.n_records and int(index.rec_ends[-1]) == len(buffer):
            # Final span may continue in the next chunk; carry and retry it.
            if index.n_records == 1:
                carry = buffer + (stream.read(chunk_bytes) or b"")
                if len(carry) == len(buffer):
                    eof = True
                continue
            cut = int(index.rec_starts[-1])
            carry = buffer[cut:]
            buffer = buffer[:cut]
            index = drop_last_record(index)
        elif not eof and not index.n_records:
            carry = buffer + (stream.read(chunk_bytes) or b"")
            if len(carry) == len(buffer):
                eof = True
            continue
        yield index, buffer
