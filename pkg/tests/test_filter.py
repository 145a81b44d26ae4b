import random

import pytest

from rawfilter.errors import ConfigError
from rawfilter.filter import (
    AndNode,
    FilterConfig,
    Mode,
    PredicateConfig,
    ScopeConj,
    SegmentConj,
    accepts,
    compile_filter,
    filter_record,
    parse_config,
    reset_filter,
    serialize_config,
)
from rawfilter.oracle import eval_exact, parse_json
from rawfilter.query import parse_query
from rawfilter.scanner import iter_events

from conftest import senml_record

Q0 = parse_query('(0.7 <= "temperature" <= 35.1)')


def cfg_of(*pairs):
    return FilterConfig(tuple(PredicateConfig(Mode(m), b) for m, b in pairs))


class TestCompile:
    def test_modes_map_to_node_shapes(self):
        assert isinstance(compile_filter(Q0, cfg_of(("FLAT", 1))).root, AndNode)
        assert isinstance(compile_filter(Q0, cfg_of(("SCOPED", 1))).root, ScopeConj)
        assert isinstance(compile_filter(Q0, cfg_of(("KEYVALUE", 1))).root, SegmentConj)
        value_only = compile_filter(Q0, cfg_of(("VALUE_ONLY", None)))
        assert value_only.root.kind == "range"

    def test_scoped_notation_matches_report_style(self):
        expr = compile_filter(Q0, cfg_of(("SCOPED", 1)))
        assert expr.notation() == '{ s1("temperature") & v(0.7<=f<=35.1) }'

    def test_omit_drops_leaf_from_and(self):
        ast = parse_query('(1 <= "aa" <= 2) AND (3 <= "bb" <= 4)')
        expr = compile_filter(ast, cfg_of(("OMIT", None), ("VALUE_ONLY", None)))
        assert expr.root.kind == "range"
        assert len(expr.leaves) == 1

    def test_omitting_every_predicate_fails(self):
        ast = parse_query('(1 <= "aa" <= 2) AND (3 <= "bb" <= 4)')
        with pytest.raises(ConfigError):
            compile_filter(ast, cfg_of(("OMIT", None), ("OMIT", None)))

    def test_omit_under_or_fails(self):
        ast = parse_query('(1 <= "aa" <= 2) OR (3 <= "bb" <= 4)')
        with pytest.raises(ConfigError):
            compile_filter(ast, cfg_of(("OMIT", None), ("VALUE_ONLY", None)))

    def test_block_required_for_string_modes(self):
        with pytest.raises(ConfigError):
            PredicateConfig(Mode.SCOPED, None)
        with pytest.raises(ConfigError):
            PredicateConfig(Mode.VALUE_ONLY, 2)

    def test_each_primitive_in_exactly_one_leaf(self):
        ast = parse_query('(1 <= "aa" <= 2) AND (3 <= "bb" <= 4)')
        expr = compile_filter(ast, cfg_of(("SCOPED", 1), ("FLAT", 2)))
        prims = [leaf.primitive for leaf in expr.leaves]
        assert len(prims) == len(set(map(id, prims))) == 4


class TestRunningExample:
    def test_flat_accepts_scoped_rejects(self, listing_record):
        flat = compile_filter(Q0, cfg_of(("FLAT", 1)))
        scoped = compile_filter(Q0, cfg_of(("SCOPED", 1)))
        assert accepts(flat, listing_record) is True
        assert accepts(scoped, listing_record) is False

    def test_true_match_accepted_by_both(self, listing_record):
        record = listing_record.replace(b'"35.2"', b'"30.0"')
        for mode in ("FLAT", "SCOPED"):
            expr = compile_filter(Q0, cfg_of((mode, 1)))
            assert accepts(expr, record) is True
        assert eval_exact(Q0, parse_json(record)) is True

    def test_empty_record_rejected(self):
        expr = compile_filter(Q0, cfg_of(("SCOPED", 1)))
        assert accepts(expr, b"{}") is False


class TestReset:
    def test_no_leak_across_records(self):
        # the pattern split across a record boundary must not latch
        expr = compile_filter(Q0, cfg_of(("FLAT", 1)))
        first = b'{"n":"temper'
        second = b'ature","v":12}'
        assert accepts(expr, first) is False
        assert accepts(expr, second) is False
        assert accepts(expr, first + second) is True

    def test_reset_clears_logs_and_latches(self, listing_record):
        expr = compile_filter(Q0, cfg_of(("SCOPED", 1)))
        filter_record(expr, listing_record)
        assert any(leaf.fires_by_scope for leaf in expr.leaves)
        reset_filter(expr)
        for leaf in expr.leaves:
            assert not leaf.fires_by_scope and not leaf.fires_by_segment
            assert not leaf.latched

    def test_reset_is_idempotent(self):
        expr = compile_filter(Q0, cfg_of(("SCOPED", 1)))
        reset_filter(expr)
        reset_filter(expr)
        assert accepts(expr, b'{"v":"12","n":"temperature"}') is True


def test_scope_attribution_matches_scanner_ground_truth():
    rng = random.Random(9)
    expr = compile_filter(Q0, cfg_of(("SCOPED", 1)))
    for _ in range(50):
        record = senml_record(rng, ["temperature", "humidity"])
        reset_filter(expr)
        filter_record(expr, record)
        events = list(iter_events(record))
        for leaf in expr.leaves:
            if leaf.kind != "string":
                continue
            for scope, offset in leaf.fires_by_scope.items():
                assert events[offset].scope_id == scope


def test_monotone_refinement_scoped_flat_value():
    rng = random.Random(10)
    value_only = compile_filter(Q0, cfg_of(("VALUE_ONLY", None)))
    flat = compile_filter(Q0, cfg_of(("FLAT", 1)))
    scoped = compile_filter(Q0, cfg_of(("SCOPED", 1)))
    for _ in range(300):
        record = senml_record(rng, ["temperature", "humidity", "light"], lo=-10, hi=100)
        a_scoped = accepts(scoped, record)
        a_flat = accepts(flat, record)
        a_value = accepts(value_only, record)
        assert (not a_scoped or a_flat) and (not a_flat or a_value)


class TestSegmentConjunction:
    QT_TOLLS = parse_query('(2.5 <= "tolls_amount" <= 18)')

    def expr(self):
        return compile_filter(self.QT_TOLLS, cfg_of(("KEYVALUE", 1)))

    def test_key_and_value_in_same_segment(self):
        assert accepts(self.expr(), b'{"fare":1,"tolls_amount":3.5,"tip":0}') is True

    def test_key_and_value_in_different_segments(self):
        assert accepts(self.expr(), b'{"tolls_amount":99,"other":3.5}') is False

    def test_scoped_accepts_what_keyvalue_refines(self):
        record = b'{"tolls_amount":99,"other":3.5}'
        scoped = compile_filter(self.QT_TOLLS, cfg_of(("SCOPED", 1)))
        assert accepts(scoped, record) is True


def test_or_query_accepts_when_one_branch_fires():
    ast = parse_query('(1000 <= "light" <= 2000) OR (0.7 <= "temperature" <= 35.1)')
    expr = compile_filter(ast, cfg_of(("SCOPED", 1), ("SCOPED", 1)))
    assert accepts(expr, b'{"v":"12","n":"temperature"}') is True
    assert accepts(expr, b'{"v":"1500","n":"light"}') is True
    assert accepts(expr, b'{"v":"99","n":"humidity"}') is False


class TestConfigText:
    def test_round_trip(self):
        ast = parse_query('(1 <= "aa" <= 2) AND (3 <= "bb" <= 4)')
        for cfg in (
            cfg_of(("SCOPED", 1), ("FLAT", 2)),
            cfg_of(("OMIT", None), ("KEYVALUE", "N")),
            cfg_of(("VALUE_ONLY", None), ("VALUE_ONLY", None)),
        ):
            text = serialize_config(ast, cfg)
            assert parse_config(text, ast) == cfg

    def test_symbolic_n_resolves(self):
        text = "temperature SCOPED N\n"
        cfg = parse_config(text, Q0)
        assert cfg.predicates[0].block == "N"

    def test_attribute_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("humidity SCOPED 1\n", Q0)

    def test_dash_required_without_string(self):
        with pytest.raises(ConfigError):
            parse_config("temperature VALUE_ONLY 1\n", Q0)

    def test_comments_and_blank_lines_ignored(self):
        text = "# choice\n\ntemperature SCOPED 2  # block 2\n"
        cfg = parse_config(text, Q0)
        assert cfg.predicates[0] == PredicateConfig(Mode.SCOPED, 2)
