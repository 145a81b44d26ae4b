from decimal import Decimal

import pytest

from rawfilter.oracle import (
    JsonObject,
    JsonParseError,
    coerce_number,
    eval_exact,
    label_dataset,
    parse_json,
)
from rawfilter.query import parse_query


class TestParse:
    def test_string_values_stay_strings(self):
        value = parse_json(b'{"v":"35.2"}')
        assert value.get("v") == "35.2"

    def test_large_integer(self):
        value = parse_json(b'{"bt":1422748800000}')
        assert value.get("bt") == Decimal(1422748800000)

    def test_exponent_applied(self):
        value = parse_json(b'{"x":1e2}')
        assert value.get("x") == 100

    def test_duplicate_keys_preserved(self):
        value = parse_json(b'{"a":1,"a":5}')
        assert value.pairs == [("a", Decimal(1)), ("a", Decimal(5))]

    def test_malformed_raises(self):
        with pytest.raises(JsonParseError):
            parse_json(b'{"a":')
        with pytest.raises(JsonParseError):
            parse_json(b'{"a":NaN}')


def test_coercion_rules():
    assert coerce_number(Decimal("35.2")) == Decimal("35.2")
    assert coerce_number("35.2") == Decimal("35.2")
    assert coerce_number("-2.1e3") == Decimal("-2100")
    assert coerce_number("far") is None
    assert coerce_number(" 35.2") is None
    assert coerce_number(True) is None
    assert coerce_number([1]) is None


class TestEvalExact:
    def test_listing_record_exceeds_temperature_range(self, listing_record):
        query = parse_query('(0.7 <= "temperature" <= 35.1)')
        assert eval_exact(query, parse_json(listing_record)) is False

    def test_listing_record_humidity(self, listing_record):
        value = parse_json(listing_record)
        assert eval_exact(parse_query('(10 <= "humidity" <= 69.1)'), value) is True
        assert eval_exact(parse_query('(20 <= "humidity" <= 69.1)'), value) is False

    def test_empty_record_never_matches(self):
        assert eval_exact(parse_query('(0 <= "x" <= 1)'), parse_json(b"{}")) is False

    def test_flat_key_occurrence(self):
        query = parse_query('(2.5 <= "tolls_amount" <= 18)')
        assert eval_exact(query, parse_json(b'{"tolls_amount":2.5}')) is True
        assert eval_exact(query, parse_json(b'{"tolls_amount":"2.5"}')) is True
        assert eval_exact(query, parse_json(b'{"tolls_amount":20}')) is False

    def test_string_and_number_values_label_identically(self):
        query = parse_query('(0.7 <= "temperature" <= 35.1)')
        as_number = parse_json(b'{"e":[{"v":35.2,"n":"temperature"}]}')
        as_string = parse_json(b'{"e":[{"v":"35.2","n":"temperature"}]}')
        assert eval_exact(query, as_number) == eval_exact(query, as_string) is False

    def test_existential_over_duplicates(self):
        query = parse_query('(4 <= "a" <= 6)')
        assert eval_exact(query, parse_json(b'{"a":1,"a":5}')) is True
        assert eval_exact(query, parse_json(b'{"a":1,"a":9}')) is False

    def test_nested_occurrence(self):
        query = parse_query('(1 <= "x" <= 2)')
        assert eval_exact(query, parse_json(b'{"outer":[{"x":1.5}]}')) is True

    def test_non_coercible_occurrence_is_false(self):
        query = parse_query('(1 <= "x" <= 2)')
        assert eval_exact(query, parse_json(b'{"x":{"y":1}}')) is False

    def test_and_or_combination(self):
        value = parse_json(b'{"a":1,"b":9}')
        assert eval_exact(parse_query('(0 <= "a" <= 2) AND (8 <= "b" <= 10)'), value)
        assert not eval_exact(parse_query('(0 <= "a" <= 2) AND (0 <= "b" <= 2)'), value)
        assert eval_exact(parse_query('(5 <= "a" <= 6) OR (8 <= "b" <= 10)'), value)

    def test_senml_object_requires_matching_name(self):
        query = parse_query('(0 <= "temperature" <= 100)')
        assert not eval_exact(query, parse_json(b'{"e":[{"v":"50","n":"humidity"}]}'))


class TestLabelDataset:
    def test_toy_selectivity(self):
        query = parse_query('(0 <= "a" <= 5)')
        records = [b'{"a":1}', b'{"a":9}', b'{"a":2}', b'{"a":3}', b'{"a":8}',
                   b'{"a":4}', b'{"b":1}', b'{"a":"x"}', b'{"a":null}', b'{}']
        result = label_dataset(query, records)
        assert result.matches == 4
        assert result.selectivity == pytest.approx(0.4)
        assert not result.empty

    def test_empty_dataset_flagged(self):
        result = label_dataset(parse_query('(0 <= "a" <= 1)'), [])
        assert result.selectivity == 0.0
        assert result.empty

    def test_malformed_records_counted_separately(self):
        query = parse_query('(0 <= "a" <= 5)')
        result = label_dataset(query, [b'{"a":1}', b'{"a":'])
        assert result.malformed_count == 1
        assert [lab.exact_match for lab in result.labels] == [True, False]
        assert not result.labels[1].parse_ok
