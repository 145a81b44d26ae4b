from decimal import Decimal

import pytest

from rawfilter.errors import QueryError
from rawfilter.query import And, Or, Predicate, parse_query

QS0 = """
(0.7 <= "temperature" <= 35.1) AND (20.3 <= "humidity" <= 69.1)
AND (0 <= "light" <= 5153) AND (83.36 <= "dust" <= 3322.67)
AND (12 <= "airquality_raw" <= 49)
"""

QT = """
(140 <= "trip_time_in_secs" <= 3155) AND (0.65 <= "tip_amount" <= 38.55)
AND (6.00 <= "fare_amount" <= 201.00) AND (2.50 <= "tolls_amount" <= 18.00)
AND (1.37 <= "trip_distance" <= 29.86)
"""


def test_single_predicate_decimal():
    ast = parse_query('(0.7 <= "temperature" <= 35.1)')
    assert isinstance(ast, Predicate)
    assert ast.attr == "temperature"
    assert ast.bound.lower == Decimal("0.7")
    assert ast.bound.upper == Decimal("35.1")
    assert ast.bound.kind == "decimal"


def test_qs0_has_five_anded_leaves():
    ast = parse_query(QS0)
    assert isinstance(ast, And)
    leaves = list(ast.leaves())
    assert [p.attr for p in leaves] == [
        "temperature", "humidity", "light", "dust", "airquality_raw",
    ]
    assert leaves[4].bound.lower == 12 and leaves[4].bound.upper == 49
    assert leaves[4].bound.kind == "integer"


def test_qt_parses_with_trailing_zero_bounds():
    leaves = list(parse_query(QT).leaves())
    assert leaves[3].attr == "tolls_amount"
    assert leaves[3].bound.upper == Decimal("18.00")


def test_negative_bound():
    ast = parse_query('(-12.5 <= "temperature" <= 43.1)')
    assert ast.bound.lower == Decimal("-12.5")


def test_empty_interval_is_rejected():
    with pytest.raises(QueryError):
        parse_query('(1 <= "a" <= 0)')


def test_syntax_error_carries_position():
    with pytest.raises(QueryError) as exc:
        parse_query('(0.7 <= temperature <= 35.1)')
    assert exc.value.position is not None


def test_trailing_garbage_rejected():
    with pytest.raises(QueryError):
        parse_query('(1 <= "a" <= 2) nonsense')


def test_and_binds_tighter_than_or():
    ast = parse_query('(1 <= "a" <= 2) AND (3 <= "b" <= 4) OR (5 <= "c" <= 6)')
    assert isinstance(ast, Or)
    left, right = ast.children
    assert isinstance(left, And)
    assert isinstance(right, Predicate)


def test_parenthesized_subexpression():
    ast = parse_query('((1 <= "a" <= 2) OR (3 <= "b" <= 4)) AND (5 <= "c" <= 6)')
    assert isinstance(ast, And)
    assert isinstance(ast.children[0], Or)


def test_notation_round_trips():
    for text in (QS0, QT, '(1 <= "a" <= 2) AND ((3 <= "b" <= 4) OR (5 <= "c" <= 6))'):
        ast = parse_query(text)
        assert parse_query(ast.notation()) == ast
