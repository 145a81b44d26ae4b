"""Exact ground truth for measuring raw-filter quality.

A strict JSON parse (numbers kept as exact decimals, duplicate keys
preserved) plus exact query evaluation labels each record as a true match
or not. The raw filter's accepts must be a superset of these labels on any
well-formed corpus; that containment is the no-false-negative contract.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal

from .query import And, Or, Predicate, QueryAst

_NUMERIC_STRING = re.compile(r"-?\d+(\.\d+)?([eE][+-]?\d+)?\Z")


class JsonObject:
    """JSON object as an ordered pair list; duplicate keys are preserved."""

    __slots__ = ("pairs",)

    def __init__(self, pairs):
        self.pairs = list(pairs)

    def get(self, key, default=None):
        for k, v in self.pairs:
            if k == key:
                return v
        return default

    def __eq__(self, other):
        return isinstance(other, JsonObject) and self.pairs == other.pairs

    def __repr__(self):
        return f"JsonObject({self.pairs!r})"


class JsonParseError(ValueError):
    pass


def _reject_constant(name):
    raise JsonParseError(f"non-finite literal {name!r} is not valid JSON")


def parse_json(data: bytes | str):
    """Strictly parse one record; numbers become Decimal (exponent applied)."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise JsonParseError(str(exc)) from exc
    try:
        return json.loads(
            data,
            object_pairs_hook=JsonObject,
            parse_float=Decimal,
            parse_int=Decimal,
            parse_constant=_reject_constant,
        )
    except json.JSONDecodeError as exc:
        raise JsonParseError(str(exc)) from exc


def coerce_number(value) -> Decimal | None:
    """Numbers pass through; numeric strings coerce; everything else is None."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, str) and _NUMERIC_STRING.match(value):
        return Decimal(value)
    return None


def _occurrences(value, attr: str):
    """All values the attribute takes anywhere in the record.

    Two spellings count: a SenML measurement object ({"n": attr, "v": x})
    supplies x, and any object with attr as a key supplies that key's value.
    """
    if isinstance(value, JsonObject):
        is_measurement = any(k == "n" and v == attr for k, v in value.pairs)
        for k, v in value.pairs:
            if is_measurement and k == "v":
                yield v
            if k == attr:
                yield v
            yield from _occurrences(v, attr)
    elif isinstance(value, list):
        for item in value:
            yield from _occurrences(item, attr)


def eval_exact(query: QueryAst, value) -> bool:
    """True when the parsed record matches the query exactly.

    A predicate holds when any occurrence of its attribute has a numeric
    value inside the bounds; non-coercible occurrences are false.
    """
    if isinstance(query, Predicate):
        for occurrence in _occurrences(value, query.attr):
            number = coerce_number(occurrence)
            if number is not None and query.bound.contains(number):
                return True
        return False
    if isinstance(query, And):
        return all(eval_exact(child, value) for child in query.children)
    if isinstance(query, Or):
        return any(eval_exact(child, value) for child in query.children)
    raise TypeError(f"not a query node: {query!r}")


@dataclass(frozen=True)
class MatchLabel:
    index: int
    exact_match: bool
    parse_ok: bool = True


@dataclass
class DatasetLabels:
    labels: list
    selectivity: float
    empty: bool = False
    malformed_count: int = 0

    @property
    def matches(self) -> int:
        return sum(1 for lab in self.labels if lab.exact_match)


def label_dataset(query: QueryAst, records) -> DatasetLabels:
    """Label every record; malformed records count as non-matches."""
    labels = []
    malformed = 0
    for i, payload in enumerate(records):
        try:
            value = parse_json(payload)
        except JsonParseError:
            labels.append(MatchLabel(i, False, parse_ok=False))
            malformed += 1
            continue
        labels.append(MatchLabel(i, eval_exact(query, value)))
    if not labels:
        return DatasetLabels([], 0.0, empty=True)
    selectivity = sum(1 for lab in labels if lab.exact_match) / len(labels)
    return DatasetLabels(labels, selectivity, malformed_count=malformed)
