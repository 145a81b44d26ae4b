"""Number-range raw filtering.

A closed (or half-open) numeric interval is compiled into a byte-class DFA
that accepts exactly the plain decimal spellings of in-range values:
optional '-' sign, digits (leading zeros tolerated), optional '.' and
fraction digits. Construction refines the interval digit by digit: a digit
strictly inside the bound digit stops constraining the rest of the token,
a digit equal to the bound digit keeps the comparison tight, and token
lengths above/below the bound's digit count are decided wholesale.

Tokens are maximal runs of numeric-class bytes (digits, '+', '-', '.',
'e'/'E'); the DFA verdict is taken at the first non-numeric byte. Exponent
spellings cannot be range-checked by a DFA, so any token with a digit
followed by 'e'/'E' is accepted outright. Over-acceptance of that kind only
costs false positives; in-range values are never rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

import numpy as np

from .automata import Dfa, Nfa, determinize_and_minimize
from .errors import ConfigError

DIGITS = "0123456789"
RANGE_ALPHABET = tuple(DIGITS) + (".", "-", "+", "e")

_SAT = ("sat",)
_DEAD = ("dead",)
_ZERO = ("zero",)

NUMERIC_CLASS = np.zeros(256, dtype=bool)
for _c in b"0123456789+-.eE":
    NUMERIC_CLASS[_c] = True

_IS_DIGIT = np.zeros(256, dtype=bool)
for _c in b"0123456789":
    _IS_DIGIT[_c] = True

_IS_EXP = np.zeros(256, dtype=bool)
_IS_EXP[ord("e")] = True
_IS_EXP[ord("E")] = True


@dataclass(frozen=True)
class NumericBound:
    """Interval [lower, upper]; either side may be open (None)."""

    lower: Decimal | None
    upper: Decimal | None
    kind: str = "integer"  # 'integer' or 'decimal'; notation only

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ConfigError("at least one bound is required")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ConfigError(f"empty interval: {self.lower} > {self.upper}")

    @classmethod
    def from_literals(cls, lower: str | None, upper: str | None) -> "NumericBound":
        def parse(text):
            if text is None:
                return None
            try:
                value = Decimal(text)
            except InvalidOperation as exc:
                raise ConfigError(f"not a decimal literal: {text!r}") from exc
            if not value.is_finite():
                raise ConfigError(f"bound must be finite: {text!r}")
            return value

        lo, up = parse(lower), parse(upper)
        kind = "decimal" if any(t and "." in t for t in (lower, upper)) else "integer"
        return cls(lo, up, kind)

    @property
    def kind_letter(self) -> str:
        return "f" if self.kind == "decimal" else "i"

    def notation(self) -> str:
        lo = "" if self.lower is None else f"{self.lower}<="
        up = "" if self.upper is None else f"<={self.upper}"
        return f"v({lo}{self.kind_letter}{up})"

    def contains(self, value: Decimal) -> bool:
        if self.lower is not None and value < self.lower:
            return False
        if self.upper is not None and value > self.upper:
            return False
        return True


def _split_digits(value: Decimal) -> tuple[str, str]:
    """Significant integer digits and fraction digits of a nonnegative bound."""
    text = format(value, "f")
    if "." in text:
        ints, frac = text.split(".")
    else:
        ints, frac = text, ""
    return ints.lstrip("0"), frac


def _all_zero(digits: str) -> bool:
    return all(c == "0" for c in digits)


def _cmp(ch: str, bound_digit: str) -> str:
    if ch == bound_digit:
        return "tight"
    return "less" if ch < bound_digit else "greater"


def _lower_step(sub, ints, frac, ch):
    """Advance the >=-bound comparison of a token magnitude by one byte.

    Appending digits or fraction bytes never decreases a decimal value, so
    the moment the consumed prefix guarantees value >= bound the state
    saturates and absorbs all further digits and dots.
    """
    if sub[0] == "dead":
        return sub
    m = len(ints)
    if ch == ".":
        if sub[0] == "sat":
            return sub
        if sub[0] == "zero":
            return _lower_frac(0, frac) if m == 0 else _DEAD
        if sub[0] == "frac":
            return _DEAD
        k, cmp = sub[1], sub[2]
        if k < m or cmp == "less":
            return _DEAD
        return _lower_frac(0, frac)  # tight integer part
    if ch in DIGITS:
        if sub[0] == "sat":
            return sub
        if sub[0] == "zero":
            if ch == "0":
                return sub
            if m == 0:
                return _SAT  # any significant digit: value >= 1 > bound
            return _lower_int(1, _cmp(ch, ints[0]), m, frac)
        if sub[0] == "int":
            k, cmp = sub[1], sub[2]
            if k == m:
                return _SAT  # one more significant digit: value >= 10^m > bound
            nc = cmp if cmp != "tight" else _cmp(ch, ints[k])
            return _lower_int(k + 1, nc, m, frac)
        j = sub[1]  # tight fraction comparison; bound padded with zeros
        bound_digit = frac[j] if j < len(frac) else "0"
        if ch > bound_digit:
            return _SAT
        if ch < bound_digit:
            return _DEAD
        return _lower_frac(j + 1, frac)
    return _DEAD  # sign or exponent letter inside the token


def _lower_int(k, cmp, m, frac):
    if k == m:
        if cmp == "greater":
            return _SAT
        if cmp == "tight" and _all_zero(frac):
            return _SAT  # token already equals the bound
    return ("int", k, cmp)


def _lower_frac(j, frac):
    if _all_zero(frac[j:]):
        return _SAT
    return ("frac", j)


def _upper_step(sub, ints, frac, ch):
    """Advance the <=-bound comparison of a token magnitude by one byte.

    Saturation mirrors the lower side: once every continuation stays below
    the bound (e.g. a fraction digit strictly under the bound's), the state
    absorbs all further digits and dots.
    """
    if sub[0] == "dead":
        return sub
    m = len(ints)
    if ch == ".":
        if sub[0] == "sat":
            return sub
        if sub[0] == "zero":
            return ("frac", 0) if m == 0 else _SAT  # 0.F < 1 <= bound
        if sub[0] == "frac":
            return _DEAD
        k, cmp = sub[1], sub[2]
        if k < m or cmp == "less":
            return _SAT  # integer part strictly below the bound
        return ("frac", 0)
    if ch in DIGITS:
        if sub[0] == "sat":
            return sub
        if sub[0] == "zero":
            if ch == "0":
                return sub
            if m == 0:
                return _DEAD  # value >= 1 > bound
            return _upper_int(1, _cmp(ch, ints[0]), m)
        if sub[0] == "int":
            k, cmp = sub[1], sub[2]
            if k == m:
                return _DEAD  # one more significant digit: value > bound
            nc = cmp if cmp != "tight" else _cmp(ch, ints[k])
            return _upper_int(k + 1, nc, m)
        j = sub[1]
        bound_digit = frac[j] if j < len(frac) else "0"
        if ch < bound_digit:
            return _SAT
        if ch > bound_digit:
            return _DEAD
        return ("frac", min(j + 1, len(frac)))
    return _DEAD


def _upper_int(k, cmp, m):
    if k == m and cmp == "greater":
        return _DEAD
    return ("int", k, cmp)


class _Branch:
    """One sign branch: compares token magnitudes against [lower, upper].

    A side that is absent or vacuous for nonnegative magnitudes (lower <= 0)
    starts saturated. The branch is empty when upper < 0.
    """

    def __init__(self, lower: Decimal | None, upper: Decimal | None):
        self.empty = upper is not None and upper < 0
        constrain_lower = lower is not None and lower > 0
        self.lower = _split_digits(lower) if constrain_lower else ("", "")
        self.lower_init = _ZERO if constrain_lower else _SAT
        constrain_upper = not self.empty and upper is not None
        self.upper = _split_digits(upper) if constrain_upper else ("", "")
        self.upper_init = _ZERO if constrain_upper else _SAT

    def initial(self):
        return (self.lower_init, self.upper_init)

    def step(self, pair, ch):
        lo = _lower_step(pair[0], *self.lower, ch)
        up = _upper_step(pair[1], *self.upper, ch)
        if lo == _DEAD or up == _DEAD:
            return None
        return (lo, up)

    def accepts(self, pair) -> bool:
        return pair[0] == _SAT and pair[1][0] != "dead"


def derive_range_regex(bound: NumericBound) -> Nfa:
    """Interval automaton over plain decimal spellings of in-range values.

    The sign splits the automaton into one branch for '-'-prefixed magnitudes
    and one for unsigned tokens; each branch refines its bounds digit by
    digit as described in the module docstring.
    """
    lo, up = bound.lower, bound.upper
    unsigned = _Branch(lo, up)
    # -x in [lo, up]  <=>  x in [-up, -lo]
    neg = _Branch(
        -up if up is not None else None,
        -lo if lo is not None else None,
    )

    nfa = Nfa(alphabet=RANGE_ALPHABET)
    index: dict = {("start",): 0}
    todo = [("start",)]
    while todo:
        key = todo.pop()
        src = index[key]
        succs = []
        if key[0] == "start":
            if not unsigned.empty:
                init = unsigned.initial()
                if unsigned.accepts(init):
                    nfa.accepting.add(src)
                for ch in DIGITS + ".":
                    pair = unsigned.step(init, ch)
                    if pair is not None:
                        succs.append((ch, ("u",) + pair))
            if not neg.empty:
                succs.append(("-", ("n",) + neg.initial()))
        else:
            branch = unsigned if key[0] == "u" else neg
            pair = key[1:]
            if branch.accepts(pair):
                nfa.accepting.add(src)
            for ch in RANGE_ALPHABET:
                nxt = branch.step(pair, ch)
                if nxt is not None:
                    succs.append((ch, (key[0],) + nxt))
        for ch, nkey in succs:
            if nkey not in index:
                index[nkey] = nfa.add_state()
                todo.append(nkey)
            nfa.add_transition(src, ch, index[nkey])
    return nfa


def _merged_input_classes(dfa: Dfa) -> int:
    """Number of input classes after merging symbols with identical columns."""
    columns = set()
    for sym in dfa.alphabet:
        columns.add(tuple(dfa.transitions[s].get(sym, -1) for s in range(dfa.n_states)))
    return len(columns)


class RangeDfa:
    """Minimized byte-class DFA for one numeric interval."""

    def __init__(self, bound: NumericBound):
        self.bound = bound
        self.dfa = determinize_and_minimize(derive_range_regex(bound))
        self.state_count = self.dfa.n_states
        self.input_classes = _merged_input_classes(self.dfa)
        self.dead = self.state_count
        # Byte-indexed table with an explicit dead row for batch stepping.
        table = np.full((self.state_count + 1, 256), self.dead, dtype=np.int16)
        for state in range(self.state_count):
            for sym, dst in self.dfa.transitions[state].items():
                for byte in self._symbol_bytes(sym):
                    table[state, byte] = dst
        self.table = table
        self.accept_mask = np.zeros(self.state_count + 1, dtype=bool)
        self.accept_mask[: self.state_count] = self.dfa.accepting

    @staticmethod
    def _symbol_bytes(sym: str):
        if sym == "e":
            return (ord("e"), ord("E"))
        return (ord(sym),)

    def accepts_token(self, token: str | bytes) -> bool:
        """DFA verdict on one complete token (no exponent heuristic)."""
        if isinstance(token, str):
            token = token.encode()
        state = 0
        for b in token:
            state = self.table[state, b]
        return bool(self.accept_mask[state])

    def __repr__(self):
        return f"RangeDfa({self.bound.notation()}, states={self.state_count})"


_DFA_CACHE: dict = {}


def build_range_dfa(bound: NumericBound) -> RangeDfa:
    """Shared, memoized construction; RangeDfa is immutable after build."""
    dfa = _DFA_CACHE.get(bound)
    if dfa is None:
        dfa = _DFA_CACHE[bound] = RangeDfa(bound)
    return dfa


@dataclass
class NumberScanState:
    """Token scanner state; token flags clear at every delimiter."""

    dfa_state: int = 0
    in_token: bool = False
    saw_digit: bool = False
    saw_exponent_after_digit: bool = False
    token_scope: int = 0
    token_segment: int = 0


def number_step(state: NumberScanState, dfa: RangeDfa, event) -> bool:
    """Feed one scan event; True when a delimiter ends an in-range token."""
    b = event.byte
    if NUMERIC_CLASS[b]:
        state.in_token = True
        if _IS_EXP[b]:
            if state.saw_digit:
                state.saw_exponent_after_digit = True
        elif _IS_DIGIT[b]:
            state.saw_digit = True
            state.token_scope = event.scope_id
            state.token_segment = event.segment
        state.dfa_state = int(dfa.table[state.dfa_state, b])
        return False
    fired = False
    if state.in_token and state.saw_digit:
        fired = bool(dfa.accept_mask[state.dfa_state]) or state.saw_exponent_after_digit
    state.dfa_state = 0
    state.in_token = False
    state.saw_digit = False
    state.saw_exponent_after_digit = False
    return fired


class RangeMatcher:
    """Per-record stateful wrapper around a RangeDfa."""

    def __init__(self, dfa: RangeDfa):
        self.dfa = dfa
        self.state = NumberScanState()
        self.latched = False

    def step(self, event) -> bool:
        fired = number_step(self.state, self.dfa, event)
        self.latched |= fired
        return fired

    def flush(self) -> bool:
        """End-of-record: evaluate a pending token as if delimited."""
        state = self.state
        fired = False
        if state.in_token and state.saw_digit:
            fired = bool(self.dfa.accept_mask[state.dfa_state]) or state.saw_exponent_after_digit
            self.latched |= fired
        self._clear_token()
        return fired

    def _clear_token(self) -> None:
        s = self.state
        s.dfa_state = 0
        s.in_token = False
        s.saw_digit = False
        s.saw_exponent_after_digit = False

    def reset(self) -> None:
        self._clear_token()
        self.latched = False

    @property
    def fire_scope(self) -> int:
        return self.state.token_scope

    @property
    def fire_segment(self) -> int:
        return self.state.token_segment
