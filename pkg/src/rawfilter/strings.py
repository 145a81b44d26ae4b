"""String-search primitives over raw byte streams.

Three interchangeable matchers for a pattern of N bytes:

* ``ExactMatcher('dfa')``: a failure-function automaton with N+1 states,
  one byte per step.
* ``ExactMatcher('full')``: ring buffer of the last N bytes compared
  wholesale against the pattern.
* ``SubstringBlockMatcher``: approximate matcher that keeps only the last B
  bytes and counts consecutive hits against the set of all B-byte
  substrings of the pattern; a run of N-B+1 hits signals a (possible)
  occurrence. B=N degenerates to exact matching.

All matchers are structure-agnostic: they consume every byte of a record,
including quotes and structural characters. Composition decides what a
fire means.
"""

from __future__ import annotations

from .errors import ConfigError

BLOCK_CHOICES = (1, 2, "N")  # explored block lengths; "N" is the full compare


def build_substring_set(pattern: bytes | str, block_len: int) -> set[bytes]:
    """All distinct contiguous substrings of length ``block_len``."""
    if isinstance(pattern, str):
        pattern = pattern.encode()
    n = len(pattern)
    if n < 1:
        raise ConfigError("pattern must be non-empty")
    if not 1 <= block_len <= n:
        raise ConfigError(f"block length {block_len} out of range for N={n}")
    return {pattern[i : i + block_len] for i in range(n - block_len + 1)}


def resolve_block_len(pattern: bytes | str, block: int | str) -> int:
    """Map the symbolic block choice 'N' to the pattern length."""
    n = len(pattern)
    if block == "N":
        return n
    block = int(block)
    if not 1 <= block <= n:
        raise ConfigError(f"block length {block} out of range for N={n}")
    return block


class SubstringBlockMatcher:
    """B-byte block matcher with run counter and threshold N-B+1.

    The counter saturates at the threshold, so extended hit runs keep
    signaling; ``latched`` stays set until the next record reset. No
    membership test happens until the ring holds B bytes.
    """

    def __init__(self, pattern: bytes | str, block_len: int):
        if isinstance(pattern, str):
            pattern = pattern.encode()
        self.pattern = pattern
        self.block_len = block_len
        self.gram_set = build_substring_set(pattern, block_len)
        self.threshold = len(pattern) - block_len + 1
        self._ring = bytearray()
        self.run_counter = 0
        self.latched = False

    def step(self, event) -> bool:
        ring = self._ring
        ring.append(event.byte)
        if len(ring) > self.block_len:
            del ring[0]
        elif len(ring) < self.block_len:
            return False
        if bytes(ring) in self.gram_set:
            if self.run_counter < self.threshold:
                self.run_counter += 1
        else:
            self.run_counter = 0
        fired = self.run_counter >= self.threshold
        self.latched |= fired
        return fired

    def flush(self) -> bool:
        return False

    def reset(self) -> None:
        self._ring.clear()
        self.run_counter = 0
        self.latched = False

    def notation(self) -> str:
        return f's{self.block_len}("{self.pattern.decode("latin-1")}")'


class ExactMatcher:
    """Exact suffix matcher; fires on every byte ending an occurrence."""

    DFA_STATES = "dfa"
    FULL_COMPARE = "full"

    def __init__(self, pattern: bytes | str, variant: str = FULL_COMPARE):
        if isinstance(pattern, str):
            pattern = pattern.encode()
        if not pattern:
            raise ConfigError("pattern must be non-empty")
        if variant not in (self.DFA_STATES, self.FULL_COMPARE):
            raise ConfigError(f"unknown variant {variant!r}")
        self.pattern = pattern
        self.variant = variant
        self.latched = False
        if variant == self.DFA_STATES:
            self._failure = self._build_failure(pattern)
            self._state = 0
        else:
            self._ring = bytearray()

    @staticmethod
    def _build_failure(pattern: bytes) -> list[int]:
        fail = [0] * len(pattern)
        k = 0
        for i in range(1, len(pattern)):
            while k and pattern[i] != pattern[k]:
                k = fail[k - 1]
            if pattern[i] == pattern[k]:
                k += 1
            fail[i] = k
        return fail

    def step(self, event) -> bool:
        b = event.byte
        pattern = self.pattern
        if self.variant == self.DFA_STATES:
            state = self._state
            while state and b != pattern[state]:
                state = self._failure[state - 1]
            if b == pattern[state]:
                state += 1
            fired = state == len(pattern)
            if fired:
                state = self._failure[state - 1]
            self._state = state
        else:
            ring = self._ring
            ring.append(b)
            if len(ring) > len(pattern):
                del ring[0]
            fired = len(ring) == len(pattern) and bytes(ring) == pattern
        self.latched |= fired
        return fired

    def flush(self) -> bool:
        return False

    def reset(self) -> None:
        self.latched = False
        if self.variant == self.DFA_STATES:
            self._state = 0
        else:
            self._ring.clear()

    def notation(self) -> str:
        return f's{len(self.pattern)}("{self.pattern.decode("latin-1")}")'


def make_string_matcher(pattern: bytes | str, block_len: int):
    """Matcher for a concrete block length; B == N uses the full compare."""
    if isinstance(pattern, str):
        pattern = pattern.encode()
    block_len = resolve_block_len(pattern, block_len)
    if block_len == len(pattern):
        return ExactMatcher(pattern, ExactMatcher.FULL_COMPARE)
    return SubstringBlockMatcher(pattern, block_len)


def string_step(matcher, event) -> bool:
    return matcher.step(event)


def reset_string(matcher) -> None:
    matcher.reset()
