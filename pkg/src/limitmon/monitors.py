"""Constant-memory limit monitors for the mode and the median.

Both monitors cut the stream into consecutive chunks of lengths 1, 2, 3, ...
(chunk ``n`` covers positions ``s(n)+1 .. s(n)+n`` with ``s(n) = n(n-1)/2``).
Within a chunk they only count a fixed number of things, and at each chunk
boundary they revise their current estimate.

The mode monitor compares a candidate ``x`` with a contender ``y`` (the first
letter of the previous chunk). The median monitor checks the two median
inequalities for its candidate ``x`` and steps it down or up in the order.

Monitor objects are mutated in place by :meth:`next`; ``mode_next`` and
``median_next`` return the same object for convenience.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import Alphabet, Word
from .errors import ValidationError


def schedule_offset(n: int) -> int:
    """Number of stream positions before chunk ``n``."""
    if n < 1:
        raise ValidationError(f"chunk index must be >= 1, got {n}")
    return n * (n - 1) // 2


@dataclass
class ChunkSchedule:
    """Chunk length ``n`` and position ``i`` within it (both 1-based)."""

    n: int = 1
    i: int = 1

    def position(self) -> int:
        return schedule_offset(self.n) + self.i

    def advance(self) -> None:
        if self.i == self.n:
            self.n, self.i = self.n + 1, 1
        else:
            self.i += 1


def chunks(length: int):
    """Yield (n, start, end) with 1-based inclusive positions, covering ``length``.

    The final chunk may be truncated.
    """
    n = 1
    while schedule_offset(n) < length:
        start = schedule_offset(n) + 1
        yield n, start, min(start + n - 1, length)
        n += 1


class ModeMonitor:
    """Limit monitor for the mode.

    ``x`` and ``y`` hold symbol indices (finite state); ``c_x``, ``c_y``,
    ``n`` and ``i`` are the four counters. ``n, i`` is the schedule position
    of the *next* letter.
    """

    COUNTERS = ("c_x", "c_y", "n", "i")
    SYMBOL_REGISTERS = ("x", "y")
    __slots__ = COUNTERS + SYMBOL_REGISTERS + ("alphabet",)

    def __init__(self, alphabet: Alphabet, first: int):
        if not 0 <= first < len(alphabet):
            raise ValidationError(f"symbol index {first} outside alphabet")
        self.alphabet = alphabet
        self.x = self.y = first
        self.c_x = self.c_y = 0
        self.n, self.i = 2, 1

    def next(self, s: int) -> int:
        if self.i == 1:
            if self.c_x <= self.c_y:
                self.x = self.y
            self.y = s
            self.c_x = self.c_y = 0
        if self.x == s:
            self.c_x += 1
        if self.y == s:
            self.c_y += 1
        if self.i == self.n:
            self.n += 1
            self.i = 1
        else:
            self.i += 1
        return self.x

    @property
    def output(self) -> str:
        return self.alphabet.symbols[self.x]

    def snapshot(self) -> dict:
        a = self.alphabet.symbols
        return {"x": a[self.x], "y": a[self.y], "c_x": self.c_x, "c_y": self.c_y, "n": self.n, "i": self.i}


class MedianMonitor:
    """Limit monitor for the median over an ordered alphabet.

    The candidate ``x`` is a symbol index; the order is index order. Moving
    below the minimum or above the maximum leaves ``x`` unchanged.
    """

    COUNTERS = ("c1", "c2", "c3", "c4", "n", "i")
    SYMBOL_REGISTERS = ("x",)
    __slots__ = COUNTERS + SYMBOL_REGISTERS + ("alphabet", "top")

    def __init__(self, alphabet: Alphabet, first: int):
        alphabet.require_order()
        if not 0 <= first < len(alphabet):
            raise ValidationError(f"symbol index {first} outside alphabet")
        self.alphabet = alphabet
        self.top = len(alphabet) - 1
        self.x = first
        self.c1 = self.c2 = self.c3 = self.c4 = 0
        self.n, self.i = 2, 1

    def next(self, s: int) -> int:
        if self.i == 1:
            # both tests read the counters of the finished chunk
            move_down = self.c1 >= self.c2
            move_up = self.c3 >= self.c4
            if move_down and self.x > 0:
                self.x -= 1
            if move_up and self.x < self.top:
                self.x += 1
            self.c1 = self.c2 = self.c3 = self.c4 = 0
        x = self.x
        if s < x:
            self.c1 += 1
        else:
            self.c2 += 1
        if s > x:
            self.c3 += 1
        else:
            self.c4 += 1
        if self.i == self.n:
            self.n += 1
            self.i = 1
        else:
            self.i += 1
        return x

    @property
    def output(self) -> str:
        return self.alphabet.symbols[self.x]

    def snapshot(self) -> dict:
        return {
            "x": self.alphabet.symbols[self.x],
            "c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4,
            "n": self.n, "i": self.i,
        }


def mode_init(alphabet: Alphabet, symbol: str):
    m = ModeMonitor(alphabet, alphabet.index(symbol))
    return m, m.output


def mode_next(m: ModeMonitor, symbol: str):
    m.next(m.alphabet.index(symbol))
    return m, m.output


def median_init(alphabet: Alphabet, symbol: str):
    m = MedianMonitor(alphabet, alphabet.index(symbol))
    return m, m.output


def median_next(m: MedianMonitor, symbol: str):
    m.next(m.alphabet.index(symbol))
    return m, m.output


MONITORS = {"mode": ModeMonitor, "median": MedianMonitor}


def run_indices(kind: str, alphabet: Alphabet, letters) -> list[int]:
    """Output index after each letter of a non-empty index sequence."""
    letters = list(letters)
    if not letters:
        raise ValidationError("a limit monitor needs at least one letter")
    m = MONITORS[kind](alphabet, letters[0])
    step = m.next
    out = [m.x]
    out.extend(step(s) for s in letters[1:])
    return out


def final_output(kind: str, alphabet: Alphabet, letters) -> int:
    """Output index after the last letter, without keeping the trace."""
    it = iter(letters)
    try:
        first = next(it)
    except StopIteration:
        raise ValidationError("a limit monitor needs at least one letter") from None
    m = MONITORS[kind](alphabet, first)
    step = m.next
    x = m.x
    for s in it:
        x = step(s)
    return x


def run_monitor(kind: str, w: Word) -> list[str]:
    """Output symbol after each prefix of ``w``."""
    if kind not in MONITORS:
        raise ValidationError(f"unknown monitor {kind!r}")
    symbols = w.alphabet.symbols
    return [symbols[x] for x in run_indices(kind, w.alphabet, w.letters)]
