"""Alphabets, words and the exact (non-streaming) mode and median statistics.

Symbols are interned to dense indices when an :class:`Alphabet` is built, and
words store those indices. The reference statistics here count every letter
and are used as oracles for the constant-memory monitors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ValidationError


class _Bottom:
    """The undefined statistic value, rendered as ``_bot_`` in text output."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"

    def __str__(self):
        return BOT_TEXT

    def __reduce__(self):
        return (_Bottom, ())


BOT_TEXT = "_bot_"
BOT = _Bottom()


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise ValidationError("alphabet must contain at least one symbol")
        seen = set()
        for s in self.symbols:
            if not isinstance(s, str) or not s or any(c.isspace() for c in s):
                raise ValidationError(f"invalid symbol name {s!r}")
            if s == BOT_TEXT:
                raise ValidationError(f"{BOT_TEXT!r} is reserved for the undefined value")
            if s in seen:
                raise ValidationError(f"duplicate symbol {s!r}")
            seen.add(s)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def __iter__(self):
        return iter(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValidationError(f"unknown symbol {symbol!r}") from None

    def symbol(self, index: int) -> str:
        return self.symbols[index]

    def require_order(self) -> None:
        if not self.ordered:
            raise ValidationError("this operation needs an ordered alphabet")

    @classmethod
    def infer(cls, tokens: Iterable[str], ordered: bool = False) -> "Alphabet":
        """Alphabet of the given tokens in order of first appearance."""
        return cls(tuple(dict.fromkeys(tokens)), ordered)


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(map(int, self.letters))
        n = len(self.alphabet)
        if letters and (min(letters) < 0 or max(letters) >= n):
            pos, x = next((p, x) for p, x in enumerate(letters, 1) if not 0 <= x < n)
            raise ValidationError(f"letter index {x} at position {pos} is out of range")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_symbols(cls, alphabet: Alphabet, symbols: Iterable[str]) -> "Word":
        return cls(alphabet, tuple(alphabet.index(s) for s in symbols))

    @classmethod
    def parse(cls, alphabet: Alphabet, text: str) -> "Word":
        return cls.from_symbols(alphabet, text.split())

    def __len__(self):
        return len(self.letters)

    def __getitem__(self, pos: int) -> str:
        """Symbol at 1-based position ``pos``."""
        if not 1 <= pos <= len(self.letters):
            raise ValidationError(f"position {pos} outside 1..{len(self.letters)}")
        return self.alphabet.symbols[self.letters[pos - 1]]

    def __add__(self, other: "Word") -> "Word":
        if other.alphabet != self.alphabet:
            raise ValidationError("cannot concatenate words over different alphabets")
        return Word(self.alphabet, self.letters + other.letters)

    def symbols(self) -> list[str]:
        return [self.alphabet.symbols[x] for x in self.letters]

    def __str__(self):
        return " ".join(self.symbols())


def count(w: Word, a: str) -> int:
    """Number of occurrences of symbol ``a`` in ``w``."""
    return w.letters.count(w.alphabet.index(a))


def counts(w: Word) -> list[int]:
    """Occurrence count of every symbol, indexed like the alphabet."""
    c = Counter(w.letters)
    return [c.get(i, 0) for i in range(len(w.alphabet))]


def infix(w: Word, i: int, j: int) -> Word:
    """The infix from 1-based position ``i`` to ``j`` inclusive."""
    if not 1 <= i <= j <= len(w):
        raise ValidationError(f"infix bounds ({i}, {j}) invalid for word of length {len(w)}")
    return Word(w.alphabet, w.letters[i - 1 : j])


def prefix(w: Word, i: int) -> Word:
    if not 0 <= i <= len(w):
        raise ValidationError(f"prefix length {i} invalid for word of length {len(w)}")
    return Word(w.alphabet, w.letters[:i])


def mode_of_counts(c: Sequence[int]):
    """Index of the strictly most frequent letter, or ``None``."""
    best, best_count, tied = None, -1, False
    for i, k in enumerate(c):
        if k > best_count:
            best, best_count, tied = i, k, False
        elif k == best_count:
            tied = True
    return None if tied else best


def median_of_counts(c: Sequence[int]):
    """Index of the median under index order, or ``None``.

    ``a`` is the median when the weight strictly above it is less than the
    weight at or below it, and the weight strictly below it is less than the
    weight at or above it.
    """
    total = sum(c)
    found = None
    below = 0
    for a, k in enumerate(c):
        above = total - below - k
        if above < below + k and below < k + above:
            assert found is None, "two symbols satisfy the median inequalities"
            found = a
        below += k
    return found


def mode(w: Word):
    """The mode of ``w`` as a symbol name, or ``BOT``."""
    i = mode_of_counts(counts(w))
    return BOT if i is None else w.alphabet.symbols[i]


def median(w: Word):
    """The median of ``w`` under the alphabet's declaration order, or ``BOT``."""
    w.alphabet.require_order()
    i = median_of_counts(counts(w))
    return BOT if i is None else w.alphabet.symbols[i]


def render(value) -> str:
    """Text form of a statistic value."""
    if value is BOT:
        return BOT_TEXT
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
