"""Seeded experiments on prefix and infix frequency convergence.

Each experiment returns a :class:`Series` of ``(index, value)`` rows plus
metadata, and is a pure function of its parameters and seed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import rng
from .errors import LimitmonError, ValidationError
from .alphabet import Word
from .markov import MarkovChain, first_visit, sample
from .monitors import schedule_offset


@dataclass
class Series:
    name: str
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)  # [(index, value)]
    flagged: set = field(default_factory=set)  # censored indices

    def add(self, index: int, value: float, flag: bool = False) -> None:
        if self.rows and index <= self.rows[-1][0]:
            raise LimitmonError(f"series index {index} is not increasing")
        self.rows.append((int(index), float(value)))
        if flag:
            self.flagged.add(int(index))

    def values(self) -> list[float]:
        return [v for _, v in self.rows]

    def indices(self) -> list[int]:
        return [i for i, _ in self.rows]

    def value_at(self, index: int) -> float:
        for i, v in self.rows:
            if i == index:
                return v
        raise KeyError(index)


@dataclass(frozen=True)
class FiniteDistribution:
    support: tuple  # ((value, probability), ...)

    def __post_init__(self):
        support = tuple((v, float(p)) for v, p in self.support)
        if not support:
            raise ValidationError("distribution needs a non-empty support")
        if any(p < 0 for _, p in support):
            raise ValidationError("probabilities must be non-negative")
        total = math.fsum(p for _, p in support)
        if abs(total - 1) > 1e-12:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def parse(cls, text: str, numeric: bool = True) -> "FiniteDistribution":
        """Read ``"v1:p1,v2:p2,..."``; probabilities may be fractions like ``1/3``."""
        items = []
        for part in text.split(","):
            if ":" not in part:
                raise ValidationError(f"distribution entry {part!r} is not value:probability")
            v, p = part.rsplit(":", 1)
            v = v.strip()
            try:
                prob = float(Fraction(p.strip()))
                value = float(v) if numeric else v
            except (ValueError, ZeroDivisionError):
                raise ValidationError(f"cannot read distribution entry {part!r}") from None
            items.append((value, prob))
        return cls(tuple(items))

    def values(self) -> list:
        return [v for v, _ in self.support]

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.support)

    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum([p for _, p in self.support])
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        return cdf

    def sample_indices(self, gen: np.random.Generator, size) -> np.ndarray:
        """Support indices drawn by inverse CDF from ``gen.random(size)``."""
        return np.searchsorted(self._cdf(), gen.random(size), side="right")


def _letters(chain: Optional[MarkovChain], sigma: str, length: int, seed, word: Optional[Word]):
    """(seed, target index, letter array) from a fresh sample or a supplied word."""
    if word is not None:
        if len(word) < length:
            raise ValidationError(f"supplied word has {len(word)} letters, {length} needed")
        return None, word.alphabet.index(sigma), np.asarray(word.letters[:length], dtype=np.int64)
    if chain is None:
        raise ValidationError("either a chain or a word is required")
    target = chain.alphabet.index(sigma)
    return seed, target, sample(chain, length, seed).letter_array()


def prefix_convergence(chain, sigma: str, steps: int, seed=None, word: Optional[Word] = None) -> Series:
    """Frequency of ``sigma`` in every prefix of one sampled run (or of ``word``)."""
    seed, target, letters = _letters(chain, sigma, steps, seed, word)
    running = np.cumsum(letters == target)
    s = Series("prefix", seed, {"sigma": sigma, "steps": steps})
    for n in range(1, steps + 1):
        s.add(n, running[n - 1] / n)
    return s


def infix_convergence(chain, sigma: str, levels: int, seed=None, word: Optional[Word] = None) -> Series:
    """Frequency of ``sigma`` in chunk ``n`` (positions s(n)+1..s(n)+n)."""
    seed, target, letters = _letters(chain, sigma, schedule_offset(levels + 1), seed, word)
    hits = np.concatenate(([0], np.cumsum(letters == target)))
    s = Series("infix", seed, {"sigma": sigma, "levels": levels})
    for n in range(1, levels + 1):
        start = schedule_offset(n)
        s.add(n, (hits[start + n] - hits[start]) / n)
    return s


def first_visit_ratio(chain: MarkovChain, q: str, levels: int, seed=None, trace=None) -> Series:
    """First visit time to ``q`` inside chunk ``n``, divided by ``n``.

    A chunk in which ``q`` does not occur records ``n/n = 1`` and is flagged
    as censored.
    """
    chain.state_index(q)
    length = schedule_offset(levels + 1)
    if trace is None:
        trace = sample(chain, length, seed)
    elif len(trace) < length:
        raise ValidationError(f"supplied trace has {len(trace)} steps, {length} needed")
    s = Series("first-visit", trace.seed, {"state": q, "levels": levels})
    for n in range(1, levels + 1):
        t = first_visit(trace, q, schedule_offset(n), horizon=n)
        if t is None:
            s.add(n, 1.0, flag=True)
        else:
            s.add(n, t / n)
    return s


def uncensored_mean(series: Series, lo: int, hi: int) -> float:
    vals = [v for i, v in series.rows if lo <= i <= hi and i not in series.flagged]
    if not vals:
        raise ValidationError(f"no uncensored rows in {lo}..{hi}")
    return math.fsum(vals) / len(vals)


def triangular_lln(dist: FiniteDistribution, levels, seed: int) -> Series:
    """Row averages ``S_n / n`` of a triangular array.

    Row ``n`` consists of ``n`` fresh i.i.d. draws; no draw is shared between
    rows. ``levels`` is a count N (rows 1..N) or an increasing list of rows.
    """
    rows = range(1, levels + 1) if isinstance(levels, int) else list(levels)
    gen = rng.generator(seed)
    values = np.asarray(dist.values(), dtype=float)
    s = Series("lln", seed, {"mean": dist.mean()})
    for n in rows:
        if n < 1:
            raise ValidationError(f"row index must be >= 1, got {n}")
        draws = values[dist.sample_indices(gen, n)]
        s.add(n, math.fsum(draws) / n)
    if s.rows:
        s.params["final_error"] = abs(s.rows[-1][1] - s.params["mean"])
    return s


def mode_rate_bound(pa: float, n: int) -> float:
    """Lower bound ``1 - rho**floor(n/2)`` on P(mode of an n-prefix is a)."""
    rho = 1 - (2 * pa - 1) ** 2
    return 1 - rho ** (n // 2)


def mode_error_rate(pa: float, n: int, trials: int, seed: int):
    """Empirical P(mode = a) over ``trials`` i.i.d. words of length ``n``, and the bound.

    A tie counts as failure.
    """
    if not 0.5 < pa <= 1:
        raise ValidationError(f"p(a) must be in (1/2, 1], got {pa}")
    if n < 1 or trials < 1:
        raise ValidationError("n and trials must be positive")
    gen = rng.generator(seed)
    wins = 0
    batch = max(1, 2_000_000 // n)
    done = 0
    while done < trials:
        t = min(batch, trials - done)
        count_a = (gen.random((t, n)) < pa).sum(axis=1)
        wins += int((2 * count_a > n).sum())
        done += t
    return wins / trials, mode_rate_bound(pa, n)


def mode_rate_series(pa: float, n: int, trials: int, seed: int) -> Series:
    empirical, bound = mode_error_rate(pa, n, trials, seed)
    rho = 1 - (2 * pa - 1) ** 2
    s = Series("mode-rate", seed, {"pa": pa, "n": n, "trials": trials, "rho": rho, "bound": bound})
    s.add(n, empirical)
    return s


# CSV

def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _format_param(v) -> str:
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (list, tuple, set)):
        return ";".join(str(x) for x in sorted(v))
    return str(v)


def emit_csv(series: Series, destination) -> None:
    """Write ``series`` as CSV to a path or a text stream."""
    if hasattr(destination, "write"):
        _write_csv(series, destination)
        return
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            _write_csv(series, fh)
    except OSError as exc:
        raise LimitmonError(f"cannot write {destination}: {exc.strerror}") from exc


def _write_csv(series: Series, fh) -> None:
    fh.write(f"# experiment={series.name}\n")
    fh.write(f"# seed={'none' if series.seed is None else series.seed}\n")
    for k, v in series.params.items():
        fh.write(f"# {k}={_format_param(v)}\n")
    if series.flagged:
        fh.write(f"# censored={_format_param(series.flagged)}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "value"])
    for i, v in series.rows:
        w.writerow([i, format_float(v)])


def _parse_param(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_csv(text: str) -> Series:
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif line.strip():
            body.append(line)
    name = meta.pop("experiment", "")
    seed_text = meta.pop("seed", "none")
    censored = meta.pop("censored", "")
    s = Series(name, None if seed_text == "none" else int(seed_text))
    s.params = {k: _parse_param(v) for k, v in meta.items()}
    flagged = {int(x) for x in censored.split(";") if x}
    reader = csv.reader(io.StringIO("\n".join(body)))
    header = next(reader, None)
    if header != ["index", "value"]:
        raise ValidationError(f"unexpected CSV header {header!r}")
    for index, value in reader:
        s.add(int(index), float(value), int(index) in flagged)
    return s
