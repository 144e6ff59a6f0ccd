"""Labeled Markov chains: chain files, stationary analysis and seeded sampling.

Probabilities are held exactly as :class:`fractions.Fraction` values (decimal
literals such as ``0.3`` are read as ``3/10``), so the stationary frequencies
come out of an exact linear solve. Sampling uses float cumulative rows.

Chain file format (JSON)::

    {"alphabet": ["x", "y", "z"], "ordered": true,
     "states": [{"name": "x", "label": "x"}, ...],
     "initial": {"x": "1/3", ...},
     "transitions": [{"from": "x", "to": "y", "prob": 1}, ...]}

Omitted transitions and omitted initial entries have probability 0. When the
``initial`` key itself is missing the initial distribution is uniform.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import rng
from .alphabet import Alphabet, Word
from .errors import LimitmonError, ValidationError

SUM_TOLERANCE = Fraction(1, 10**9)


class ChainFormatError(ValidationError):
    pass


class RowSumError(ValidationError):
    pass


class UnknownReferenceError(ValidationError):
    pass


class ConnectivityError(ValidationError):
    pass


def parse_probability(value, where: str) -> Fraction:
    """Exact probability from a JSON number or a ``"p/q"`` / decimal string."""
    if isinstance(value, bool):
        raise ChainFormatError(f"{where}: probability must be a number, got {value!r}")
    try:
        p = Fraction(value) if isinstance(value, (int, Fraction)) else Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError, TypeError):
        raise ChainFormatError(f"{where}: cannot read probability {value!r}") from None
    if not 0 <= p <= 1:
        raise ChainFormatError(f"{where}: probability {value!r} outside [0, 1]")
    return p


@dataclass(frozen=True, eq=False)
class MarkovChain:
    alphabet: Alphabet
    states: tuple[str, ...]
    labels: tuple[int, ...]  # alphabet index of each state's label
    initial: tuple[Fraction, ...]
    transition: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise ChainFormatError("a chain needs at least one state")
        if len(set(self.states)) != n:
            raise ChainFormatError("duplicate state names")
        if len(self.labels) != n or len(self.initial) != n or len(self.transition) != n:
            raise ChainFormatError("labels, initial and transition must cover every state")
        for name, row in zip(self.states, self.transition):
            if len(row) != n:
                raise ChainFormatError(f"transition row of {name!r} has wrong length")
            total = sum(row, Fraction(0))
            if abs(total - 1) > SUM_TOLERANCE:
                raise RowSumError(f"transition row of state {name!r} sums to {float(total)!r}, not 1")
        total = sum(self.initial, Fraction(0))
        if abs(total - 1) > SUM_TOLERANCE or any(p < 0 for p in self.initial):
            raise RowSumError(f"initial distribution sums to {float(total)!r}, not 1")
        _check_strongly_connected(self.states, self.transition)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})
        object.__setattr__(self, "_initial_cdf", _cdf(self.initial))
        object.__setattr__(self, "_row_cdfs", tuple(_cdf(row) for row in self.transition))

    def __len__(self):
        return len(self.states)

    def state_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownReferenceError(f"unknown state {name!r}") from None

    def label(self, state: str) -> str:
        return self.alphabet.symbols[self.labels[self.state_index(state)]]

    def matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.transition])

    def to_json(self) -> str:
        doc = {
            "alphabet": list(self.alphabet.symbols),
            "ordered": self.alphabet.ordered,
            "states": [
                {"name": s, "label": self.alphabet.symbols[l]} for s, l in zip(self.states, self.labels)
            ],
            "initial": {s: str(p) for s, p in zip(self.states, self.initial) if p},
            "transitions": [
                {"from": a, "to": b, "prob": str(p)}
                for a, row in zip(self.states, self.transition)
                for b, p in zip(self.states, row)
                if p
            ],
        }
        return json.dumps(doc, indent=1)


def _cdf(probs) -> tuple[float, ...]:
    # exact partial sums: zero-probability entries repeat the previous value
    total = sum(probs, Fraction(0))
    acc = Fraction(0)
    out = []
    for p in probs:
        acc += p
        out.append(float(acc / total))
    return tuple(out)


def _check_strongly_connected(states, transition) -> None:
    n = len(states)
    fwd = [[j for j in range(n) if transition[i][j] > 0] for i in range(n)]
    rev = [[] for _ in range(n)]
    for i, succ in enumerate(fwd):
        for j in succ:
            rev[j].append(i)
    for graph, what in ((fwd, "reachable from"), (rev, "able to reach")):
        seen = [False] * n
        seen[0] = True
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in graph[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        if not all(seen):
            bad = states[seen.index(False)]
            raise ConnectivityError(
                f"chain is not strongly connected: state {bad!r} is not {what} state {states[0]!r}"
            )


def parse_chain(text: str) -> MarkovChain:
    """Read and validate a chain document."""
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ChainFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ChainFormatError("chain document must be a JSON object")
    for key in ("alphabet", "states", "transitions"):
        if key not in doc:
            raise ChainFormatError(f"missing key {key!r}")
    try:
        alphabet = Alphabet(tuple(doc["alphabet"]), bool(doc.get("ordered", False)))
    except TypeError:
        raise ChainFormatError("alphabet must be a list of symbol names") from None

    states, labels = [], []
    for entry in doc["states"]:
        if not isinstance(entry, dict) or "name" not in entry or "label" not in entry:
            raise ChainFormatError(f"state entry {entry!r} needs 'name' and 'label'")
        if entry["label"] not in alphabet:
            raise UnknownReferenceError(f"state {entry['name']!r} has unknown label {entry['label']!r}")
        states.append(entry["name"])
        labels.append(alphabet.index(entry["label"]))
    if len(set(states)) != len(states):
        raise ChainFormatError("duplicate state names")
    index = {s: i for i, s in enumerate(states)}

    def lookup(name, where):
        if name not in index:
            raise UnknownReferenceError(f"{where} refers to unknown state {name!r}")
        return index[name]

    n = len(states)
    if "initial" in doc:
        initial = [Fraction(0)] * n
        if not isinstance(doc["initial"], dict):
            raise ChainFormatError("initial must map state names to probabilities")
        for name, p in doc["initial"].items():
            initial[lookup(name, "initial")] = parse_probability(p, f"initial[{name}]")
    else:
        initial = [Fraction(1, n)] * n

    rows = [[Fraction(0)] * n for _ in range(n)]
    seen = set()
    for t in doc["transitions"]:
        if not isinstance(t, dict) or not {"from", "to", "prob"} <= t.keys():
            raise ChainFormatError(f"transition {t!r} needs 'from', 'to' and 'prob'")
        i = lookup(t["from"], "transition")
        j = lookup(t["to"], "transition")
        if (i, j) in seen:
            raise ChainFormatError(f"duplicate transition {t['from']!r} -> {t['to']!r}")
        seen.add((i, j))
        rows[i][j] = parse_probability(t["prob"], f"transition {t['from']}->{t['to']}")

    return MarkovChain(alphabet, tuple(states), tuple(labels), tuple(initial), tuple(map(tuple, rows)))


def load_chain(path) -> MarkovChain:
    with open(path, encoding="utf-8") as fh:
        return parse_chain(fh.read())


# stationary analysis

@dataclass(frozen=True)
class StationaryAnalysis:
    state_frequency: dict
    return_time: dict
    letter_frequency: dict
    exact: dict  # state -> Fraction


def solve_linear(a, b):
    """Gaussian elimination with partial pivoting; works on Fractions or floats."""
    n = len(a)
    m = [list(row) + [bi] for row, bi in zip(a, b)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[pivot][col] == 0:
            raise LimitmonError("singular system in stationary solve")
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(col + 1, n):
            factor = m[r][col] / m[col][col]
            if factor:
                for k in range(col, n + 1):
                    m[r][k] -= factor * m[col][k]
    x = [0] * n
    for r in range(n - 1, -1, -1):
        s = m[r][n] - sum(m[r][k] * x[k] for k in range(r + 1, n))
        x[r] = s / m[r][r]
    return x


def stationary(chain: MarkovChain) -> StationaryAnalysis:
    """Long-run state and letter frequencies and expected return times."""
    n = len(chain)
    rows = [[p / sum(row, Fraction(0)) for p in row] for row in chain.transition]
    # (P^T - I) f = 0 with the last equation replaced by sum(f) = 1
    a = [[rows[j][i] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    a[-1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]
    f = solve_linear(a, b)
    assert sum(f) == 1 and all(x > 0 for x in f), "stationary solve produced an invalid vector"

    ff = np.array([float(x) for x in f])
    residual = np.abs(ff @ chain.matrix() - ff).max()
    assert residual <= 1e-10, f"stationary residual {residual}"

    letters = {s: Fraction(0) for s in chain.alphabet.symbols}
    for x, l in zip(f, chain.labels):
        letters[chain.alphabet.symbols[l]] += x
    return StationaryAnalysis(
        state_frequency={s: float(x) for s, x in zip(chain.states, f)},
        return_time={s: float(1 / x) for s, x in zip(chain.states, f)},
        letter_frequency={s: float(x) for s, x in letters.items()},
        exact=dict(zip(chain.states, f)),
    )


# sampling

@dataclass(frozen=True)
class SampleTrace:
    chain: MarkovChain
    states: tuple[int, ...]
    seed: Optional[int] = None

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        return (
            isinstance(other, SampleTrace)
            and self.chain is other.chain
            and self.states == other.states
            and self.seed == other.seed
        )

    def __hash__(self):
        return hash((self.states, self.seed))

    @property
    def word(self) -> Word:
        labels = self.chain.labels
        return Word(self.chain.alphabet, tuple(labels[q] for q in self.states))

    def state_names(self) -> list[str]:
        return [self.chain.states[q] for q in self.states]

    def letter_array(self) -> np.ndarray:
        return np.asarray(self.chain.labels, dtype=np.int64)[np.asarray(self.states, dtype=np.int64)]


def trace_from_states(chain: MarkovChain, names, seed=None) -> SampleTrace:
    """Trace from explicit state names; every step must have positive probability."""
    states = tuple(chain.state_index(s) for s in names)
    for pos, (a, b) in enumerate(zip(states, states[1:]), 1):
        if chain.transition[a][b] == 0:
            raise ValidationError(
                f"step {pos}: no transition {chain.states[a]!r} -> {chain.states[b]!r}"
            )
    return SampleTrace(chain, states, seed)


def sample(chain: MarkovChain, n: int, seed: int) -> SampleTrace:
    """Sample the first ``n`` states of a run.

    ``n`` uniforms ``u_1..u_n`` are drawn from ``rng.generator(seed)``. The
    first state is the inverse CDF of the initial distribution at ``u_1``; state
    ``i+1`` is the inverse CDF of the row of state ``i`` at ``u_{i+1}``, with
    states in declaration order.
    """
    if n < 0:
        raise ValidationError(f"sample length must be >= 0, got {n}")
    seed = rng.check_seed(seed)
    if n == 0:
        return SampleTrace(chain, (), seed)
    u = rng.generator(seed).random(n).tolist()
    rows = chain._row_cdfs
    x = bisect_right(chain._initial_cdf, u[0])
    out = [x]
    append = out.append
    for ui in u[1:]:
        x = bisect_right(rows[x], ui)
        append(x)
    return SampleTrace(chain, tuple(out), seed)


def visits(trace: SampleTrace, q: str, offset: int, k: int) -> int:
    """Number of ``i`` in 1..k with ``X_{offset+i} = q``."""
    qi = trace.chain.state_index(q)
    if offset < 0 or k < 0 or offset + k > len(trace):
        raise ValidationError(f"window offset={offset}, k={k} exceeds trace of length {len(trace)}")
    return trace.states[offset : offset + k].count(qi)


def first_visit(trace: SampleTrace, q: str, offset: int, horizon: Optional[int] = None):
    """Least ``i >= 1`` with ``X_{offset+i} = q``, or None if absent.

    The search covers the rest of the trace, or ``horizon`` steps if given.
    """
    qi = trace.chain.state_index(q)
    if not 0 <= offset < len(trace):
        raise ValidationError(f"offset {offset} outside trace of length {len(trace)}")
    end = len(trace) if horizon is None else min(len(trace), offset + horizon)
    try:
        return trace.states.index(qi, offset, end) - offset + 1
    except ValueError:
        return None
