import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from limitmon import rng
from limitmon.alphabet import count
from limitmon.errors import ValidationError
from limitmon.markov import (
    ChainFormatError, ConnectivityError, MarkovChain, RowSumError, UnknownReferenceError,
    first_visit, parse_chain, sample, solve_linear, stationary, trace_from_states, visits,
)

from conftest import XYZ_WORD

XYZ = {
    "alphabet": ["x", "y", "z"],
    "ordered": True,
    "states": [{"name": s, "label": s} for s in "xyz"],
    "transitions": [
        {"from": "x", "to": "y", "prob": 1},
        {"from": "y", "to": "x", "prob": "1/3"},
        {"from": "y", "to": "z", "prob": "2/3"},
        {"from": "z", "to": "x", "prob": 1},
    ],
}


def chain_doc(**changes):
    doc = json.loads(json.dumps(XYZ))
    doc.update(changes)
    return json.dumps(doc)


class TestParse:
    def test_accepts_example(self, xyz_chain):
        assert xyz_chain.states == ("x", "y", "z")
        assert xyz_chain.transition[1] == (Fraction(1, 3), 0, Fraction(2, 3))

    def test_missing_initial_is_uniform(self):
        m = parse_chain(chain_doc())
        assert m.initial == (Fraction(1, 3),) * 3

    def test_row_sum(self):
        bad = [t for t in XYZ["transitions"] if t["to"] != "z" or t["from"] != "y"]
        with pytest.raises(RowSumError, match="'y'"):
            parse_chain(chain_doc(transitions=bad))

    def test_not_connected(self):
        doc = json.dumps({
            "alphabet": ["a"],
            "states": [{"name": "p", "label": "a"}, {"name": "q", "label": "a"}],
            "transitions": [{"from": "p", "to": "p", "prob": 1}, {"from": "q", "to": "q", "prob": 1}],
        })
        with pytest.raises(ConnectivityError, match="'q'"):
            parse_chain(doc)

    def test_one_way_not_connected(self):
        doc = json.dumps({
            "alphabet": ["a"],
            "states": [{"name": "p", "label": "a"}, {"name": "q", "label": "a"}],
            "transitions": [{"from": "p", "to": "q", "prob": 1}, {"from": "q", "to": "q", "prob": 1}],
        })
        with pytest.raises(ConnectivityError):
            parse_chain(doc)

    def test_malformed_json(self):
        with pytest.raises(ChainFormatError):
            parse_chain("{not json")

    def test_unknown_state(self):
        bad = XYZ["transitions"] + [{"from": "x", "to": "w", "prob": 0}]
        with pytest.raises(UnknownReferenceError, match="'w'"):
            parse_chain(chain_doc(transitions=bad))

    def test_unknown_label(self):
        states = [{"name": "x", "label": "q"}] + XYZ["states"][1:]
        with pytest.raises(UnknownReferenceError, match="'q'"):
            parse_chain(chain_doc(states=states))

    def test_duplicate_transition(self):
        with pytest.raises(ChainFormatError):
            parse_chain(chain_doc(transitions=XYZ["transitions"] + [XYZ["transitions"][0]]))

    def test_bad_probability(self):
        bad = [dict(XYZ["transitions"][0], prob="1.5")] + XYZ["transitions"][1:]
        with pytest.raises(ChainFormatError):
            parse_chain(chain_doc(transitions=bad))

    def test_decimals_are_exact(self):
        doc = chain_doc(transitions=[
            {"from": "x", "to": "y", "prob": 1},
            {"from": "y", "to": "x", "prob": 0.1},
            {"from": "y", "to": "z", "prob": 0.2},
            {"from": "y", "to": "y", "prob": 0.7},
            {"from": "z", "to": "x", "prob": 1},
        ])
        m = parse_chain(doc)
        assert m.transition[1] == (Fraction(1, 10), Fraction(7, 10), Fraction(1, 5))

    def test_all_errors_are_validation_errors(self):
        for cls in (ChainFormatError, RowSumError, UnknownReferenceError, ConnectivityError):
            assert issubclass(cls, ValidationError)

    def test_json_roundtrip(self, xyz_chain):
        back = parse_chain(xyz_chain.to_json())
        assert back.transition == xyz_chain.transition
        assert back.initial == xyz_chain.initial


class TestStationary:
    def test_example(self, xyz_chain):
        st_ = stationary(xyz_chain)
        assert abs(st_.letter_frequency["y"] - 0.375) <= 1e-12
        # by hand: f_x = f_y (x only entered... x -> y with prob 1), f_z = 2/3 f_y
        assert st_.exact == {"x": Fraction(3, 8), "y": Fraction(3, 8), "z": Fraction(1, 4)}
        assert st_.return_time["y"] == pytest.approx(8 / 3, abs=1e-10)
        assert st_.return_time["z"] == 4

    def test_single_state(self):
        m = parse_chain(json.dumps({
            "alphabet": ["a"], "states": [{"name": "s", "label": "a"}],
            "transitions": [{"from": "s", "to": "s", "prob": 1}],
        }))
        st_ = stationary(m)
        assert st_.state_frequency == {"s": 1.0}
        assert st_.return_time == {"s": 1.0}

    def test_repeatable(self, xyz_chain):
        assert stationary(xyz_chain) == stationary(xyz_chain)

    def test_letter_aggregation(self):
        m = parse_chain(json.dumps({
            "alphabet": ["a", "b"],
            "states": [{"name": "p", "label": "a"}, {"name": "q", "label": "a"}, {"name": "r", "label": "b"}],
            "transitions": [
                {"from": "p", "to": "q", "prob": 1},
                {"from": "q", "to": "r", "prob": 1},
                {"from": "r", "to": "p", "prob": 1},
            ],
        }))
        st_ = stationary(m)
        assert st_.letter_frequency["a"] == pytest.approx(2 / 3, abs=1e-10)

    def test_solve_linear_floats(self):
        x = solve_linear([[0.0, 2.0], [1.0, 1.0]], [4.0, 3.0])
        assert x == pytest.approx([1.0, 2.0])


@st.composite
def random_chains(draw):
    n = draw(st.integers(1, 6))
    rows = []
    for _ in range(n):
        weights = draw(st.lists(st.integers(1, 20), min_size=n, max_size=n))
        total = sum(weights)
        rows.append(tuple(Fraction(w, total) for w in weights))
    from limitmon.alphabet import Alphabet
    labels = tuple(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    return MarkovChain(Alphabet(("a", "b")), tuple(f"s{i}" for i in range(n)), labels,
                       (Fraction(1, n),) * n, tuple(rows))


@settings(max_examples=50, deadline=None)
@given(random_chains())
def test_stationary_invariants(m):
    st_ = stationary(m)
    f = np.array([st_.state_frequency[s] for s in m.states])
    assert abs(f.sum() - 1) <= 1e-10
    assert (f > 0).all()
    assert np.abs(f @ m.matrix() - f).max() <= 1e-10
    for s in m.states:
        assert abs(st_.return_time[s] - 1 / st_.state_frequency[s]) <= 1e-10 * st_.return_time[s]
    for i, sym in enumerate(m.alphabet.symbols):
        agg = sum(st_.state_frequency[s] for s, l in zip(m.states, m.labels) if l == i)
        assert abs(st_.letter_frequency[sym] - agg) <= 1e-10


class TestSample:
    def test_empty(self, xyz_chain):
        assert len(sample(xyz_chain, 0, 5)) == 0

    def test_deterministic(self, xyz_chain):
        assert sample(xyz_chain, 500, 11) == sample(xyz_chain, 500, 11)
        assert sample(xyz_chain, 500, 11) != sample(xyz_chain, 500, 12)

    def test_transitions_have_positive_probability(self, xyz_chain):
        t = sample(xyz_chain, 5000, 3)
        for a, b in zip(t.states, t.states[1:]):
            assert xyz_chain.transition[a][b] > 0
        assert len(t.word) == len(t)

    def test_first_state_matches_initial(self):
        m = parse_chain(chain_doc(initial={"x": "0.2", "y": "0.5", "z": "0.3"}))
        trials = 100_000
        first = np.zeros(3)
        for i in range(trials):
            first[sample(m, 1, rng.mix(2024, i)).states[0]] += 1
        for p, k in zip((0.2, 0.5, 0.3), first):
            se = math.sqrt(trials * p * (1 - p))
            assert abs(k - trials * p) <= 3 * se

    def test_label_consistency(self, xyz_chain):
        t = sample(xyz_chain, 3000, 9)
        w = t.word
        for sym in "xyz":
            assert count(w, sym) == sum(
                visits(t, q, 0, len(t)) for q in xyz_chain.states if xyz_chain.label(q) == sym
            )

    def test_return_time(self, xyz_chain):
        t = np.asarray(sample(xyz_chain, 10**6, 77).states)
        hits = np.flatnonzero(t == 1)
        assert abs(np.diff(hits).mean() - 8 / 3) <= 0.03 * 8 / 3

    def test_bad_seed(self, xyz_chain):
        with pytest.raises(ValidationError):
            sample(xyz_chain, 3, -1)


class TestVisits:
    @pytest.fixture
    def trace(self, xyz_chain):
        return trace_from_states(xyz_chain, XYZ_WORD.split())

    def test_prefix(self, trace):
        assert visits(trace, "y", 0, 8) == 3

    def test_fourth_infix(self, trace):
        assert visits(trace, "y", 6, 4) == 2

    def test_zero_window(self, trace):
        assert visits(trace, "x", 5, 0) == 0

    def test_range(self, trace):
        with pytest.raises(ValidationError):
            visits(trace, "x", 10, 10)

    def test_first_visit(self, trace):
        assert first_visit(trace, "z", 0) == 3
        assert first_visit(trace, "x", 1) == 3
        assert first_visit(trace, "z", 14) is None
        assert first_visit(trace, "z", 0, horizon=2) is None

    def test_invalid_path(self, xyz_chain):
        with pytest.raises(ValidationError):
            trace_from_states(xyz_chain, ["x", "z"])
