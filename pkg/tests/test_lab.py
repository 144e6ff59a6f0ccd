import io
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from limitmon import lab, rng
from limitmon.errors import ValidationError
from limitmon.markov import parse_chain
from limitmon.monitors import schedule_offset

PREFIX_ROW = [0, .5, .33, .25, .4, .33, .29, .38, .33, .4, .36, .33, .38, .36, .33, .38]
INFIX_ROW = [0, .5, .33, .5, .2]


def rounded(series):
    return [round(v, 2) for v in series.values()]


def chain_json(states, transitions, initial=None):
    doc = {
        "alphabet": sorted({label for _, label in states}),
        "states": [{"name": n, "label": l} for n, l in states],
        "transitions": [{"from": a, "to": b, "prob": p} for a, b, p in transitions],
    }
    if initial:
        doc["initial"] = initial
    return parse_chain(json.dumps(doc))


@pytest.fixture
def single():
    return chain_json([("s", "a")], [("s", "s", 1)])


@pytest.fixture
def flipflop():
    return chain_json([("p", "a"), ("q", "b")], [("p", "q", 1), ("q", "p", 1)], {"p": 1})


class TestFixedWordTables:
    def test_prefix_row(self, xyz_chain, xyz_word):
        s = lab.prefix_convergence(xyz_chain, "y", 16, word=xyz_word)
        assert rounded(s) == PREFIX_ROW
        assert s.value_at(8) == 3 / 8

    def test_infix_row(self, xyz_chain, xyz_word):
        s = lab.infix_convergence(xyz_chain, "y", 5, word=xyz_word)
        assert rounded(s) == INFIX_ROW
        assert s.indices() == [1, 2, 3, 4, 5]

    def test_word_too_short(self, xyz_chain, xyz_word):
        with pytest.raises(ValidationError):
            lab.infix_convergence(xyz_chain, "y", 6, word=xyz_word)


class TestConvergence:
    def test_single_state(self, single):
        assert lab.prefix_convergence(single, "a", 50, seed=1).values() == [1.0] * 50
        assert lab.infix_convergence(single, "a", 20, seed=1).values() == [1.0] * 20

    def test_level_one_is_zero_or_one(self, xyz_chain):
        for seed in range(20):
            assert lab.infix_convergence(xyz_chain, "y", 3, seed=seed).value_at(1) in (0.0, 1.0)

    def test_prefix_and_infix_agree_with_stationary(self, xyz_chain):
        good = 0
        for seed in range(100):
            inf = lab.infix_convergence(xyz_chain, "y", 1000, seed=seed).rows[-1][1]
            pre = lab.prefix_convergence(xyz_chain, "y", 5 * 10**5, seed=seed).rows[-1][1]
            good += abs(inf - 0.375) <= 0.05 and abs(pre - 0.375) <= 0.05
        assert good >= 95


class TestTriangularLLN:
    def test_point_mass(self):
        s = lab.triangular_lln(lab.FiniteDistribution.parse("5:1"), 30, seed=3)
        assert s.values() == [5.0] * 30
        assert s.params == {"mean": 5.0, "final_error": 0.0}

    def test_fair_coin(self):
        dist = lab.FiniteDistribution.parse("0:0.5,1:0.5")
        close = sum(
            abs(lab.triangular_lln(dist, [10**4], seed).rows[0][1] - 0.5) <= 0.02 for seed in range(100)
        )
        assert close >= 99

    def test_rows_are_fresh(self):
        """Row n averages its own n draws; no draw is reused by a later row."""
        dist = lab.FiniteDistribution.parse("0:1/2,1:1/2")
        s = lab.triangular_lln(dist, 6, seed=9)
        u = rng.generator(9).random(sum(range(1, 7)))
        for n in range(1, 7):
            row = u[schedule_offset(n) : schedule_offset(n) + n]
            assert s.value_at(n) == sum(row >= 0.5) / n

    def test_final_error(self):
        dist = lab.FiniteDistribution.parse("1:0.25,3:0.75")
        s = lab.triangular_lln(dist, 10, seed=5)
        assert s.params["mean"] == 2.5
        assert s.params["final_error"] == abs(s.rows[-1][1] - 2.5)

    @pytest.mark.parametrize("text", ["", "1:0.5", "a:1", "1:-0.5,2:1.5", "1"])
    def test_bad_distribution(self, text):
        with pytest.raises(ValidationError):
            lab.FiniteDistribution.parse(text)


class TestFirstVisit:
    def test_single_state(self, single):
        s = lab.first_visit_ratio(single, "s", 30, seed=0)
        assert s.values() == [1 / n for n in range(1, 31)]
        assert not s.flagged

    def test_censored(self, flipflop):
        s = lab.first_visit_ratio(flipflop, "q", 4, seed=0)
        # chunk 1 is the single letter at position 1, which is p
        assert s.flagged == {1}
        assert s.value_at(1) == 1.0
        assert s.values()[1:] == [1 / 2, 1 / 3, 2 / 4]

    def test_regression_seed_42(self, xyz_chain):
        s = lab.first_visit_ratio(xyz_chain, "y", 1000, seed=42)
        mean = lab.uncensored_mean(s, 900, 1000)
        frozen = 0.002051356622816633
        assert mean < 0.02
        assert frozen / 2 <= mean <= frozen * 2

    def test_unknown_state(self, xyz_chain):
        with pytest.raises(ValidationError):
            lab.first_visit_ratio(xyz_chain, "w", 5, seed=0)


class TestModeRate:
    def test_bound_value(self):
        assert lab.mode_rate_bound(0.75, 10) == 0.7626953125

    def test_certain(self):
        for n in (2, 5, 11):
            empirical, bound = lab.mode_error_rate(1.0, n, 200, seed=1)
            assert empirical == 1.0 and bound == 1.0

    @pytest.mark.parametrize("pa", [0.5, 0.3, 1.5])
    def test_invalid(self, pa):
        with pytest.raises(ValidationError):
            lab.mode_error_rate(pa, 10, 10, seed=1)

    def test_above_bound(self):
        empirical, bound = lab.mode_error_rate(0.75, 10, 10**5, seed=7)
        assert empirical >= bound - 3 * math.sqrt(bound * (1 - bound) / 10**5)

    def test_tie_is_failure(self):
        # n = 2 with p(a) close to 1/2: "ab" and "ba" ties must not count
        empirical, _ = lab.mode_error_rate(0.5001, 2, 10**5, seed=2)
        assert abs(empirical - 0.5001**2) < 0.01


class TestCsv:
    def test_empty(self):
        buf = io.StringIO()
        lab.emit_csv(lab.Series("prefix", 4, {"sigma": "y"}), buf)
        assert buf.getvalue() == "# experiment=prefix\n# seed=4\n# sigma=y\nindex,value\n"

    def test_seventeen_digits(self):
        s = lab.Series("x")
        s.add(1, 1 / 3)
        s.add(2, 0.375)
        text = io.StringIO()
        lab.emit_csv(s, text)
        assert "1,0.33333333333333331\n" in text.getvalue()
        assert "2,0.375\n" in text.getvalue()

    @settings(max_examples=100)
    @given(
        st.lists(st.floats(allow_nan=False, allow_infinity=False), max_size=20),
        st.one_of(st.none(), st.integers(0, 2**64 - 1)),
        st.sets(st.integers(0, 19)),
    )
    def test_roundtrip(self, values, seed, flags):
        s = lab.Series("infix", seed, {"sigma": "y", "levels": len(values), "rho": 0.75})
        for i, v in enumerate(values):
            s.add(i, v, i in flags)
        buf = io.StringIO()
        lab.emit_csv(s, buf)
        assert lab.parse_csv(buf.getvalue()) == s

    def test_file(self, tmp_path):
        s = lab.triangular_lln(lab.FiniteDistribution.parse("0:0.5,1:0.5"), 3, seed=1)
        path = tmp_path / "out.csv"
        lab.emit_csv(s, str(path))
        assert lab.parse_csv(path.read_text()) == s

    def test_unwritable(self, tmp_path):
        with pytest.raises(Exception, match="no_such_dir"):
            lab.emit_csv(lab.Series("x"), str(tmp_path / "no_such_dir" / "f.csv"))

    def test_index_must_increase(self):
        s = lab.Series("x")
        s.add(2, 0.0)
        with pytest.raises(Exception):
            s.add(2, 1.0)


def test_determinism(xyz_chain):
    runs = [
        lambda: lab.prefix_convergence(xyz_chain, "y", 1000, seed=11),
        lambda: lab.infix_convergence(xyz_chain, "z", 40, seed=11),
        lambda: lab.first_visit_ratio(xyz_chain, "x", 40, seed=11),
        lambda: lab.triangular_lln(lab.FiniteDistribution.parse("0:0.2,4:0.8"), 40, seed=11),
        lambda: lab.mode_rate_series(0.6, 10, 1000, seed=11),
    ]
    for run in runs:
        a, b = io.StringIO(), io.StringIO()
        lab.emit_csv(run(), a)
        lab.emit_csv(run(), b)
        assert a.getvalue() == b.getvalue()
