import json
import random
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from geoscale.model import (BitVertex, BitstringLengthError,
                            DuplicateVertexError, Instance, InstanceError,
                            NonIntegerObjectiveError, Polytope, StartIndexError,
                            dot, format_rational, l1_dist, make_simplex,
                            objective_geometric, objective_linear,
                            parse_instance, parse_rational, random_polytope,
                            ratio, write_instance)


def bits(s):
    return BitVertex.from_str(s)


def naive_dot(c, s):
    """Independent dot product on the raw bitstring."""
    total = 0
    for k, ch in enumerate(s):
        if ch == "1":
            total += c[k]
    return total


class TestSimplex:
    def test_n3_vertices(self):
        assert [str(v) for v in make_simplex(3).vertices] == ["000", "001", "011", "111"]

    def test_n1_segment(self):
        assert [str(v) for v in make_simplex(1).vertices] == ["0", "1"]

    def test_n5_nested_supports(self):
        verts = make_simplex(5).vertices
        assert len(verts) == 6 and len(set(verts)) == 6
        supports = [{k for k, b in enumerate(v.bits) if b} for v in verts]
        for a, b in zip(supports, supports[1:]):
            assert a < b

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            make_simplex(0)

    @pytest.mark.parametrize("n", [1, 2, 7, 12])
    def test_linear_values_are_tail_sums(self, n):
        c = objective_linear(n)
        vals = [dot(c, v) for v in make_simplex(n).vertices]
        for i, val in enumerate(vals):
            assert val == sum(range(n - i + 1, n + 1))
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestObjectives:
    def test_linear(self):
        assert objective_linear(3) == (1, 2, 3)
        assert objective_linear(1) == (1,)
        assert max(objective_linear(4)) == 4

    def test_geometric(self):
        assert objective_geometric(4, 2) == (2, 4, 8, 16)
        assert objective_geometric(3, 3) == (3, 9, 27)

    def test_geometric_big(self):
        x = 1
        for _ in range(64):
            x += x
        c = objective_geometric(64, 2)
        assert c[63] == x == 18446744073709551616

    @pytest.mark.parametrize("base", [1, 0, -2])
    def test_geometric_rejects_small_base(self, base):
        with pytest.raises(ValueError):
            objective_geometric(3, base)


class TestRandomPolytope:
    def test_full_cube(self):
        p = random_polytope(3, 8, seed=11)
        assert sorted(str(v) for v in p.vertices) == [format(k, "03b") for k in range(8)]

    def test_single_vertex(self):
        assert len(random_polytope(8, 1, seed=5)) == 1

    def test_deterministic(self):
        assert random_polytope(6, 20, 3) == random_polytope(6, 20, 3)

    def test_too_many(self):
        with pytest.raises(ValueError):
            random_polytope(3, 9, 0)


class TestRatio:
    def test_s3_from_origin(self):
        c = objective_linear(3)
        x0, x1, x2, x3 = make_simplex(3).vertices
        assert ratio(c, x0, x1) == 3
        assert ratio(c, x0, x2) == Fraction(5, 2)
        assert ratio(c, x0, x3) == 2
        assert l1_dist(x0, x3) == 3

    def test_backwards_is_negative(self):
        c = objective_linear(3)
        x0, x1 = make_simplex(3).vertices[:2]
        assert ratio(c, x1, x0) == -3

    def test_self_ratio_undefined(self):
        x = bits("010")
        with pytest.raises(ZeroDivisionError):
            ratio((1, 2, 3), x, x)

    @pytest.mark.parametrize("n", [1, 4, 9])
    def test_closed_form_base2(self, n):
        c = objective_geometric(n, 2)
        verts = make_simplex(n).vertices
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                expected = Fraction(2 ** n) * (Fraction(2) ** (1 - i) - Fraction(2) ** (1 - j)) / (j - i)
                assert ratio(c, verts[i], verts[j]) == expected

    @pytest.mark.parametrize("beta", [2, 3, 5])
    @pytest.mark.parametrize("n", [3, 6])
    def test_closed_form_general_base(self, n, beta):
        c = objective_geometric(n, beta)
        verts = make_simplex(n).vertices
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                # geometric-series oracle on raw strings
                direct = Fraction(naive_dot(c, str(verts[j])) - naive_dot(c, str(verts[i])), j - i)
                closed = Fraction(beta ** (n - i + 1) - beta ** (n - j + 1), (beta - 1) * (j - i))
                assert direct == closed == ratio(c, verts[i], verts[j])


def test_rational_canonical_and_cross_multiplication():
    rng = random.Random(2024)
    prev = None
    for _ in range(1000):
        num = rng.randint(-10 ** 6, 10 ** 6)
        den = rng.choice([-1, 1]) * rng.randint(1, 10 ** 6)
        r = Fraction(num, den)
        assert r.denominator > 0
        assert gcd(abs(r.numerator), r.denominator) == 1
        if prev is not None:
            a, b = rng.randint(-50, 50), rng.randint(-50, 50)
            lhs, rhs = a * r, b * prev
            cross = (a * r.numerator * prev.denominator
                     > b * prev.numerator * r.denominator)
            assert (lhs > rhs) == cross
        prev = r


class TestRationalText:
    @pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("6/8", Fraction(3, 4)),
                                            ("5", Fraction(5)), ("-2/6", Fraction(-1, 3))])
    def test_parse(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["2.5", "1e3", "a/b", "1/0", ""])
    def test_reject(self, text):
        with pytest.raises(ValueError):
            parse_rational(text)

    def test_format(self):
        assert format_rational(Fraction(6, 8)) == "3/4"
        assert format_rational(Fraction(4, 2)) == "2"


class TestInstanceFormat:
    def test_valid(self):
        inst = parse_instance('{"n":2,"vertices":["00","11"],"c":["1","3"],"start":0}')
        assert inst.n == 2 and len(inst.vertices) == 2
        assert inst.objective == (1, 3)

    def test_duplicate(self):
        with pytest.raises(DuplicateVertexError):
            parse_instance('{"n":2,"vertices":["00","00"],"c":["1","3"],"start":0}')

    def test_non_integer(self):
        with pytest.raises(NonIntegerObjectiveError):
            parse_instance('{"n":2,"vertices":["00","11"],"c":["2.5","3"],"start":0}')

    def test_bad_length(self):
        with pytest.raises(BitstringLengthError):
            parse_instance('{"n":2,"vertices":["00","111"],"c":["1","3"],"start":0}')

    def test_bad_start(self):
        with pytest.raises(StartIndexError):
            parse_instance('{"n":2,"vertices":["00","11"],"c":["1","3"],"start":2}')

    def test_diagnostics_are_distinct(self):
        kinds = {BitstringLengthError, DuplicateVertexError,
                 NonIntegerObjectiveError, StartIndexError}
        assert len(kinds) == 4
        assert all(issubclass(k, InstanceError) for k in kinds)

    def test_big_entries_are_decimal_strings(self):
        inst = Instance(make_simplex(70), objective_geometric(70, 2), 0)
        data = json.loads(write_instance(inst))
        assert data["c"][-1] == str(2 ** 70)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 7), st.data())
    def test_round_trip(self, n, data):
        codes = data.draw(st.sets(st.integers(0, 2 ** n - 1), min_size=1, max_size=12))
        verts = tuple(BitVertex.from_str(format(k, f"0{n}b")) for k in sorted(codes))
        c = tuple(data.draw(st.lists(st.integers(-2 ** 80, 2 ** 80), min_size=n, max_size=n)))
        start = data.draw(st.integers(0, len(verts) - 1))
        inst = Instance(Polytope(n, verts), c, start)
        assert parse_instance(write_instance(inst)) == inst
