import numpy as np
import pytest

from conftest import cycle, fixed_corpus, path3, triangle
from oracles import all_bitstrings, dense_cut, dense_mis_fitness
from evotypes.errors import LengthMismatch, VertexOutOfRange
from evotypes.graph import cut_value, from_edge_list, gen_er, internal_edges
from evotypes.problems import (
    McProblem,
    MisProblem,
    make_problem,
    mc_local_search,
    mis_evaluate,
    mis_repair,
    violation_count,
)


def bits(s):
    return np.array([int(c) for c in s], dtype=np.uint8)


def recomputed_violations(g, x):
    return np.array([x[i] * int(x[g.adjacency(i)].sum()) for i in range(g.n)])


def recomputed_gains(g, x):
    return np.array([cut_value(g, np.where(np.arange(g.n) == i, 1 - x, x)) - cut_value(g, x) for i in range(g.n)])


class TestMisEvaluate:
    def test_examples(self):
        p = MisProblem(triangle())
        assert mis_evaluate(p, bits("100")) == 1
        assert mis_evaluate(p, bits("111")) == -3
        assert mis_evaluate(p, bits("000")) == 0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mis_evaluate(MisProblem(triangle()), bits("10"))

    @pytest.mark.parametrize("name, g", fixed_corpus().items())
    def test_dense_oracle(self, name, g):
        p = MisProblem(g)
        xs = all_bitstrings(g.n)
        expected = dense_mis_fitness(g.dense(), xs)
        got = np.array([p.evaluate(x) for x in xs])
        np.testing.assert_array_equal(got, expected)


class TestViolationCount:
    def test_examples(self):
        assert violation_count(MisProblem(triangle()), bits("111"), 0) == 2
        assert violation_count(MisProblem(triangle()), bits("011"), 0) == 0
        assert violation_count(MisProblem(path3()), bits("111"), 1) == 2

    def test_out_of_range(self):
        with pytest.raises(VertexOutOfRange):
            violation_count(MisProblem(triangle()), bits("111"), 3)


class TestMisRepair:
    def test_independent_input_unchanged(self, rng):
        y, steps = mis_repair(MisProblem(path3()), bits("101"), rng)
        assert y.tolist() == [1, 0, 1] and steps == 0

    def test_path(self, rng):
        y, steps = mis_repair(MisProblem(path3()), bits("111"), rng)
        assert y.tolist() == [1, 0, 1] and steps == 1

    def test_triangle_reaches_each_singleton(self):
        rng = np.random.default_rng(0)
        seen = set()
        for _ in range(200):
            y, steps = mis_repair(MisProblem(triangle()), bits("111"), rng)
            assert steps == 2 and y.sum() == 1
            seen.add(tuple(y))
        assert len(seen) == 3

    def test_input_not_modified(self, rng):
        x = bits("111")
        mis_repair(MisProblem(triangle()), x, rng)
        assert x.tolist() == [1, 1, 1]

    @pytest.mark.parametrize("name, g", fixed_corpus().items())
    def test_exhaustive(self, name, g):
        p = MisProblem(g)
        rng = np.random.default_rng(1)
        for x in all_bitstrings(g.n).astype(np.uint8):
            y, steps = p.local_search(x, rng)
            assert internal_edges(g, y) == 0
            assert not np.any(y & (1 - x))
            assert steps == int(x.sum() - y.sum()) <= x.sum()
            assert p.evaluate(y) >= p.evaluate(x)
            # fixed point
            assert p.local_search(y, rng)[1] == 0

    def test_trace_follows_max_violation_rule(self):
        # replays every removal and checks it against counts recomputed from scratch
        rng = np.random.default_rng(2)
        for trial in range(200):
            g = gen_er(int(rng.integers(5, 25)), float(rng.uniform(0.1, 0.6)), trial)
            p = MisProblem(g)
            x = rng.integers(0, 2, g.n).astype(np.uint8)
            y, steps, removed = p.traced_local_search(x, rng)
            z = x.copy()
            for v in removed:
                c = recomputed_violations(g, z)
                assert c[v] == c.max() > 0
                z[v] = 0
            np.testing.assert_array_equal(z, y)
            assert recomputed_violations(g, z).max() == 0


class TestMcLocalSearch:
    def test_triangle(self, rng):
        y, steps = mc_local_search(McProblem(triangle()), bits("000"), rng)
        assert steps == 1 and cut_value(triangle(), y) == 2

    def test_path(self, rng):
        y, steps = mc_local_search(McProblem(path3()), bits("000"), rng)
        assert y.tolist() == [0, 1, 0] and steps == 1

    def test_optimal_input_unchanged(self, rng):
        y, steps = mc_local_search(McProblem(cycle(4)), bits("1010"), rng)
        assert y.tolist() == [1, 0, 1, 0] and steps == 0

    def test_gains_match_definition(self):
        g = gen_er(12, 0.4, 3)
        p = McProblem(g)
        for x in all_bitstrings(12)[::37].astype(np.uint8):
            np.testing.assert_array_equal(p.flip_gains(x), recomputed_gains(g, x))

    @pytest.mark.parametrize("name, g", fixed_corpus().items())
    def test_exhaustive_one_flip_optimal(self, name, g):
        p = McProblem(g)
        rng = np.random.default_rng(4)
        xs = all_bitstrings(g.n).astype(np.uint8)
        cuts = dense_cut(g.dense(), xs)
        for x, cx in zip(xs, cuts):
            y, steps = p.local_search(x, rng)
            assert p.flip_gains(y).max(initial=0) <= 0
            assert p.evaluate(y) >= cx
            assert steps <= max(g.num_edges, 0)

    def test_trace_follows_incremental_gains(self):
        # every flip must be a max-gain vertex under gains recomputed from scratch
        rng = np.random.default_rng(5)
        for trial in range(200):
            g = gen_er(int(rng.integers(4, 22)), float(rng.uniform(0.1, 0.7)), 100 + trial)
            p = McProblem(g)
            x = rng.integers(0, 2, g.n).astype(np.uint8)
            y, steps, flips = p.traced_local_search(x, rng)
            z = x.copy()
            cut = cut_value(g, z)
            for v in flips:
                gains = recomputed_gains(g, z)
                assert gains[v] == gains.max() > 0
                z[v] ^= 1
                new = cut_value(g, z)
                assert new == cut + gains[v]
                cut = new
            np.testing.assert_array_equal(z, y)
            assert recomputed_gains(g, y).max(initial=0) <= 0
            assert steps == len(flips) <= g.num_edges


def test_make_problem():
    g = triangle()
    assert isinstance(make_problem("MIS", g), MisProblem)
    assert isinstance(make_problem("maxcut", g), McProblem)
    with pytest.raises(ValueError):
        make_problem("tsp", g)


def test_edgeless_graph():
    g = from_edge_list(5, [])
    rng = np.random.default_rng(0)
    x = bits("10110")
    assert MisProblem(g).local_search(x, rng)[1] == 0
    assert McProblem(g).local_search(x, rng)[1] == 0
    assert MisProblem(g).evaluate(x) == 3
