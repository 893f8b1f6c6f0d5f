"""Tests for Apg validation, canonical forms and the core set operations."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from src.bisimulation import bfs_depths, naive_partition
from src.errors import WorkbenchError
from src.hyperset import (
    Apg,
    CanonSet,
    GraphError,
    bisimilar,
    canonicalize,
    elements,
    empty,
    from_elements,
    is_member,
    is_ordinal,
    is_well_founded,
    omega,
    ordinal,
    replace,
    transitive_closure,
)
from src.logic import evaluate, parse_formula
from src.totality import ORD_FORMULA, enumerate_universe
from test.conftest import all_graphs, random_apg


def _unfold(g: Apg, rng: random.Random) -> Apg:
    """Double every node; each edge goes to a random copy. Bisimilar to g."""
    n = len(g.nodes)
    edges = []
    for p, c in g.edges:
        for copy in (0, n):
            edges.append((p + copy, c + rng.choice((0, n))))
    # keep only what the root reaches
    succ = {v: [] for v in range(2 * n)}
    for p, c in edges:
        succ[p].append(c)
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        for c in succ[v]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    kept = tuple(sorted(seen))
    return Apg(
        nodes=kept,
        edges=tuple(sorted({(p, c) for p, c in edges if p in seen})),
        root=0,
    )


@st.composite
def apgs(draw, max_nodes=7):
    seed = draw(st.integers(min_value=0, max_value=2**32))
    return random_apg(random.Random(seed), max_nodes)


def _naive_bisimilar(a: Apg, b: Apg) -> bool:
    """Roots in the same block of the naive partition of the disjoint union."""
    index = {("a", v): i for i, v in enumerate(a.nodes)}
    index.update({("b", v): len(a.nodes) + i for i, v in enumerate(b.nodes)})
    succ = [[] for _ in index]
    for side, g in (("a", a), ("b", b)):
        for p, c in g.edges:
            succ[index[side, p]].append(index[side, c])
    blocks = naive_partition(succ)
    return blocks[index["a", a.root]] == blocks[index["b", b.root]]


def _accessible_graphs(max_nodes: int) -> list[Apg]:
    return [
        Apg.from_succ(succ, 0)
        for succ in all_graphs(max_nodes)
        if min(bfs_depths(succ, 0)) >= 0
    ]


@pytest.fixture(scope="module")
def universe3():
    return enumerate_universe(3).all_members


class TestApgValidation:
    def test_valid_graph(self):
        Apg(nodes=(0, 1), edges=((0, 1),), root=0).validate()

    def test_dangling_edge(self):
        with pytest.raises(GraphError, match="dangling"):
            canonicalize(Apg(nodes=(0,), edges=((0, 5),), root=0))

    def test_unreachable_node(self):
        with pytest.raises(GraphError, match="unreachable"):
            canonicalize(Apg(nodes=(0, 1), edges=(), root=0))

    def test_root_must_be_a_node(self):
        with pytest.raises(GraphError):
            canonicalize(Apg(nodes=(0,), edges=(), root=3))

    def test_duplicate_edge(self):
        with pytest.raises(GraphError, match="duplicate edge"):
            canonicalize(Apg(nodes=(0, 1), edges=((0, 1), (0, 1)), root=0))

    def test_graph_error_is_a_workbench_error(self):
        assert issubclass(GraphError, WorkbenchError)

    def test_arbitrary_node_ids(self):
        g = Apg(nodes=(10, 20), edges=((10, 20), (20, 20)), root=10)
        assert canonicalize(g) == from_elements([omega()])


class TestCanonicalize:
    def test_empty_and_omega(self):
        assert canonicalize(Apg(nodes=(0,), edges=(), root=0)) == empty()
        assert canonicalize(Apg(nodes=(0,), edges=((0, 0),), root=0)) == omega()

    def test_omega_variants(self):
        # a = {a}, b = {{b}}, and a two-cycle all picture the Quine atom
        two_cycle = Apg(nodes=(0, 1), edges=((0, 1), (1, 0)), root=0)
        assert canonicalize(two_cycle) == omega()

    def test_result_is_minimal_and_rooted_at_zero(self):
        s = canonicalize(Apg.from_succ([[1, 2], [], []]))
        assert s == from_elements([empty()])
        assert s.size == 2

    @given(apgs())
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, g):
        s = canonicalize(g)
        assert canonicalize(s.to_apg()) == s

    @given(apgs(), st.integers(min_value=0, max_value=1000))
    @settings(max_examples=200, deadline=None)
    def test_unfolding_invariant(self, g, seed):
        assert canonicalize(_unfold(g, random.Random(seed))) == canonicalize(g)

    @given(apgs(), st.randoms(use_true_random=False))
    @settings(max_examples=200, deadline=None)
    def test_relabelling_invariant(self, g, rand):
        ids = list(range(100, 100 + len(g.nodes)))
        rand.shuffle(ids)
        relabelled = Apg(
            nodes=tuple(ids),
            edges=tuple((ids[p], ids[c]) for p, c in g.edges),
            root=ids[g.root],
        )
        assert canonicalize(relabelled) == canonicalize(g)

    @given(apgs(), apgs(), apgs())
    @settings(max_examples=100, deadline=None)
    def test_bisimilar_is_an_equivalence(self, a, b, c):
        assert bisimilar(a, a)
        assert bisimilar(a, b) == bisimilar(b, a)
        if bisimilar(a, b) and bisimilar(b, c):
            assert bisimilar(a, c)

    def test_equal_sets_hash_equal(self):
        a = canonicalize(Apg.from_succ([[1], [0]]))
        assert hash(a) == hash(omega())
        assert len({a, omega(), CanonSet(((0,),))}) == 1


class TestConstructors:
    def test_ordinals(self):
        assert ordinal(0) == empty()
        assert ordinal(1) == from_elements([empty()])
        assert ordinal(3) == from_elements([ordinal(0), ordinal(1), ordinal(2)])
        assert ordinal(3).size == 4

    def test_negative_ordinal(self):
        with pytest.raises(ValueError):
            ordinal(-1)

    def test_from_elements_collapses_duplicates(self):
        s = from_elements([omega(), canonicalize(Apg.from_succ([[1], [0]])), empty()])
        assert len(elements(s)) == 2

    def test_elements_and_membership(self):
        two = ordinal(2)
        assert set(elements(two)) == {ordinal(0), ordinal(1)}
        assert is_member(ordinal(1), two)
        assert not is_member(two, two)
        assert is_member(omega(), omega())

    def test_well_foundedness(self):
        assert is_well_founded(ordinal(4))
        assert not is_well_founded(omega())
        assert not is_well_founded(from_elements([empty(), omega()]))

    def test_transitive_closure(self):
        assert set(transitive_closure(ordinal(3))) == {ordinal(0), ordinal(1), ordinal(2)}
        assert transitive_closure(omega()) == [omega()]
        assert transitive_closure(empty()) == []


class TestIsOrdinal:
    def test_finite_ordinals(self):
        for n in range(5):
            assert is_ordinal(ordinal(n))

    def test_omega_is_not_an_ordinal(self):
        assert not is_ordinal(omega())

    def test_non_transitive_set(self):
        assert not is_ordinal(from_elements([ordinal(1)]))

    def test_self_membered_successor_passes(self):
        # C = {0, 1, C}
        c = canonicalize(Apg.from_succ([[1, 2, 0], [], [1]]))
        assert c in c.element_set
        assert is_ordinal(c)


class TestReplace:
    @pytest.mark.parametrize("s", [omega(), ordinal(3)])
    def test_replace_empty_inside_two(self, s):
        # {0, {0}} with 0 -> s gives {s, {s}}
        assert replace(ordinal(2), empty(), s) == from_elements([s, from_elements([s])])

    def test_replace_is_latent_when_absent(self):
        assert replace(omega(), empty(), ordinal(3)) == omega()

    def test_replace_whole_set(self):
        assert replace(omega(), omega(), ordinal(3)) == ordinal(3)

    def test_does_not_search_inside_y(self):
        # replacing 0 by {0} inside {0} stops at the first occurrence
        assert replace(ordinal(1), empty(), ordinal(1)) == from_elements([ordinal(1)])

    def test_drops_what_sat_below_x(self):
        # in 3 = {0, 1, 2}, replacing 2 by omega keeps 0 and 1 (still reached directly)
        result = replace(ordinal(3), ordinal(2), omega())
        assert result == from_elements([ordinal(0), ordinal(1), omega()])


class TestInvariantsOverUniverse:
    def test_elements_round_trip(self, universe3):
        for s in universe3:
            assert from_elements(elements(s)) == s

    def test_replace_by_itself_is_identity(self, universe3):
        for s in universe3:
            for x in transitive_closure(s) + [s]:
                assert replace(s, x, x) == s

    def test_replace_is_latent_outside_the_closure(self, universe3):
        rng = random.Random(5)
        for s in universe3:
            closure = set(transitive_closure(s)) | {s}
            for x in rng.sample(universe3, min(20, len(universe3))):
                if x not in closure:
                    assert replace(s, x, ordinal(2)) == s

    def test_is_ordinal_agrees_with_the_ord_formula(self, universe3):
        ord_formula = parse_formula(ORD_FORMULA)
        for s in universe3:
            assert is_ordinal(s) == evaluate(ord_formula, {"x": s}, universe3), s


class TestAgainstNaiveOracle:
    def test_sampled_pairs(self):
        rng = random.Random(17)
        graphs = _accessible_graphs(3)
        for _ in range(1500):
            a, b = rng.choice(graphs), rng.choice(graphs)
            assert bisimilar(a, b) == _naive_bisimilar(a, b), (a, b)

    @given(apgs(max_nodes=5), st.integers(min_value=0, max_value=1000))
    @settings(max_examples=100, deadline=None)
    def test_unfolded_pairs(self, g, seed):
        other = _unfold(g, random.Random(seed))
        assert _naive_bisimilar(g, other)
        assert bisimilar(g, other)

    @pytest.mark.slow
    def test_every_pair_up_to_three_nodes(self):
        graphs = _accessible_graphs(3)
        canon = [canonicalize(g) for g in graphs]
        for i, a in enumerate(graphs):
            for j in range(i, len(graphs)):
                assert (canon[i] == canon[j]) == _naive_bisimilar(a, graphs[j])


class TestLargeGraphs:
    def test_canonicalize_100k_nodes_under_five_seconds(self):
        import time

        rng = random.Random(99)
        n = 100_000
        succ = [set() for _ in range(n)]
        for v in range(1, n):
            succ[rng.randrange(v)].add(v)
        while sum(len(s) for s in succ) < 300_000:
            for _ in range(10_000):
                succ[rng.randrange(n)].add(rng.randrange(n))
        g = Apg.from_succ([sorted(s) for s in succ], 0)

        start = time.perf_counter()
        canon = canonicalize(g)
        elapsed = time.perf_counter() - start

        assert canon.size <= n
        assert elapsed < 5.0
