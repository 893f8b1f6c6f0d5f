"""Tests for formula parsing, stratification and finite-model evaluation."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from src.hyperset import empty, omega, ordinal
from src.logic import (
    And,
    Equal,
    EvaluationError,
    Exists,
    Forall,
    FormulaSyntaxError,
    Member,
    Not,
    atoms,
    evaluate,
    format_formula,
    free_vars,
    parse_formula,
    stratify,
    variables,
)
from src.totality import ORD_FORMULA, enumerate_universe

NAMES = ["x", "y", "z", "w"]


@st.composite
def formula_texts(draw, depth=3):
    """Random formula text over at most four variables."""
    if depth == 0 or draw(st.booleans()):
        left, right = draw(st.sampled_from(NAMES)), draw(st.sampled_from(NAMES))
        op = draw(st.sampled_from(["in", "="]))
        return f"{left} {op} {right}"
    kind = draw(st.sampled_from(["not", "and", "or", "implies", "iff", "forall", "exists"]))
    if kind == "not":
        return f"~({draw(formula_texts(depth=depth - 1))})"
    if kind in ("forall", "exists"):
        var = draw(st.sampled_from(NAMES))
        return f"{kind} {var}. ({draw(formula_texts(depth=depth - 1))})"
    symbol = {"and": "&", "or": "|", "implies": "->", "iff": "<->"}[kind]
    left = draw(formula_texts(depth=depth - 1))
    right = draw(formula_texts(depth=depth - 1))
    return f"({left}) {symbol} ({right})"


def brute_force_stratifiable(f) -> bool:
    names = variables(f)
    constraints = [(a.left, a.right, 1 if isinstance(a, Member) else 0) for a in atoms(f)]
    for levels in itertools.product(range(len(names)), repeat=len(names)):
        level = dict(zip(names, levels))
        if all(level[l] + w == level[r] for l, r, w in constraints):
            return True
    return False


def _map_names(f, rename):
    if isinstance(f, (Member, Equal)):
        return type(f)(rename(f.left), rename(f.right))
    if isinstance(f, Not):
        return Not(_map_names(f.body, rename))
    if isinstance(f, (Forall, Exists)):
        return type(f)(rename(f.var), _map_names(f.body, rename))
    return type(f)(_map_names(f.left, rename), _map_names(f.right, rename))


def _swap_conjuncts(f):
    if isinstance(f, (Member, Equal)):
        return f
    if isinstance(f, Not):
        return Not(_swap_conjuncts(f.body))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _swap_conjuncts(f.body))
    if isinstance(f, And):
        return And(_swap_conjuncts(f.right), _swap_conjuncts(f.left))
    return type(f)(_swap_conjuncts(f.left), _swap_conjuncts(f.right))


class TestParse:
    def test_atom(self):
        f = parse_formula("x in y")
        assert f == Member("x", "y")
        assert free_vars(f) == {"x", "y"}

    def test_quantifier_binds(self):
        assert free_vars(parse_formula("forall z. ~(z in x)")) == {"x"}

    def test_two_free_variables(self):
        assert free_vars(parse_formula("x in y & ~(x in x)")) == {"x", "y"}

    def test_precedence(self):
        f = parse_formula("~x in y & y in z | x = z")
        assert format_formula(f) == "(~(x in y) & (y in z)) | (x = z)"

    def test_implication_is_right_associative(self):
        f = parse_formula("x in y -> y in z -> z in x")
        assert format_formula(f) == "(x in y) -> ((y in z) -> (z in x))"

    def test_quantifier_body_extends_right(self):
        f = parse_formula("forall a. a in x & x in a")
        assert isinstance(f, Forall)
        assert isinstance(f.body, And)

    def test_binders_are_renamed_apart(self):
        f = parse_formula("(exists x. x in y) & x in x")
        assert isinstance(f.left, Exists)
        assert f.left.var == "x_1"
        assert free_vars(f) == {"x", "y"}

    def test_format_round_trips(self):
        f = parse_formula(ORD_FORMULA)
        assert parse_formula(format_formula(f)) == f

    @pytest.mark.parametrize(
        "text, column",
        [("x in", 5), ("x # y", 3), ("(x in y", 8), ("forall . x = x", 8), ("x y", 3)],
    )
    def test_syntax_errors_carry_positions(self, text, column):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse_formula(text)
        assert exc.value.column == column


class TestStratify:
    def test_equality_is_stratified(self):
        result = stratify(parse_formula("x = x"))
        assert result.stratified
        assert result.levels == {"x": 0}

    def test_russell_is_not_stratified(self):
        result = stratify(parse_formula("~(x in x)"))
        assert not result.stratified
        assert result.witness_weight == 1
        assert [(s.source, s.target) for s in result.witness] == [("x", "x")]

    def test_membership_raises_level(self):
        result = stratify(parse_formula("x in y"))
        assert result.levels["y"] == result.levels["x"] + 1

    def test_levels_through_a_quantifier(self):
        result = stratify(parse_formula("exists y. (x in y & y in z)"))
        assert result.levels == {"y": 1, "x": 0, "z": 2}

    def test_witness_is_a_cycle_with_nonzero_weight(self):
        result = stratify(parse_formula("x in y & y in z & x = z"))
        assert not result.stratified
        assert result.witness_weight != 0
        steps = result.witness
        assert steps[0].source == steps[-1].target
        for a, b in zip(steps, steps[1:]):
            assert a.target == b.source

    def test_components_normalised_separately(self):
        result = stratify(parse_formula("x in y & z = w"))
        assert result.levels == {"x": 0, "y": 1, "z": 0, "w": 0}

    @given(formula_texts())
    @settings(max_examples=200, deadline=None)
    def test_matches_brute_force(self, text):
        f = parse_formula(text)
        result = stratify(f)
        assert result.stratified == brute_force_stratifiable(f)
        assert stratify(Not(f)).stratified == result.stratified
        if result.stratified:
            for atom in atoms(f):
                step = 1 if isinstance(atom, Member) else 0
                assert result.levels[atom.left] + step == result.levels[atom.right]
        else:
            steps = result.witness
            assert sum(s.weight for s in steps) != 0
            assert steps[0].source == steps[-1].target

    @given(formula_texts())
    @settings(max_examples=200, deadline=None)
    def test_invariant_under_binder_renaming(self, text):
        f = parse_formula(text)
        bound = set(variables(f)) - free_vars(f)

        def rename(name):
            return f"{name}_b" if name in bound else name

        before, after = stratify(f), stratify(_map_names(f, rename))
        assert before.stratified == after.stratified
        if before.stratified:
            assert after.levels == {rename(n): level for n, level in before.levels.items()}

    @given(formula_texts())
    @settings(max_examples=200, deadline=None)
    def test_invariant_under_conjunct_reordering(self, text):
        f = parse_formula(text)
        before, after = stratify(f), stratify(_swap_conjuncts(f))
        assert before.stratified == after.stratified
        assert before.levels == after.levels


@pytest.fixture(scope="module")
def universe2():
    return enumerate_universe(2).all_members


class TestEvaluate:
    def test_membership(self):
        assert evaluate(parse_formula("x in y"), {"x": empty(), "y": ordinal(1)}, [])

    def test_vacuous_universal(self, universe2):
        f = parse_formula("forall z. ~(z in x)")
        assert evaluate(f, {"x": empty()}, universe2)
        assert evaluate(f, {"x": empty()}, [])

    def test_empty_universe(self):
        assert evaluate(parse_formula("forall z. z in z"), {}, [])
        assert not evaluate(parse_formula("exists z. z = z"), {}, [])

    def test_ord_formula_on_two(self):
        universe = enumerate_universe(3).all_members
        assert evaluate(parse_formula(ORD_FORMULA), {"x": ordinal(2)}, universe)
        assert not evaluate(parse_formula(ORD_FORMULA), {"x": omega()}, universe)

    def test_missing_free_variable(self):
        with pytest.raises(EvaluationError) as exc:
            evaluate(parse_formula("x in y"), {"x": empty()}, [])
        assert exc.value.token == "y"

    @given(formula_texts(), st.data())
    @settings(max_examples=200, deadline=None)
    def test_classical_equivalences(self, universe2, text, data):
        f = parse_formula(text)
        env = {name: data.draw(st.sampled_from(universe2)) for name in sorted(free_vars(f))}
        value = evaluate(f, env, universe2)
        assert evaluate(Not(f), env, universe2) == (not value)
        assert evaluate(Not(Not(f)), env, universe2) == value
        for name in sorted(free_vars(f)):
            rest = {k: v for k, v in env.items() if k != name}
            every = evaluate(Forall(name, f), rest, universe2)
            none_fail = not evaluate(Exists(name, Not(f)), rest, universe2)
            assert every == none_fail
