"""
Tests for types, environments and their concrete syntax.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsub import errors
from fsub.syntax import (
    TOP,
    Arrow,
    Binding,
    Forall,
    ScopeMode,
    TypeEnv,
    Var,
    alpha_eq,
    env_equiv,
    env_well_formed,
    free_vars,
    fresh_name,
    parse_env,
    parse_type,
    render_env,
    render_type,
    rename,
    size,
    subterms,
    well_scoped_type,
)
from tests.strategies import alpha_variant, envs, types


class TestParseType:
    def test_top(self):
        assert parse_type("Top") == TOP

    def test_arrow_is_right_associative(self):
        assert parse_type("A -> B -> Top") == Arrow(Var("A"), Arrow(Var("B"), TOP))

    def test_forall_extends_right(self):
        assert parse_type("All X <: Top . X -> X") == Forall("X", TOP, Arrow(Var("X"), Var("X")))

    def test_parentheses(self):
        assert parse_type("(A -> B) -> Top") == Arrow(Arrow(Var("A"), Var("B")), TOP)

    def test_forall_in_codomain(self):
        assert parse_type("A -> All X <: Top . X") == Arrow(Var("A"), Forall("X", TOP, Var("X")))

    def test_forall_in_codomain_extends_right(self):
        t = parse_type("(A -> B) -> All X <: A . X -> B")
        assert t == Arrow(Arrow(Var("A"), Var("B")), Forall("X", Var("A"), Arrow(Var("X"), Var("B"))))

    def test_forall_in_codomain_of_bound(self):
        t = parse_type("All X <: Top -> All Y <: Top . Y . X")
        assert t == Forall("X", Arrow(TOP, Forall("Y", TOP, Var("Y"))), Var("X"))

    def test_forall_as_bound(self):
        t = parse_type("All X <: All Y <: Top . Y . X")
        assert t == Forall("X", Forall("Y", TOP, Var("Y")), Var("X"))

    @pytest.mark.parametrize("text", ["", "A ->", "(A", "A B", "All X . X", "A <: B", "-"])
    def test_malformed(self, text):
        with pytest.raises(errors.ParseError):
            parse_type(text)

    @pytest.mark.parametrize("text", ["All Top <: Top . Top", "All All <: Top . Top"])
    def test_reserved_binder(self, text):
        with pytest.raises(errors.ReservedNameError):
            parse_type(text)

    def test_error_position(self):
        with pytest.raises(errors.ParseError) as exc_info:
            parse_type("A -> )")
        assert exc_info.value.position == 5


class TestRenderType:
    def test_left_nested_arrow(self):
        assert render_type(Arrow(Arrow(TOP, TOP), TOP)) == "(Top -> Top) -> Top"

    def test_top(self):
        assert render_type(TOP) == "Top"

    def test_forall(self):
        assert render_type(Forall("X", TOP, Var("X"))) == "All X <: Top . X"

    def test_forall_in_codomain(self):
        t = Arrow(TOP, Forall("X", TOP, Var("X")))
        assert render_type(t) == "Top -> (All X <: Top . X)"
        assert parse_type(render_type(t)) == t

    def test_str_uses_render(self):
        assert str(Arrow(Var("A"), TOP)) == "A -> Top"

    @given(types(scope=("A", "B"), max_size=9))
    def test_round_trip(self, t):
        assert parse_type(render_type(t)) == t


class TestParseEnv:
    def test_empty(self):
        assert parse_env("") == TypeEnv()
        assert parse_env("   ") == TypeEnv()

    def test_bindings(self):
        env = parse_env("A <: Top, B <: A")
        assert env.entries == (Binding("A", TOP), Binding("B", Var("A")))

    def test_duplicate(self):
        with pytest.raises(errors.DuplicateNameError):
            parse_env("A <: Top, A <: Top")

    def test_trailing_comma(self):
        with pytest.raises(errors.ParseError):
            parse_env("A <: Top,")

    def test_render(self):
        assert render_env(parse_env("A <: Top, B <: A -> A")) == "A <: Top, B <: A -> A"


class TestNames:
    def test_reserved_var(self):
        with pytest.raises(errors.ReservedNameError):
            Var("Top")

    def test_illegal_identifier(self):
        with pytest.raises(errors.ReservedNameError):
            Binding("1A", TOP)


class TestFreeVars:
    def test_top(self):
        assert free_vars(TOP) == frozenset()

    def test_binder_scopes_body_only(self):
        assert free_vars(Forall("X", Var("Y"), Var("X"))) == {"Y"}

    def test_bound_is_outer_scope(self):
        assert free_vars(Forall("X", Var("X"), TOP)) == {"X"}

    def test_nested(self):
        t = Arrow(Var("A"), Forall("B", Var("A"), Var("C")))
        assert free_vars(t) == {"A", "C"}

    def test_size_and_subterms(self):
        t = parse_type("All X <: Top . X -> A")
        assert size(t) == 5
        assert len(list(subterms(t))) == 5


class TestWellScoped:
    def test_top(self):
        assert well_scoped_type(TOP, TypeEnv())

    def test_unbound(self):
        assert not well_scoped_type(Var("X"), TypeEnv())

    def test_closed_forall(self):
        assert well_scoped_type(Forall("X", TOP, Var("X")), TypeEnv())

    def test_env_strict_order(self):
        assert env_well_formed(parse_env("A <: Top, B <: A"), ScopeMode.STRICT)
        assert not env_well_formed(parse_env("B <: A, A <: Top"), ScopeMode.STRICT)

    def test_env_lax_ignores_order(self):
        assert env_well_formed(parse_env("B <: A, A <: Top"), ScopeMode.LAX)

    def test_self_bound(self):
        env = parse_env("X <: X")
        assert not env_well_formed(env, ScopeMode.STRICT)
        assert env_well_formed(env, ScopeMode.LAX)

    @given(envs())
    def test_generated_envs_are_strict(self, env):
        assert env_well_formed(env, ScopeMode.STRICT)

    @given(envs(), types(scope=("A", "B", "C")), types(scope=("A", "B", "C")))
    def test_survives_fresh_binding(self, env, t, bound):
        name = fresh_name(env.vocabulary | free_vars(t))
        wider = env.extend(name, bound)
        if well_scoped_type(t, env):
            assert well_scoped_type(t, wider)
        if well_scoped_type(bound, env):
            assert env_well_formed(wider, ScopeMode.STRICT)

    @given(st.data())
    def test_strict_implies_lax(self, data):
        env = data.draw(envs())
        permuted = env.permuted(data.draw(st.permutations(range(len(env)))))
        for candidate in (env, permuted):
            if env_well_formed(candidate, ScopeMode.STRICT):
                assert env_well_formed(candidate, ScopeMode.LAX)


class TestAlphaEq:
    def test_binder_renaming(self):
        assert alpha_eq(Forall("X", TOP, Var("X")), Forall("Y", TOP, Var("Y")))

    def test_free_names_differ(self):
        assert not alpha_eq(Var("X"), Var("Y"))

    def test_free_bound(self):
        assert alpha_eq(Forall("X", Var("Z"), Var("X")), Forall("Y", Var("Z"), Var("Y")))

    def test_bound_vs_free(self):
        assert not alpha_eq(Forall("X", TOP, Var("X")), Forall("Y", TOP, Var("X")))

    def test_shadowing(self):
        a = parse_type("All X <: Top . All X <: Top . X")
        b = parse_type("All Y <: Top . All Z <: Top . Z")
        c = parse_type("All Y <: Top . All Z <: Top . Y")
        assert alpha_eq(a, b)
        assert not alpha_eq(a, c)

    @given(types(scope=("A", "B")))
    def test_reflexive(self, t):
        assert alpha_eq(t, t)

    @given(types(scope=("A", "B")), types(scope=("A", "B")))
    def test_symmetric(self, t, u):
        assert alpha_eq(t, u) == alpha_eq(u, t)
        assert alpha_eq(alpha_variant(t), t)
        assert alpha_eq(t, alpha_variant(t))

    @given(types(scope=("A", "B")))
    def test_transitive(self, t):
        once = alpha_variant(t)
        twice = alpha_variant(once, frozenset({"X", "X1"}))
        assert alpha_eq(t, once) and alpha_eq(once, twice)
        assert alpha_eq(t, twice)

    @given(types(scope=("A", "B")))
    def test_variants_share_free_vars_and_size(self, t):
        variant = alpha_variant(t)
        assert free_vars(variant) == free_vars(t)
        assert size(variant) == size(t)


class TestFreshName:
    def test_empty(self):
        assert fresh_name(set()) == "X"

    def test_x_taken(self):
        assert fresh_name({"X"}) == "X1"

    def test_sequence(self):
        assert fresh_name({"X", "X1", "X2"}) == "X3"

    def test_gap(self):
        assert fresh_name({"X", "X2"}) == "X1"


class TestRename:
    def test_free_occurrence(self):
        assert rename(Arrow(Var("A"), Var("B")), {"A": "C"}) == Arrow(Var("C"), Var("B"))

    def test_bound_occurrence_untouched(self):
        t = Forall("A", TOP, Var("A"))
        assert rename(t, {"A": "C"}) == t

    def test_avoids_capture(self):
        t = Forall("Y", TOP, Arrow(Var("Y"), Var("A")))
        out = rename(t, {"A": "Y"})
        assert isinstance(out, Forall)
        assert out.binder != "Y"
        assert free_vars(out) == {"Y"}
        assert alpha_eq(out, Forall("Z", TOP, Arrow(Var("Z"), Var("Y"))))

    @given(types(scope=("A", "B")))
    def test_free_vars_follow_mapping(self, t):
        out = rename(t, {"A": "B", "B": "A"})
        swap = {"A": "B", "B": "A"}
        assert free_vars(out) == {swap[x] for x in free_vars(t)}


class TestTypeEnv:
    def test_lookup(self, chain_env):
        assert chain_env.lookup("B") == Var("A")
        assert chain_env.lookup("Z") is None

    def test_prefix_suffix(self, chain_env):
        assert [e.name for e in chain_env.prefix("B")] == ["A"]
        assert [e.name for e in chain_env.suffix("B")] == ["C"]

    def test_vocabulary_includes_free_bound_names(self):
        env = parse_env("B <: Q")
        assert env.vocabulary == {"B", "Q"}
        assert env.names == {"B"}

    def test_with_bound(self, chain_env):
        env = chain_env.with_bound("C", TOP)
        assert env.lookup("C") == TOP
        assert chain_env.lookup("C") == Var("B")

    def test_extend_duplicate(self, chain_env):
        with pytest.raises(errors.DuplicateNameError):
            chain_env.extend("A", TOP)

    def test_subsequence(self, chain_env):
        assert parse_env("A <: Top, C <: B").is_subsequence_of(chain_env)
        assert not parse_env("B <: A, A <: Top").is_subsequence_of(chain_env)
        assert not parse_env("A <: Top, B <: Top").is_subsequence_of(chain_env)

    def test_equiv_is_alpha(self):
        assert env_equiv(
            parse_env("A <: All X <: Top . X"), parse_env("A <: All Y <: Top . Y")
        )
        assert not env_equiv(parse_env("A <: Top"), parse_env("B <: Top"))

    def test_permuted(self, chain_env):
        assert [e.name for e in chain_env.permuted([2, 0, 1])] == ["C", "A", "B"]

    def test_without(self, chain_env):
        assert chain_env.without("B").names == {"A", "C"}
