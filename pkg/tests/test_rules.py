"""
Tests for derivations, rule checking and the s-expression format.
"""

import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsub import errors
from fsub.checker import Derivable, FuelExhausted, check
from fsub.rules import (
    Derivation,
    Judgment,
    Rule,
    SystemId,
    choose_binder,
    leaf,
    node,
    parse_derivation,
    read_sexp,
    render_derivation,
    serialize_derivation,
    validate_derivation,
)
from fsub.syntax import TOP, Forall, ScopeMode, TypeEnv, Var, parse_env, parse_type
from fsub.transforms import reflexivity
from fsub.transforms.core import transport
from tests.strategies import alpha_variant, envs, judgments, types

STRICT, LAX = ScopeMode.STRICT, ScopeMode.LAX
ORIGINAL, VARIANT, VARIANT_PLUS = SystemId.ORIGINAL, SystemId.VARIANT, SystemId.VARIANT_PLUS


def reasons(d, system=ORIGINAL, mode=STRICT):
    return [reason for _, reason in validate_derivation(d, system, mode).failures]


def graft(d, path, replacement):
    """Return ``d`` with the subtree at ``path`` replaced."""
    if not path:
        return replacement
    i, *rest = path
    premises = list(d.premises)
    premises[i] = graft(premises[i], rest, replacement)
    return dataclasses.replace(d, premises=tuple(premises))


class TestRuleSystems:
    def test_original_rules(self):
        assert ORIGINAL.rules == (
            Rule.TOP,
            Rule.REFL_TVAR,
            Rule.TRANS_TVAR,
            Rule.ARROW,
            Rule.ALL,
        )

    def test_variant_replaces_trans_tvar(self):
        assert Rule.TRANS_TVAR not in VARIANT.rules
        assert {Rule.HYP, Rule.TR_TVAR} <= set(VARIANT.rules)
        assert Rule.EXTRA not in VARIANT.rules

    def test_variant_plus_adds_extra(self):
        assert VARIANT_PLUS.rules == (*VARIANT.rules, Rule.EXTRA)

    def test_str(self):
        assert str(Rule.TR_TVAR) == "SA-Tr-TVar"
        assert str(VARIANT_PLUS) == "variant-plus"


class TestDerivation:
    def test_arity_checked(self):
        with pytest.raises(errors.ArityError):
            Derivation(Rule.ARROW, Judgment(TypeEnv(), TOP, TOP))

    def test_measures(self, chain_env):
        d = node(
            Rule.TRANS_TVAR,
            chain_env,
            Var("B"),
            Var("A"),
            leaf(Rule.REFL_TVAR, chain_env, Var("A"), Var("A")),
        )
        assert d.height == 2
        assert d.node_count == 2
        assert d.tags() == {Rule.TRANS_TVAR, Rule.REFL_TVAR}
        assert [path for path, _ in d.nodes()] == [(), (0,)]
        assert d.subtree((0,)).rule is Rule.REFL_TVAR

    def test_judgment_equiv_is_alpha(self):
        a = Judgment(TypeEnv(), parse_type("All X <: Top . X"), TOP)
        b = Judgment(TypeEnv(), parse_type("All Y <: Top . Y"), TOP)
        assert a.equiv(b)
        assert a != b

    def test_choose_binder_avoids(self):
        env = parse_env("X <: Top")
        assert choose_binder(env, Var("X"), TOP) == "X1"
        assert choose_binder(env, TOP, TOP, {"X1"}) == "X2"


class TestValidation:
    def test_top_ok(self):
        assert validate_derivation(leaf(Rule.TOP, TypeEnv(), TOP, TOP), ORIGINAL, STRICT).ok

    def test_top_left_not_well_scoped(self):
        d = leaf(Rule.TOP, TypeEnv(), Var("X"), TOP)
        assert reasons(d) == ["left not well-scoped"]
        assert validate_derivation(d, ORIGINAL, LAX).ok

    def test_rule_not_in_system(self):
        d = leaf(Rule.HYP, parse_env("A <: Top"), Var("A"), TOP)
        assert reasons(d) == ["rule not in system"]
        assert validate_derivation(d, VARIANT, STRICT).ok

    def test_failure_paths(self, chain_env):
        bad = leaf(Rule.REFL_TVAR, chain_env, Var("A"), Var("B"))
        d = node(Rule.TRANS_TVAR, chain_env, Var("B"), Var("B"), bad)
        report = validate_derivation(d, ORIGINAL, STRICT)
        assert not report
        paths = [path for path, _ in report.failures]
        assert (0,) in paths
        assert "0:" in str(report)

    def test_trans_tvar_requires_declared_bound(self, chain_env):
        d = node(
            Rule.TRANS_TVAR,
            chain_env,
            Var("C"),
            TOP,
            leaf(Rule.TOP, chain_env, Var("A"), TOP),
        )
        assert reasons(d) == ["premise does not conclude the declared bound below the right side"]

    def test_ill_formed_env_strict(self):
        env = parse_env("B <: A, A <: Top")
        d = leaf(Rule.TOP, env, TOP, TOP)
        assert "environment not well-formed" in reasons(d)
        assert validate_derivation(d, ORIGINAL, LAX).ok

    def test_refl_unbound_strict(self):
        d = leaf(Rule.REFL_TVAR, TypeEnv(), Var("X"), Var("X"))
        assert reasons(d) == ["X not bound"]
        assert validate_derivation(d, ORIGINAL, LAX).ok

    def test_all_binder_must_be_fresh(self):
        env = parse_env("X <: Top")
        s = parse_type("All Y <: Top . Y")
        body = leaf(Rule.REFL_TVAR, env.extend("Y", TOP), Var("Y"), Var("Y"))
        ok = node(Rule.ALL, env, s, s, leaf(Rule.TOP, env, TOP, TOP), body)
        assert validate_derivation(ok, ORIGINAL, STRICT).ok

        # body binder X is already bound
        clash = node(
            Rule.ALL,
            env,
            s,
            s,
            leaf(Rule.TOP, env, TOP, TOP),
            leaf(Rule.REFL_TVAR, TypeEnv.of(("X1", TOP), ("X", TOP)), Var("X"), Var("X")),
        )
        assert not validate_derivation(clash, ORIGINAL, STRICT).ok

    def test_tr_tvar(self):
        env = parse_env("A <: Top")
        hyp = leaf(Rule.HYP, env, Var("A"), TOP)
        top = leaf(Rule.TOP, env, TOP, TOP)
        d = node(Rule.TR_TVAR, env, Var("A"), TOP, hyp, top)
        assert validate_derivation(d, VARIANT, STRICT).ok
        assert set(reasons(d)) == {"rule not in system"}

    def test_hyp_requires_exact_bound(self):
        env = parse_env("A <: Top, B <: A")
        assert reasons(leaf(Rule.HYP, env, Var("B"), TOP), VARIANT) == [
            "B <: Top is not in the environment"
        ]

    def test_extra(self):
        env = parse_env("A <: Top, X <: Top")
        xv = leaf(Rule.TOP, env, Var("X"), TOP)
        narrowed = env.with_bound("X", TOP)
        mn = leaf(Rule.HYP, narrowed, Var("X"), TOP)
        d = node(Rule.EXTRA, env, Var("X"), TOP, xv, mn)
        assert validate_derivation(d, VARIANT_PLUS, STRICT).ok
        assert not validate_derivation(d, VARIANT, STRICT).ok

    @given(judgments(max_size=6))
    def test_reflexivity_validates(self, judgment):
        env, t, _ = judgment
        assert validate_derivation(reflexivity(env, t, STRICT), ORIGINAL, STRICT).ok

    @given(judgments(max_size=5))
    def test_replacing_a_subtree_keeps_validity(self, judgment):
        env, s, t = judgment
        outcome = check(ORIGINAL, STRICT, env, s, t, 1000)
        if not isinstance(outcome, Derivable):
            return
        d = outcome.derivation
        for path, sub in d.nodes():
            j = sub.conclusion
            other = check(ORIGINAL, STRICT, j.env, alpha_variant(j.left), alpha_variant(j.right), 1000)
            if isinstance(other, Derivable):
                assert validate_derivation(graft(d, path, other.derivation), ORIGINAL, STRICT).ok

    @given(st.data())
    def test_all_ignores_binder_choice(self, data):
        env = data.draw(envs(max_len=2))
        scope = tuple(e.name for e in env)
        binder = data.draw(st.sampled_from(["X", "Y"]))
        bound = data.draw(types(scope, max_size=3))
        s = Forall(binder, bound, data.draw(types((*scope, binder), max_size=4)))
        t = data.draw(st.sampled_from([Forall("Y", bound, TOP), s, alpha_variant(s)]))
        outcome = check(ORIGINAL, STRICT, env, s, t, 1000)
        if isinstance(outcome, FuelExhausted):
            return
        assert isinstance(outcome, Derivable)
        renamed = check(ORIGINAL, STRICT, env, alpha_variant(s), alpha_variant(t), 1000)
        assert not isinstance(renamed, FuelExhausted)
        assert renamed.label == outcome.label

        d = outcome.derivation
        assert d.rule is Rule.ALL
        bound_premise, body = d.premises
        z = body.env.entries[-1].name
        z2 = choose_binder(env, s, t, d.names)
        moved = transport(body, env.extend(z2, t.bound), {z: z2})
        assert validate_derivation(node(Rule.ALL, env, s, t, bound_premise, moved), ORIGINAL, STRICT).ok


class TestSexp:
    def test_serialize_top(self):
        d = leaf(Rule.TOP, TypeEnv(), TOP, TOP)
        assert serialize_derivation(d) == "(SA-Top (judgment () Top Top))"

    def test_serialize_refl(self):
        d = leaf(Rule.REFL_TVAR, parse_env("X <: Top"), Var("X"), Var("X"))
        assert serialize_derivation(d) == "(SA-Refl-TVar (judgment ((X Top)) (var X) (var X)))"

    def test_serialize_types(self):
        d = leaf(Rule.TOP, TypeEnv(), parse_type("All X <: Top . X -> Top"), TOP)
        assert "(all X Top (arrow (var X) Top))" in serialize_derivation(d)

    def test_parse(self):
        assert parse_derivation("(SA-Top (judgment () Top Top))") == leaf(Rule.TOP, TypeEnv(), TOP, TOP)

    def test_parse_whitespace_free(self):
        text = "(SA-Refl-TVar\n  (judgment ((X Top))\n    (var X) (var X)))\n"
        assert parse_derivation(text).rule is Rule.REFL_TVAR

    def test_parse_arity(self):
        with pytest.raises(errors.ArityError):
            parse_derivation("(SA-Arrow (judgment () Top Top))")

    @pytest.mark.parametrize(
        "text",
        [
            "(SA-Top (judgment () Top Top)",
            "(SA-Top (judgment () Top Top)))",
            "(SA-Bogus (judgment () Top Top))",
            "(SA-Top (judgment () Bottom Top))",
            "(SA-Top (judgment ((X)) Top Top))",
            "(SA-Top)",
            "",
        ],
    )
    def test_parse_malformed(self, text):
        with pytest.raises(errors.ParseError):
            parse_derivation(text)

    def test_parse_reserved_name(self):
        with pytest.raises(errors.ReservedNameError):
            parse_derivation("(SA-Top (judgment ((Top Top)) Top Top))")

    def test_parse_duplicate_env_name(self):
        with pytest.raises(errors.DuplicateNameError):
            parse_derivation("(SA-Top (judgment ((X Top) (X Top)) Top Top))")

    def test_read_sexp_positions(self):
        with pytest.raises(errors.ParseError) as exc_info:
            read_sexp("(a))")
        assert exc_info.value.position == 3

    @given(judgments(max_size=7))
    def test_round_trip(self, judgment):
        env, t, _ = judgment
        d = reflexivity(env, t, STRICT)
        text = serialize_derivation(d)
        assert parse_derivation(text) == d
        assert serialize_derivation(parse_derivation(text)) == text

    def test_render(self, chain_env):
        d = node(
            Rule.TRANS_TVAR,
            chain_env,
            Var("B"),
            Var("A"),
            leaf(Rule.REFL_TVAR, chain_env, Var("A"), Var("A")),
        )
        lines = render_derivation(d).splitlines()
        assert lines[0] == "SA-Trans-TVar: A <: Top, B <: A, C <: B |- B <: A"
        assert lines[1].startswith("  SA-Refl-TVar: ")
