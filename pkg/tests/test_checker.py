"""
Tests for the fuel-bounded decision procedures.
"""

import pytest
from hypothesis import given

from fsub import errors
from fsub.checker import Derivable, Fuel, FuelExhausted, NotDerivable, check
from fsub.rules import Rule, SystemId, validate_derivation
from fsub.syntax import TOP, ScopeMode, TypeEnv, Var, parse_env, parse_type
from fsub.testkit import enumerate_oracle
from tests.strategies import judgments

STRICT, LAX = ScopeMode.STRICT, ScopeMode.LAX
ORIGINAL, VARIANT = SystemId.ORIGINAL, SystemId.VARIANT


def run(system, mode, env, s, t, fuel=10):
    return check(system, mode, parse_env(env), parse_type(s), parse_type(t), fuel)


class TestOutcomes:
    def test_labels_and_codes(self):
        assert (Derivable.label, Derivable.exit_code) == ("derivable", 0)
        assert (str(NotDerivable()), NotDerivable.exit_code) == ("not-derivable", 1)
        assert (str(FuelExhausted()), FuelExhausted.exit_code) == ("fuel-exhausted", 2)

    def test_fuel_nonnegative(self):
        with pytest.raises(ValueError):
            Fuel(-1)


class TestOriginal:
    def test_top(self):
        outcome = run(ORIGINAL, STRICT, "", "Top", "Top")
        assert isinstance(outcome, Derivable)
        assert outcome.derivation.rule is Rule.TOP
        assert outcome.derivation.node_count == 1

    def test_variable_through_bound(self):
        outcome = run(ORIGINAL, STRICT, "A <: Top, B <: A", "B", "A")
        d = outcome.derivation
        assert d.rule is Rule.TRANS_TVAR
        assert d.premises[0].rule is Rule.REFL_TVAR
        assert d.premises[0].left == Var("A")

    def test_top_below_variable(self):
        assert isinstance(run(ORIGINAL, STRICT, "A <: Top", "Top", "A"), NotDerivable)

    def test_forced_regress(self):
        assert isinstance(run(ORIGINAL, LAX, "X <: X", "X", "Y", fuel=5), FuelExhausted)

    def test_fuel_object(self):
        fuel = Fuel(100)
        run_outcome = check(ORIGINAL, STRICT, TypeEnv(), TOP, TOP, fuel)
        assert isinstance(run_outcome, Derivable)
        assert fuel.remaining == 99

    def test_refl_has_priority(self):
        d = run(ORIGINAL, STRICT, "A <: Top", "A", "A").derivation
        assert d.rule is Rule.REFL_TVAR

    def test_top_has_priority(self):
        d = run(ORIGINAL, STRICT, "A <: Top", "A", "Top").derivation
        assert d.rule is Rule.TOP

    def test_arrow_contravariant(self):
        env = "A <: Top, B <: A"
        assert isinstance(run(ORIGINAL, STRICT, env, "A -> B", "B -> A"), Derivable)
        assert isinstance(run(ORIGINAL, STRICT, env, "B -> A", "A -> B"), NotDerivable)

    def test_forall(self):
        outcome = run(ORIGINAL, STRICT, "", "All X <: Top . X", "All Y <: Top . Y")
        d = outcome.derivation
        assert d.rule is Rule.ALL
        assert validate_derivation(d, ORIGINAL, STRICT).ok

    def test_forall_binder_avoids_env(self):
        d = run(ORIGINAL, STRICT, "X <: Top", "All X <: Top . X", "All X <: Top . X").derivation
        body = d.premises[1]
        assert body.env.entries[-1].name != "X"
        assert validate_derivation(d, ORIGINAL, STRICT).ok

    def test_shape_mismatch(self):
        assert isinstance(run(ORIGINAL, STRICT, "", "Top -> Top", "All X <: Top . X"), NotDerivable)

    def test_ill_formed_env(self):
        with pytest.raises(errors.IllFormedEnvError):
            run(ORIGINAL, STRICT, "B <: A, A <: Top", "B", "A")

    def test_unknown_variable_strict(self):
        with pytest.raises(errors.UnknownVariableError) as exc_info:
            run(ORIGINAL, STRICT, "", "X", "Y")
        assert exc_info.value.names == ["X", "Y"]

    def test_unknown_variable_lax(self):
        assert isinstance(run(ORIGINAL, LAX, "", "X", "Y"), NotDerivable)
        assert isinstance(run(ORIGINAL, LAX, "", "X", "X"), Derivable)

    def test_lax_ignores_order(self):
        assert isinstance(run(ORIGINAL, LAX, "B <: A, A <: Top", "B", "A"), Derivable)

    def test_deep_regress_is_fuel_exhausted(self):
        assert isinstance(run(ORIGINAL, LAX, "X <: X", "X", "Y", fuel=10**7), FuelExhausted)


class TestVariant:
    def test_top_priority(self):
        d = run(VARIANT, STRICT, "A <: Top", "A", "Top").derivation
        assert d.rule is Rule.TOP

    def test_hyp(self):
        d = run(VARIANT, STRICT, "A <: Top, B <: A", "B", "A").derivation
        assert d.rule is Rule.HYP

    def test_tr_tvar(self):
        d = run(VARIANT, STRICT, "A <: Top, B <: A, C <: B", "C", "A").derivation
        assert d.rule is Rule.TR_TVAR
        assert validate_derivation(d, VARIANT, STRICT).ok

    def test_oracle_finds_both(self):
        env = parse_env("A <: Top")
        found = enumerate_oracle(VARIANT, STRICT, env, Var("A"), TOP, 3)
        rules = [d.rule for d in found]
        assert rules[0] is Rule.TOP
        assert Rule.TR_TVAR in rules


class TestProperties:
    @given(judgments())
    def test_derivations_validate(self, judgment):
        env, s, t = judgment
        for system in (ORIGINAL, VARIANT):
            outcome = check(system, STRICT, env, s, t, 1000)
            if isinstance(outcome, Derivable):
                d = outcome.derivation
                assert validate_derivation(d, system, STRICT).ok
                assert d.env == env
                assert (d.left, d.right) == (s, t)

    @given(judgments())
    def test_systems_agree(self, judgment):
        env, s, t = judgment
        outcomes = {check(system, STRICT, env, s, t, 1000).label for system in (ORIGINAL, VARIANT)}
        assert len(outcomes) == 1 or "fuel-exhausted" in outcomes

    @given(judgments(max_size=4))
    def test_monotone_in_fuel(self, judgment):
        env, s, t = judgment
        small = check(ORIGINAL, STRICT, env, s, t, 20)
        if not isinstance(small, FuelExhausted):
            assert check(ORIGINAL, STRICT, env, s, t, 2000).label == small.label

    @given(judgments())
    def test_deterministic(self, judgment):
        env, s, t = judgment
        assert check(ORIGINAL, STRICT, env, s, t, 500) == check(ORIGINAL, STRICT, env, s, t, 500)

    @given(judgments())
    def test_strict_derivations_are_lax(self, judgment):
        env, s, t = judgment
        for system in (ORIGINAL, VARIANT):
            outcome = check(system, STRICT, env, s, t, 1000)
            if isinstance(outcome, Derivable):
                assert validate_derivation(outcome.derivation, system, LAX).ok
