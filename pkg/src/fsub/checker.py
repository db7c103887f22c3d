"""
This module implements fuel-bounded decision procedures for the original and
variant subtyping systems.

Subtyping in full F<: need not terminate, so every query runs against an
explicit budget of rule expansions and answers with one of three outcomes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import ClassVar, TypeAlias

from fsub import errors
from fsub._settings import settings
from fsub.rules import (
    Derivation,
    Rule,
    SystemId,
    choose_binder,
    leaf,
    node,
    open_forall,
)
from fsub.syntax import (
    Arrow,
    Forall,
    ScopeMode,
    Top,
    Type,
    TypeEnv,
    Var,
    alpha_eq,
    env_well_formed,
    free_vars,
)

_logger = logging.getLogger(__name__)


class _OutOfFuel(Exception):
    pass


class Fuel:
    """
    Budget of rule-node expansions for a single query.

    Attributes
    ----------
    remaining : int
        Expansions still allowed.
    """

    def __init__(self, remaining: int):
        if remaining < 0:
            raise ValueError("fuel must be nonnegative")
        self.remaining = remaining

    def __repr__(self) -> str:
        return f"Fuel({self.remaining})"

    def spend(self):
        if self.remaining <= 0:
            raise _OutOfFuel
        self.remaining -= 1


@dataclass(frozen=True)
class Derivable:
    derivation: Derivation
    label: ClassVar[str] = "derivable"
    exit_code: ClassVar[int] = 0

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class NotDerivable:
    label: ClassVar[str] = "not-derivable"
    exit_code: ClassVar[int] = 1

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class FuelExhausted:
    label: ClassVar[str] = "fuel-exhausted"
    exit_code: ClassVar[int] = 2

    def __str__(self) -> str:
        return self.label


CheckOutcome: TypeAlias = Derivable | NotDerivable | FuelExhausted


class _Search:
    """Priority-ordered backtracking search over one rule system."""

    def __init__(self, system: SystemId, mode: ScopeMode, fuel: Fuel):
        self.variant = system is not SystemId.ORIGINAL
        self.strict = mode is ScopeMode.STRICT
        self.fuel = fuel

    def derive(self, env: TypeEnv, s: Type, t: Type) -> Derivation | None:
        self.fuel.spend()

        if isinstance(t, Top) and (not self.strict or free_vars(s) <= env.names):
            return leaf(Rule.TOP, env, s, t)

        match s, t:
            case Var(x), _:
                return self._variable(env, s, t, x)
            case Arrow(), Arrow():
                dom = self.derive(env, t.dom, s.dom)
                if dom is None:
                    return None
                cod = self.derive(env, s.cod, t.cod)
                if cod is None:
                    return None
                return node(Rule.ARROW, env, s, t, dom, cod)
            case Forall(), Forall():
                z = choose_binder(env, s, t)
                bound = self.derive(env, t.bound, s.bound)
                if bound is None:
                    return None
                body = self.derive(env.extend(z, t.bound), open_forall(s, z), open_forall(t, z))
                if body is None:
                    return None
                return node(Rule.ALL, env, s, t, bound, body)
        return None

    def _variable(self, env: TypeEnv, s: Var, t: Type, x: str) -> Derivation | None:
        if s == t and (not self.strict or x in env):
            return leaf(Rule.REFL_TVAR, env, s, t)
        bound = env.lookup(x)
        if bound is None:
            return None
        if not self.variant:
            rest = self.derive(env, bound, t)
            return None if rest is None else node(Rule.TRANS_TVAR, env, s, t, rest)
        if alpha_eq(bound, t):
            return leaf(Rule.HYP, env, s, t)
        first = self.derive(env, s, bound)
        if first is None:
            return None
        rest = self.derive(env, bound, t)
        return None if rest is None else node(Rule.TR_TVAR, env, s, t, first, rest)


def check(
    system: SystemId,
    mode: ScopeMode,
    env: TypeEnv,
    s: Type,
    t: Type,
    fuel: Fuel | int | None = None,
) -> CheckOutcome:
    """
    Decide ``env ⊢ s <: t`` in a rule system, producing a derivation.

    Parameters
    ----------
    system : SystemId
        ``ORIGINAL`` or ``VARIANT``; ``VARIANT_PLUS`` searches like ``VARIANT``.
    mode : ScopeMode
        Whether scoping provisos apply.
    env : TypeEnv
        The type environment.
    s, t : Type
        Left and right sides.
    fuel : Fuel | int, optional
        Expansion budget. Defaults to the configured fuel.

    Returns
    -------
    CheckOutcome
        ``Derivable`` with the first derivation in rule priority order,
        ``NotDerivable`` when every applicable rule fails, or
        ``FuelExhausted`` when the budget runs out first.

    Raises
    ------
    IllFormedEnvError
        In strict mode, when the environment is not prefix-scoped.
    UnknownVariableError
        In strict mode, when an endpoint mentions unbound variables and the
        query is not derivable.
    """
    if fuel is None:
        fuel = settings.fuel
    if isinstance(fuel, int):
        fuel = Fuel(fuel)
    if mode is ScopeMode.STRICT and not env_well_formed(env, mode):
        raise errors.IllFormedEnvError(f"environment '{env}' is not well-scoped")

    search = _Search(system, mode, fuel)
    try:
        d = search.derive(env, s, t)
    except _OutOfFuel:
        _logger.debug(f"fuel exhausted on {s} <: {t}")
        return FuelExhausted()
    except RecursionError:
        # Search depth tracks fuel; the interpreter stack is the tighter limit here.
        _logger.debug(f"recursion limit reached on {s} <: {t} with {fuel.remaining} fuel left")
        return FuelExhausted()

    if d is not None:
        return Derivable(d)
    if mode is ScopeMode.STRICT:
        unbound = (free_vars(s) | free_vars(t)) - env.names
        if unbound:
            raise errors.UnknownVariableError(unbound)
    return NotDerivable()
