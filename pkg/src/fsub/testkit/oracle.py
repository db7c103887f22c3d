"""
Brute-force derivation search used as ground truth for the checker.

Unlike the checker, the oracle applies every rule that fits and, for the
variant's SA-Tr-TVar, tries every intermediate type in the subterm closure
of the environment bounds and both endpoints.
"""

from __future__ import annotations

import itertools
import logging

from fsub import errors
from fsub._settings import settings
from fsub.rules import Derivation, Rule, SystemId, choose_binder, leaf, node, open_forall
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
    subterms,
    well_scoped_type,
)

_logger = logging.getLogger(__name__)


def candidates(env: TypeEnv, s: Type, t: Type) -> list[Type]:
    """Subterm closure of the bounds of ``env``, ``s`` and ``t``, up to alpha-equivalence."""
    out: list[Type] = []
    roots = [entry.bound for entry in env] + [s, t]
    for root in roots:
        for sub in subterms(root):
            if not any(alpha_eq(sub, seen) for seen in out):
                out.append(sub)
    return out


class _Oracle:
    def __init__(self, system: SystemId, mode: ScopeMode):
        self.rules = system.rules
        self.strict = mode is ScopeMode.STRICT
        self.mode = mode
        self._all: dict = {}
        self._first: dict = {}

    def all(self, env: TypeEnv, s: Type, t: Type, depth: int) -> tuple[Derivation, ...]:
        key = (env, s, t, depth)
        if key not in self._all:
            self._all[key] = tuple(self._expand(env, s, t, depth, self.all))
        return self._all[key]

    def first(self, env: TypeEnv, s: Type, t: Type, depth: int) -> Derivation | None:
        key = (env, s, t, depth)
        if key not in self._first:
            found = next(self._expand(env, s, t, depth, self._first_as_tuple), None)
            self._first[key] = found
        return self._first[key]

    def _first_as_tuple(self, env, s, t, depth) -> tuple[Derivation, ...]:
        d = self.first(env, s, t, depth)
        return () if d is None else (d,)

    def _expand(self, env, s, t, depth, sub):
        """Derivations of ``env ⊢ s <: t`` in canonical order, premises drawn from ``sub``."""
        if depth < 1:
            return
        below = depth - 1
        for rule in self.rules:
            match rule:
                case Rule.TOP:
                    if isinstance(t, Top) and (not self.strict or well_scoped_type(s, env)):
                        yield leaf(rule, env, s, t)
                case Rule.REFL_TVAR:
                    if isinstance(s, Var) and s == t and (not self.strict or s.name in env):
                        yield leaf(rule, env, s, t)
                case Rule.TRANS_TVAR:
                    bound = env.lookup(s.name) if isinstance(s, Var) else None
                    if bound is not None:
                        for p in sub(env, bound, t, below):
                            yield node(rule, env, s, t, p)
                case Rule.HYP:
                    bound = env.lookup(s.name) if isinstance(s, Var) else None
                    if bound is not None and alpha_eq(bound, t):
                        yield leaf(rule, env, s, t)
                case Rule.TR_TVAR:
                    if isinstance(s, Var) and (not self.strict or s.name in env):
                        for u in candidates(env, s, t):
                            for p1 in sub(env, s, u, below):
                                for p2 in sub(env, u, t, below):
                                    yield node(rule, env, s, t, p1, p2)
                case Rule.ARROW:
                    if isinstance(s, Arrow) and isinstance(t, Arrow):
                        doms = sub(env, t.dom, s.dom, below)
                        if doms:
                            for p1, p2 in itertools.product(doms, sub(env, s.cod, t.cod, below)):
                                yield node(rule, env, s, t, p1, p2)
                case Rule.ALL:
                    if isinstance(s, Forall) and isinstance(t, Forall):
                        z = choose_binder(env, s, t)
                        bounds = sub(env, t.bound, s.bound, below)
                        if bounds:
                            inner = env.extend(z, t.bound)
                            bodies = sub(inner, open_forall(s, z), open_forall(t, z), below)
                            for p1, p2 in itertools.product(bounds, bodies):
                                yield node(rule, env, s, t, p1, p2)
                case Rule.EXTRA:
                    yield from self._extra(env, s, t, below, sub)

    def _extra(self, env, s, t, below, sub):
        for entry in env:
            x = Var(entry.name)
            for v in candidates(env, s, t):
                narrowed = env.with_bound(entry.name, v)
                if not env_well_formed(narrowed, self.mode):
                    continue
                for p1 in sub(env, x, v, below):
                    for p2 in sub(narrowed, s, t, below):
                        yield node(Rule.EXTRA, env, s, t, p1, p2)


def _guard(depth: int):
    if depth < 1:
        raise ValueError("depth must be positive")
    limit = settings.oracle_depth_limit
    if depth > limit:
        raise errors.DepthGuardError(depth, limit)


def enumerate_oracle(
    system: SystemId, mode: ScopeMode, env: TypeEnv, s: Type, t: Type, depth: int
) -> list[Derivation]:
    """
    Every valid derivation of ``env ⊢ s <: t`` of height at most ``depth``.

    Parameters
    ----------
    system : SystemId
    mode : ScopeMode
    env : TypeEnv
    s, t : Type
    depth : int
        Height bound, at most the configured ``oracle_depth_limit``.

    Returns
    -------
    list[Derivation]
        Ordered by rule tag priority, then premise by premise.

    Raises
    ------
    DepthGuardError
        If ``depth`` exceeds the configured guardrail.
    """
    _guard(depth)
    found = list(_Oracle(system, mode).all(env, s, t, depth))
    _logger.debug(f"oracle found {len(found)} derivation(s) of {s} <: {t} at depth {depth}")
    return found


def oracle_derivable(
    system: SystemId, mode: ScopeMode, env: TypeEnv, s: Type, t: Type, depth: int
) -> Derivation | None:
    """First derivation :func:`enumerate_oracle` would list, or None."""
    _guard(depth)
    return _Oracle(system, mode).first(env, s, t, depth)
