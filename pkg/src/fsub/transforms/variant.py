"""
Transitivity, narrowing and extra-rule admissibility for the variant system.

Because SA-Tr-TVar builds transitivity into the variable case, transitivity
here recurses on the cut type alone. Narrowing does not use transitivity at
all: it is the admissibility of SA-Extra applied to the derivation
``X <: P <: Q`` and the derivation being narrowed.
"""

from __future__ import annotations

import logging

from fsub import errors
from fsub.rules import Derivation, Rule, SystemId, choose_binder, leaf, node
from fsub.syntax import Binding, ScopeMode, TypeEnv, Var, env_equiv, size
from fsub.transforms.core import (
    Audit,
    EnvSplit,
    Rebuild,
    confirm,
    is_pivot,
    require_cut,
    require_env,
    require_split,
    require_valid,
    transport,
)

_logger = logging.getLogger(__name__)

SYSTEM = SystemId.VARIANT


def transitivity_variant(
    d1: Derivation, d2: Derivation, mode: ScopeMode, audit: Audit | None = None
) -> Derivation:
    """
    Compose ``Γ ⊢ S <: Q`` and ``Γ ⊢ Q <: T`` in the variant system.

    When ``d1`` has a variable on the left the result is the single node
    ``SA-Tr-TVar(d1, d2)``; no subderivation of ``d1`` is visited.

    Raises
    ------
    JudgmentMismatchError
        If the environments or the cut types differ.
    InvalidInputError
        If either input fails validation.
    """
    require_valid("transitivity_variant", d1, SYSTEM, mode)
    require_valid("transitivity_variant", d2, SYSTEM, mode)
    require_cut(d1, d2)
    out = _trans(d1, d2, audit or Audit())
    return confirm("transitivity_variant", out, SYSTEM, mode)


def narrowing_variant(
    split: EnvSplit,
    d: Derivation,
    dP: Derivation,
    mode: ScopeMode,
    audit: Audit | None = None,
) -> Derivation:
    """
    Replace the pivot bound ``Q`` by ``P`` in a variant derivation.

    Parameters
    ----------
    split : EnvSplit
        ``Γ1, X <: Q, Γ2``, which must be ``d``'s environment.
    d : Derivation
        Valid variant derivation of ``Γ1, X <: Q, Γ2 ⊢ M <: N``.
    dP : Derivation
        Valid variant derivation of ``Γ1 ⊢ P <: Q``.
    mode : ScopeMode
    audit : Audit, optional

    Returns
    -------
    Derivation
        A valid variant derivation of ``Γ1, X <: P, Γ2 ⊢ M <: N``.
    """
    require_valid("narrowing_variant", d, SYSTEM, mode)
    require_valid("narrowing_variant", dP, SYSTEM, mode)
    require_split(split, d, dP)
    out = _narrow(split, d, dP, audit or Audit())
    return confirm("narrowing_variant", out, SYSTEM, mode)


def extra_rule_admissible(
    d_xv: Derivation, d_mn: Derivation, mode: ScopeMode, audit: Audit | None = None
) -> Derivation:
    """
    Discharge one use of SA-Extra.

    Parameters
    ----------
    d_xv : Derivation
        Valid variant derivation of ``Γ1, X <: U, Γ2 ⊢ X <: V``.
    d_mn : Derivation
        Valid variant derivation of ``Γ1, X <: V, Γ2 ⊢ M <: N``.
    mode : ScopeMode
    audit : Audit, optional

    Returns
    -------
    Derivation
        A variant derivation of ``Γ1, X <: U, Γ2 ⊢ M <: N`` with no SA-Extra
        node. Every SA-Hyp on ``X`` in ``d_mn`` is replaced by ``d_xv``,
        weakened to the environment at that point.
    """
    require_valid("extra_rule_admissible", d_xv, SYSTEM, mode)
    require_valid("extra_rule_admissible", d_mn, SYSTEM, mode)
    if not isinstance(d_xv.left, Var) or d_xv.left.name not in d_xv.env:
        raise errors.JudgmentMismatchError(f"{d_xv.left} is not a bound variable")
    expected = d_xv.env.with_bound(d_xv.left.name, d_xv.right)
    require_env("extra_rule_admissible", d_mn, expected)
    out = splice_extra(d_xv, d_mn, audit or Audit())
    return confirm("extra_rule_admissible", out, SYSTEM, mode)


def _trans(d1: Derivation, d2: Derivation, audit: Audit) -> Derivation:
    env = d1.env
    s, q, t = d1.left, d1.right, d2.right
    with audit.frame("transitivity_variant", (size(q),)) as frame:
        if d1.rule is Rule.REFL_TVAR:
            frame.case = "reflexive"
            return d2
        if isinstance(s, Var):
            frame.case = "variable"
            return node(Rule.TR_TVAR, env, s, t, d1, d2)
        frame.case = d1.rule.value
        if d1.rule is Rule.TOP or d2.rule is Rule.TOP:
            return leaf(Rule.TOP, env, s, t)
        match d1.rule, d2.rule:
            case Rule.ARROW, Rule.ARROW:
                a_dom, a_cod = d1.premises
                b_dom, b_cod = d2.premises
                return node(
                    Rule.ARROW,
                    env,
                    s,
                    t,
                    _trans(b_dom, a_dom, audit),
                    _trans(a_cod, b_cod, audit),
                )
            case Rule.ALL, Rule.ALL:
                a_bound, a_body = d1.premises
                b_bound, b_body = d2.premises
                z = choose_binder(env, s, t, d1.names, d2.names)
                bound = _trans(b_bound, a_bound, audit)
                a_body = transport(a_body, env.extend(z, q.bound), {a_body.env.entries[-1].name: z})
                split = EnvSplit(env, Binding(z, q.bound), TypeEnv())
                a_body = _narrow(split, a_body, b_bound, audit)
                b_body = transport(b_body, a_body.env, {b_body.env.entries[-1].name: z})
                return node(Rule.ALL, env, s, t, bound, _trans(a_body, b_body, audit))
    raise errors.JudgmentMismatchError(f"cannot compose {d1.rule} with {d2.rule}")


def _narrow(split: EnvSplit, d: Derivation, dP: Derivation, audit: Audit) -> Derivation:
    with audit.frame("narrowing_variant"):
        target = split.rebound(dP.left)
        x = Var(split.name)
        # X <: P <: Q under the narrowed environment
        d_xv = node(
            Rule.TR_TVAR,
            target,
            x,
            split.pivot.bound,
            leaf(Rule.HYP, target, x, dP.left),
            transport(dP, target),
        )
        return splice_extra(d_xv, d, audit)


def splice_extra(d_xv: Derivation, d_mn: Derivation, audit: Audit) -> Derivation:
    """Unchecked extra-rule elimination for a single pivot."""
    with audit.frame("extra_rule_admissible"):
        return _Splice(d_xv)(d_mn, d_xv.env)


class _Splice(Rebuild):
    def __init__(self, d_xv: Derivation):
        self.d_xv = d_xv
        self.pivot = d_xv.left.name

    def visit_hyp(self, d, env, ren, left, right) -> Derivation:
        if not is_pivot(left, self.pivot):
            return leaf(Rule.HYP, env, left, right)
        if env_equiv(env, self.d_xv.env):
            return self.d_xv
        return transport(self.d_xv, env)

    def visit_extra(self, d, env, ren, left, right) -> Derivation:
        raise errors.JudgmentMismatchError("derivation already uses SA-Extra")

