"""
Transitivity and narrowing for the original rule system.

The two constructions are mutually recursive. Transitivity recurses on the
structure of the cut type and, at a fixed cut type, on the height of its
first derivation; narrowing calls transitivity at the narrowed bound.
Both record their calls in an :class:`~fsub.transforms.core.Audit` so the
lexicographic measure ``(size of cut, transitivity before narrowing,
height)`` can be checked as the construction runs.
"""

from __future__ import annotations

import logging

from fsub import errors
from fsub.rules import Derivation, Rule, SystemId, choose_binder, leaf, node
from fsub.syntax import Binding, ScopeMode, TypeEnv, size
from fsub.transforms.core import (
    Audit,
    EnvSplit,
    Rebuild,
    confirm,
    is_pivot,
    require_cut,
    require_split,
    require_valid,
    transport,
)

_logger = logging.getLogger(__name__)

SYSTEM = SystemId.ORIGINAL


def transitivity_original(
    d1: Derivation, d2: Derivation, mode: ScopeMode, audit: Audit | None = None
) -> Derivation:
    """
    Compose ``Γ ⊢ S <: Q`` and ``Γ ⊢ Q <: T`` into ``Γ ⊢ S <: T``.

    Parameters
    ----------
    d1, d2 : Derivation
        Valid original-system derivations sharing the environment and an
        alpha-equal cut type ``Q``.
    mode : ScopeMode
        Scope mode both inputs are valid in.
    audit : Audit, optional
        Receives one frame per recursive call.

    Returns
    -------
    Derivation
        A valid original-system derivation of ``Γ ⊢ S <: T``.

    Raises
    ------
    JudgmentMismatchError
        If the environments or the cut types differ.
    InvalidInputError
        If either input fails validation.
    """
    require_valid("transitivity_original", d1, SYSTEM, mode)
    require_valid("transitivity_original", d2, SYSTEM, mode)
    require_cut(d1, d2)
    out = compose_original(d1, d2, audit or Audit())
    return confirm("transitivity_original", out, SYSTEM, mode)


def narrowing_original(
    split: EnvSplit,
    d: Derivation,
    dP: Derivation,
    mode: ScopeMode,
    audit: Audit | None = None,
) -> Derivation:
    """
    Replace the pivot bound ``Q`` of ``d``'s environment by ``P``.

    Parameters
    ----------
    split : EnvSplit
        ``Γ1, X <: Q, Γ2``, which must be ``d``'s environment.
    d : Derivation
        Valid original-system derivation of ``Γ1, X <: Q, Γ2 ⊢ M <: N``.
    dP : Derivation
        Valid original-system derivation of ``Γ1 ⊢ P <: Q``.
    mode : ScopeMode
    audit : Audit, optional

    Returns
    -------
    Derivation
        A valid derivation of ``Γ1, X <: P, Γ2 ⊢ M <: N``.
    """
    require_valid("narrowing_original", d, SYSTEM, mode)
    require_valid("narrowing_original", dP, SYSTEM, mode)
    require_split(split, d, dP)
    out = _narrow(split, d, dP, audit or Audit())
    return confirm("narrowing_original", out, SYSTEM, mode)


def compose_original(d1: Derivation, d2: Derivation, audit: Audit) -> Derivation:
    """Unchecked transitivity; callers guarantee a shared environment and cut."""
    q = d1.right
    env = d1.env
    s, t = d1.left, d2.right
    with audit.frame("transitivity_original", (size(q), 0, d1.height)) as frame:
        frame.case = d1.rule.value
        match d1.rule:
            case Rule.TOP:
                # Only SA-Top concludes Top on the left
                return leaf(Rule.TOP, env, s, t)
            case Rule.REFL_TVAR:
                return d2
            case Rule.TRANS_TVAR:
                (rest,) = d1.premises
                return node(Rule.TRANS_TVAR, env, s, t, compose_original(rest, d2, audit))
        if d2.rule is Rule.TOP:
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
                    compose_original(b_dom, a_dom, audit),
                    compose_original(a_cod, b_cod, audit),
                )
            case Rule.ALL, Rule.ALL:
                return _trans_all(d1, d2, audit)
    raise errors.JudgmentMismatchError(f"cannot compose {d1.rule} with {d2.rule}")


def _trans_all(d1: Derivation, d2: Derivation, audit: Audit) -> Derivation:
    env = d1.env
    s, q, t = d1.left, d1.right, d2.right
    a_bound, a_body = d1.premises
    b_bound, b_body = d2.premises
    z = choose_binder(env, s, t, d1.names, d2.names)

    bound = compose_original(b_bound, a_bound, audit)

    # Body of d1 lives under Z <: Q1; move it under Z <: T1 before composing
    under_q = env.extend(z, q.bound)
    a_body = transport(a_body, under_q, {a_body.env.entries[-1].name: z})
    split = EnvSplit(env, Binding(z, q.bound), TypeEnv())
    a_body = _narrow(split, a_body, b_bound, audit)
    b_body = transport(b_body, a_body.env, {b_body.env.entries[-1].name: z})

    return node(Rule.ALL, env, s, t, bound, compose_original(a_body, b_body, audit))


def _narrow(split: EnvSplit, d: Derivation, dP: Derivation, audit: Audit) -> Derivation:
    with audit.frame("narrowing_original", (size(split.pivot.bound), 1, d.height)):
        target = split.rebound(dP.left)
        return _Narrow(split.name, dP, audit)(d, target)


class _Narrow(Rebuild):
    def __init__(self, pivot: str, dP: Derivation, audit: Audit):
        self.pivot = pivot
        self.dP = dP
        self.audit = audit

    def visit_trans_tvar(self, d, env, ren, left, right) -> Derivation:
        (rest,) = d.premises
        rest = self(rest, env, ren)
        if not is_pivot(left, self.pivot):
            return node(Rule.TRANS_TVAR, env, left, right, rest)
        # X <: P <: Q <: right
        composed = compose_original(transport(self.dP, env), rest, self.audit)
        return node(Rule.TRANS_TVAR, env, left, right, composed)
