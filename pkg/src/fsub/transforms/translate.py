"""
Translations between the rule systems and from lax to strict scoping.
"""

from __future__ import annotations

import logging

from fsub import errors
from fsub.rules import Derivation, Rule, SystemId, leaf, node, validate_derivation
from fsub.syntax import ScopeMode, alpha_eq, env_well_formed, well_scoped_type
from fsub.transforms import original, variant
from fsub.transforms.core import Audit, Rebuild, confirm, refl_derivation, require_valid

_logger = logging.getLogger(__name__)


class _ToVariant(Rebuild):
    def visit_trans_tvar(self, d, env, ren, left, right) -> Derivation:
        (rest,) = d.premises
        rest = self(rest, env, ren)
        hyp = leaf(Rule.HYP, env, left, rest.left)
        return node(Rule.TR_TVAR, env, left, right, hyp, rest)


def orig_to_variant(d: Derivation, mode: ScopeMode) -> Derivation:
    """
    Translate an original-system derivation into the variant system.

    Each SA-Trans-TVar node becomes ``SA-Tr-TVar(SA-Hyp, premise)``; every
    other node keeps its rule.
    """
    require_valid("orig_to_variant", d, SystemId.ORIGINAL, mode)
    out = _ToVariant()(d, d.env)
    return confirm("orig_to_variant", out, SystemId.VARIANT, mode)


class _ToOriginal(Rebuild):
    def __init__(self, mode: ScopeMode):
        self.mode = mode
        self.audit = Audit()

    def visit_hyp(self, d, env, ren, left, right) -> Derivation:
        if self.mode is ScopeMode.STRICT and not well_scoped_type(right, env):
            raise errors.NotWellScopedError(f"bound {right} of {left} is not well-scoped")
        return node(Rule.TRANS_TVAR, env, left, right, refl_derivation(env, right))

    def visit_tr_tvar(self, d, env, ren, left, right) -> Derivation:
        first, rest = d.premises
        return original.compose_original(self(first, env, ren), self(rest, env, ren), self.audit)


def variant_to_orig(d: Derivation, mode: ScopeMode) -> Derivation:
    """
    Translate a variant derivation into the original system.

    SA-Hyp on ``X <: T`` becomes SA-Trans-TVar over a reflexivity
    derivation of ``T``, and SA-Tr-TVar is eliminated by original-system
    transitivity.

    Raises
    ------
    NotWellScopedError
        In strict mode, if a bound used by SA-Hyp is not well-scoped.
    """
    require_valid("variant_to_orig", d, SystemId.VARIANT, mode)
    out = _ToOriginal(mode)(d, d.env)
    return confirm("variant_to_orig", out, SystemId.ORIGINAL, mode)


def lax_to_strict(d: Derivation, system: SystemId) -> Derivation:
    """
    Certify that a lax derivation is also a strict one.

    The tree is returned unchanged once every node passes strict validation.

    Raises
    ------
    ScopeViolationError
        Naming the root when the environment or endpoints are not
        well-scoped, or the first node whose strict proviso fails.
    """
    require_valid("lax_to_strict", d, system, ScopeMode.LAX)
    if not env_well_formed(d.env, ScopeMode.STRICT):
        raise errors.ScopeViolationError((), f"environment '{d.env}' is not well-formed")
    for side in (d.left, d.right):
        if not well_scoped_type(side, d.env):
            raise errors.ScopeViolationError((), f"{side} is not well-scoped")
    report = validate_derivation(d, system, ScopeMode.STRICT)
    if not report.ok:
        path, reason = report.failures[0]
        raise errors.ScopeViolationError(path, reason)
    _logger.debug(f"{d.node_count} node(s) transferred to strict scoping")
    return d


class _Eliminate(Rebuild):
    def __init__(self, audit: Audit):
        self.audit = audit

    def visit_extra(self, d, env, ren, left, right) -> Derivation:
        first, second = d.premises
        d_xv = self(first, env, ren)
        narrowed = env.with_bound(d_xv.left.name, d_xv.right)
        d_mn = self(second, narrowed, ren)
        if not alpha_eq(d_mn.left, left) or not alpha_eq(d_mn.right, right):
            raise errors.JudgmentMismatchError("SA-Extra premise does not match its conclusion")
        return variant.splice_extra(d_xv, d_mn, self.audit)


def eliminate_extra(d: Derivation, mode: ScopeMode, audit: Audit | None = None) -> Derivation:
    """
    Rewrite a variant-plus derivation into the plain variant system.

    Each SA-Extra node is removed bottom up by
    :func:`~fsub.transforms.variant.extra_rule_admissible`.
    """
    require_valid("eliminate_extra", d, SystemId.VARIANT_PLUS, mode)
    out = _Eliminate(audit or Audit())(d, d.env)
    return confirm("eliminate_extra", out, SystemId.VARIANT, mode)
