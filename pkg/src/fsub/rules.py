"""
This module implements subtyping judgments, the rule systems that derive
them, explicit derivation trees, node-level rule checking, and the
s-expression format derivations are stored in.

Environment membership (``X <: U`` appearing in Γ) is a side condition on
:class:`~fsub.syntax.Binding` entries and never a :class:`Judgment`. The
variant system's SA-Hyp rule is the one place where the two meet.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from fsub import errors
from fsub.syntax import (
    TOP,
    Arrow,
    Binding,
    Forall,
    ScopeMode,
    Top,
    Type,
    TypeEnv,
    TyVarName,
    Var,
    alpha_eq,
    all_names,
    check_name,
    env_equiv,
    env_well_formed,
    free_vars,
    fresh_name,
    render_env,
    render_type,
    rename,
    well_scoped_type,
)

_logger = logging.getLogger(__name__)


class Rule(str, Enum):
    """Rule tags, in canonical order."""

    TOP = "SA-Top"
    REFL_TVAR = "SA-Refl-TVar"
    TRANS_TVAR = "SA-Trans-TVar"
    ARROW = "SA-Arrow"
    ALL = "SA-All"
    HYP = "SA-Hyp"
    TR_TVAR = "SA-Tr-TVar"
    EXTRA = "SA-Extra"

    def __str__(self) -> str:
        return self.value

    @property
    def arity(self) -> int:
        return ARITY[self]


#: Number of premises of each rule.
ARITY: dict[Rule, int] = {
    Rule.TOP: 0,
    Rule.REFL_TVAR: 0,
    Rule.HYP: 0,
    Rule.TRANS_TVAR: 1,
    Rule.ARROW: 2,
    Rule.ALL: 2,
    Rule.TR_TVAR: 2,
    Rule.EXTRA: 2,
}


class SystemId(Enum):
    """The rule systems a derivation can be checked against."""

    ORIGINAL = "original"
    VARIANT = "variant"
    VARIANT_PLUS = "variant-plus"

    def __str__(self) -> str:
        return self.value

    @property
    def rules(self) -> tuple[Rule, ...]:
        return SYSTEM_RULES[self]


#: Rules admitted by each system, in dispatch priority order.
SYSTEM_RULES: dict[SystemId, tuple[Rule, ...]] = {
    SystemId.ORIGINAL: (
        Rule.TOP,
        Rule.REFL_TVAR,
        Rule.TRANS_TVAR,
        Rule.ARROW,
        Rule.ALL,
    ),
    SystemId.VARIANT: (
        Rule.TOP,
        Rule.REFL_TVAR,
        Rule.HYP,
        Rule.TR_TVAR,
        Rule.ARROW,
        Rule.ALL,
    ),
    SystemId.VARIANT_PLUS: (
        Rule.TOP,
        Rule.REFL_TVAR,
        Rule.HYP,
        Rule.TR_TVAR,
        Rule.ARROW,
        Rule.ALL,
        Rule.EXTRA,
    ),
}


@dataclass(frozen=True)
class Judgment:
    """``env ⊢ left <: right``."""

    env: TypeEnv
    left: Type
    right: Type

    def __str__(self) -> str:
        env = render_env(self.env)
        return f"{env} |- {render_type(self.left)} <: {render_type(self.right)}".lstrip()

    def equiv(self, other: Judgment) -> bool:
        """Identical environment names and order; alpha-equal bounds and types."""
        return (
            env_equiv(self.env, other.env)
            and alpha_eq(self.left, other.left)
            and alpha_eq(self.right, other.right)
        )


@dataclass(frozen=True)
class Derivation:
    """
    A rule-labelled tree of judgments.

    Attributes
    ----------
    rule : Rule
        The rule applied at the root.
    conclusion : Judgment
        The judgment the root establishes.
    premises : tuple[Derivation, ...]
        Subderivations, contravariant premise first for SA-Arrow and SA-All.

    Raises
    ------
    ArityError
        If the number of premises does not match the rule.
    """

    rule: Rule
    conclusion: Judgment
    premises: tuple[Derivation, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        object.__setattr__(self, "premises", tuple(self.premises))
        if len(self.premises) != self.rule.arity:
            raise errors.ArityError(self.rule, self.rule.arity, len(self.premises))

    def __str__(self) -> str:
        return render_derivation(self)

    @property
    def env(self) -> TypeEnv:
        return self.conclusion.env

    @property
    def left(self) -> Type:
        return self.conclusion.left

    @property
    def right(self) -> Type:
        return self.conclusion.right

    @cached_property
    def height(self) -> int:
        return 1 + max((p.height for p in self.premises), default=0)

    @cached_property
    def node_count(self) -> int:
        return 1 + sum(p.node_count for p in self.premises)

    @cached_property
    def names(self) -> frozenset[TyVarName]:
        """Every variable name mentioned anywhere in the tree."""
        names = set(self.env.vocabulary)
        names |= all_names(self.left) | all_names(self.right)
        for entry in self.env.entries:
            names |= all_names(entry.bound)
        for premise in self.premises:
            names |= premise.names
        return frozenset(names)

    def nodes(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Derivation]]:
        """Pre-order traversal yielding ``(path, node)`` pairs."""
        yield path, self
        for i, premise in enumerate(self.premises):
            yield from premise.nodes((*path, i))

    def tags(self) -> set[Rule]:
        return {nd.rule for _, nd in self.nodes()}

    def subtree(self, path: Iterable[int]) -> Derivation:
        current = self
        for i in path:
            current = current.premises[i]
        return current


def leaf(rule: Rule, env: TypeEnv, left: Type, right: Type) -> Derivation:
    return Derivation(rule, Judgment(env, left, right))


def node(rule: Rule, env: TypeEnv, left: Type, right: Type, *premises: Derivation) -> Derivation:
    return Derivation(rule, Judgment(env, left, right), premises)


def choose_binder(env: TypeEnv, left: Type, right: Type, *avoid: Iterable[TyVarName]) -> TyVarName:
    """
    Deterministic common binder for an SA-All instance.

    The name avoids the environment vocabulary, the free variables of both
    endpoints, and any extra names given.
    """
    taken = set(env.vocabulary) | free_vars(left) | free_vars(right)
    for names in avoid:
        taken |= set(names)
    return fresh_name(taken)


def open_forall(t: Forall, name: TyVarName) -> Type:
    """Body of ``t`` with its binder renamed to ``name``."""
    return rename(t.body, {t.binder: name})


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    """
    Outcome of checking a derivation node by node.

    Attributes
    ----------
    failures : list[tuple[tuple[int, ...], str]]
        Offending nodes as (path of premise indices, reason).
    """

    failures: list[tuple[tuple[int, ...], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        lines = []
        for path, reason in self.failures:
            where = "/".join(str(i) for i in path) or "root"
            lines.append(f"{where}: {reason}")
        return "\n".join(lines)


def validate_derivation(d: Derivation, system: SystemId, mode: ScopeMode) -> ValidationReport:
    """
    Check every node of a derivation against a rule system.

    Parameters
    ----------
    d : Derivation
        The derivation to check.
    system : SystemId
        Which rules are admitted.
    mode : ScopeMode
        Whether scoping provisos are enforced.

    Returns
    -------
    ValidationReport
        All failing nodes; failures are reported, never raised.
    """
    report = ValidationReport()
    for path, nd in d.nodes():
        for reason in _check_node(nd, system, mode):
            report.failures.append((path, reason))
    if not report.ok:
        _logger.debug(f"{len(report.failures)} failing node(s) under {system}/{mode}")
    return report


def _check_node(d: Derivation, system: SystemId, mode: ScopeMode) -> list[str]:
    if d.rule not in system.rules:
        return ["rule not in system"]
    reasons = []
    if mode is ScopeMode.STRICT and not env_well_formed(d.env, mode):
        reasons.append("environment not well-formed")
    reasons.extend(_CHECKS[d.rule](d, mode))
    return reasons


def _premise_is(p: Derivation, env: TypeEnv, left: Type, right: Type) -> bool:
    return p.conclusion.equiv(Judgment(env, left, right))


def _check_top(d: Derivation, mode: ScopeMode) -> list[str]:
    reasons = []
    if not isinstance(d.right, Top):
        reasons.append("right is not Top")
    if mode is ScopeMode.STRICT and not well_scoped_type(d.left, d.env):
        reasons.append("left not well-scoped")
    return reasons


def _check_refl(d: Derivation, mode: ScopeMode) -> list[str]:
    if not (isinstance(d.left, Var) and d.left == d.right):
        return ["left and right are not the same variable"]
    if mode is ScopeMode.STRICT and d.left.name not in d.env:
        return [f"{d.left.name} not bound"]
    return []


def _check_trans_tvar(d: Derivation, mode: ScopeMode) -> list[str]:
    if not isinstance(d.left, Var):
        return ["left is not a variable"]
    bound = d.env.lookup(d.left.name)
    if bound is None:
        return [f"{d.left.name} not bound"]
    if not _premise_is(d.premises[0], d.env, bound, d.right):
        return ["premise does not conclude the declared bound below the right side"]
    return []


def _check_arrow(d: Derivation, mode: ScopeMode) -> list[str]:
    if not (isinstance(d.left, Arrow) and isinstance(d.right, Arrow)):
        return ["sides are not both arrows"]
    s, t = d.left, d.right
    reasons = []
    if not _premise_is(d.premises[0], d.env, t.dom, s.dom):
        reasons.append("domain premise mismatch")
    if not _premise_is(d.premises[1], d.env, s.cod, t.cod):
        reasons.append("codomain premise mismatch")
    return reasons


def _check_all(d: Derivation, mode: ScopeMode) -> list[str]:
    if not (isinstance(d.left, Forall) and isinstance(d.right, Forall)):
        return ["sides are not both universals"]
    s, t = d.left, d.right
    reasons = []
    if not _premise_is(d.premises[0], d.env, t.bound, s.bound):
        reasons.append("bound premise mismatch")
    body = d.premises[1]
    entries = body.env.entries
    if len(entries) != len(d.env) + 1:
        return [*reasons, "body premise must extend the environment by one binding"]
    z = entries[-1].name
    taken = d.env.vocabulary | free_vars(s) | free_vars(t)
    if z in taken:
        reasons.append(f"binder {z} is not fresh")
        return reasons
    expected = d.env.extend(z, t.bound)
    if not _premise_is(body, expected, open_forall(s, z), open_forall(t, z)):
        reasons.append("body premise mismatch")
    return reasons


def _check_hyp(d: Derivation, mode: ScopeMode) -> list[str]:
    if not isinstance(d.left, Var):
        return ["left is not a variable"]
    bound = d.env.lookup(d.left.name)
    if bound is None or not alpha_eq(bound, d.right):
        return [f"{d.left.name} <: {render_type(d.right)} is not in the environment"]
    return []


def _check_tr_tvar(d: Derivation, mode: ScopeMode) -> list[str]:
    if not isinstance(d.left, Var):
        return ["left is not a variable"]
    first, second = d.premises
    if not _premise_is(first, d.env, d.left, first.right):
        return ["first premise must conclude the variable below an intermediate type"]
    if not _premise_is(second, d.env, first.right, d.right):
        return ["second premise must conclude the intermediate type below the right side"]
    return []


def _check_extra(d: Derivation, mode: ScopeMode) -> list[str]:
    first, second = d.premises
    if not isinstance(first.left, Var) or first.left.name not in d.env:
        return ["first premise must concern a bound variable"]
    x = first.left.name
    if not env_equiv(first.env, d.env):
        return ["first premise environment mismatch"]
    narrowed = d.env.with_bound(x, first.right)
    if not _premise_is(second, narrowed, d.left, d.right):
        return ["second premise must conclude the same sides under the rebound environment"]
    return []


_CHECKS = {
    Rule.TOP: _check_top,
    Rule.REFL_TVAR: _check_refl,
    Rule.TRANS_TVAR: _check_trans_tvar,
    Rule.ARROW: _check_arrow,
    Rule.ALL: _check_all,
    Rule.HYP: _check_hyp,
    Rule.TR_TVAR: _check_tr_tvar,
    Rule.EXTRA: _check_extra,
}


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------


def type_to_sexp(t: Type) -> str:
    match t:
        case Top():
            return "Top"
        case Var(name):
            return f"(var {name})"
        case Arrow(dom, cod):
            return f"(arrow {type_to_sexp(dom)} {type_to_sexp(cod)})"
        case Forall(binder, bound, body):
            return f"(all {binder} {type_to_sexp(bound)} {type_to_sexp(body)})"
    raise TypeError(f"not a type: {t!r}")


def env_to_sexp(env: TypeEnv) -> str:
    return "(" + " ".join(f"({e.name} {type_to_sexp(e.bound)})" for e in env) + ")"


def judgment_to_sexp(j: Judgment) -> str:
    return f"(judgment {env_to_sexp(j.env)} {type_to_sexp(j.left)} {type_to_sexp(j.right)})"


def serialize_derivation(d: Derivation) -> str:
    """
    Canonical s-expression of a derivation.

    Examples
    --------
    >>> serialize_derivation(leaf(Rule.TOP, TypeEnv(), TOP, TOP))
    '(SA-Top (judgment () Top Top))'
    """
    parts = [d.rule.value, judgment_to_sexp(d.conclusion)]
    parts.extend(serialize_derivation(p) for p in d.premises)
    return "(" + " ".join(parts) + ")"


_SEXP_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


class _Atom(str):
    position: int


def read_sexp(text: str):
    """
    Read one s-expression into nested lists of atoms.

    Raises
    ------
    ParseError
        On unbalanced parentheses or trailing input.
    """
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        match = _SEXP_TOKEN.match(text, pos)
        if match is None:
            break
        start = match.start(match.lastindex) if match.lastindex else pos
        if match.group(1):
            opened: list = []
            stack[-1].append(opened)
            stack.append(opened)
        elif match.group(2):
            if len(stack) == 1:
                raise errors.ParseError("unbalanced ')'", start)
            stack.pop()
        else:
            atom = _Atom(match.group(3))
            atom.position = start
            stack[-1].append(atom)
        pos = match.end()
    if len(stack) != 1:
        raise errors.ParseError("unexpected end of input", len(text))
    top = stack[0]
    if len(top) != 1:
        raise errors.ParseError("expected exactly one s-expression", 0)
    return top[0]


def _where(obj) -> int | None:
    return getattr(obj, "position", None)


def _sexp_name(obj) -> TyVarName:
    if not isinstance(obj, str):
        raise errors.ParseError("expected a variable name")
    return check_name(str(obj), _where(obj))


def sexp_to_type(obj) -> Type:
    if isinstance(obj, str):
        if obj == "Top":
            return TOP
        raise errors.ParseError(f"unexpected atom {obj!r}", _where(obj))
    if not obj:
        raise errors.ParseError("empty type expression")
    head = obj[0]
    if head == "var" and len(obj) == 2:
        return Var(_sexp_name(obj[1]))
    if head == "arrow" and len(obj) == 3:
        return Arrow(sexp_to_type(obj[1]), sexp_to_type(obj[2]))
    if head == "all" and len(obj) == 4:
        return Forall(_sexp_name(obj[1]), sexp_to_type(obj[2]), sexp_to_type(obj[3]))
    raise errors.ParseError(f"malformed type expression headed by {head!r}", _where(head))


def sexp_to_env(obj) -> TypeEnv:
    if isinstance(obj, str):
        raise errors.ParseError("expected an environment list", _where(obj))
    entries = []
    for item in obj:
        if isinstance(item, str) or len(item) != 2:
            raise errors.ParseError("malformed environment entry", _where(item))
        entries.append(Binding(_sexp_name(item[0]), sexp_to_type(item[1])))
    return TypeEnv(tuple(entries))


def sexp_to_judgment(obj) -> Judgment:
    if isinstance(obj, str) or len(obj) != 4 or obj[0] != "judgment":
        raise errors.ParseError("malformed judgment", _where(obj))
    return Judgment(sexp_to_env(obj[1]), sexp_to_type(obj[2]), sexp_to_type(obj[3]))


def _sexp_to_derivation(obj) -> Derivation:
    if isinstance(obj, str) or len(obj) < 2:
        raise errors.ParseError("malformed derivation", _where(obj))
    tag = obj[0]
    try:
        rule = Rule(str(tag))
    except ValueError:
        raise errors.ParseError(f"unknown rule tag {tag!r}", _where(tag)) from None
    conclusion = sexp_to_judgment(obj[1])
    premises = tuple(_sexp_to_derivation(p) for p in obj[2:])
    return Derivation(rule, conclusion, premises)


def parse_derivation(text: str) -> Derivation:
    """
    Inverse of :func:`serialize_derivation`; whitespace between tokens is free.

    Raises
    ------
    ParseError
        For malformed input.
    ArityError
        When a node's premise count does not match its tag.
    """
    return _sexp_to_derivation(read_sexp(text))


def render_derivation(d: Derivation, indent: str = "") -> str:
    """Indented, human-readable rendering of a derivation tree."""
    lines = [f"{indent}{d.rule.value}: {d.conclusion}"]
    for p in d.premises:
        lines.append(render_derivation(p, indent + "  "))
    return "\n".join(lines)
