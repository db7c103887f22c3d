"""
This module contains the machinery shared by all derivation transformers.

Transformers are total, deterministic functions from derivations to
derivations. Most of them walk an input tree and rebuild it in a different
environment; :class:`Rebuild` does that walk, and subclasses override the
handful of rules where a transformer does something other than copy.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass, field

from fsub import errors
from fsub._settings import settings
from fsub.rules import (
    Derivation,
    Rule,
    SystemId,
    choose_binder,
    leaf,
    node,
    validate_derivation,
)
from fsub.syntax import (
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
    env_equiv,
    env_well_formed,
    free_vars,
    rename,
    well_scoped_type,
)

_logger = logging.getLogger(__name__)

Renaming = Mapping[TyVarName, TyVarName]


@dataclass(frozen=True)
class EnvSplit:
    """
    An environment cut as ``prefix, pivot, suffix``.

    Attributes
    ----------
    prefix : TypeEnv
        Bindings before the pivot.
    pivot : Binding
        The binding whose bound is narrowed.
    suffix : TypeEnv
        Bindings after the pivot.
    """

    prefix: TypeEnv
    pivot: Binding
    suffix: TypeEnv

    def __post_init__(self):
        # Raises DuplicateNameError if names collide
        self.env  # noqa: B018

    @classmethod
    def at(cls, env: TypeEnv, name: TyVarName) -> EnvSplit:
        """Split ``env`` around the binding of ``name``."""
        if name not in env:
            raise errors.JudgmentMismatchError(f"{name} is not bound in '{env}'")
        i = env.position(name)
        return cls(env.prefix(name), env.entries[i], env.suffix(name))

    @property
    def name(self) -> TyVarName:
        return self.pivot.name

    @property
    def env(self) -> TypeEnv:
        return TypeEnv((*self.prefix.entries, self.pivot, *self.suffix.entries))

    def rebound(self, bound: Type) -> TypeEnv:
        """The full environment with the pivot bound replaced."""
        return self.env.with_bound(self.pivot.name, bound)


# ---------------------------------------------------------------------------
# Call auditing
# ---------------------------------------------------------------------------


@dataclass
class Frame:
    """One recorded transformer call."""

    op: str
    measure: tuple[int, ...] | None
    parent: int | None
    depth: int
    case: str | None = None


@dataclass
class Audit:
    """
    Per-invocation record of recursive transformer calls.

    Every measured call is compared with its nearest recorded caller; a
    measure that fails to decrease lexicographically is a violation.

    Attributes
    ----------
    frames : list[Frame]
        Calls in the order they were entered.
    violations : list[tuple[Frame, Frame]]
        (caller, callee) pairs whose measure did not decrease.
    """

    frames: list[Frame] = field(default_factory=list)
    violations: list[tuple[Frame, Frame]] = field(default_factory=list)
    _stack: list[int] = field(default_factory=list, repr=False)

    @contextmanager
    def frame(self, op: str, measure: tuple[int, ...] | None = None) -> Iterator[Frame]:
        parent = self._stack[-1] if self._stack else None
        current = Frame(op, measure, parent, len(self._stack))
        if parent is not None and measure is not None:
            caller = self.frames[parent]
            if caller.measure is not None and not measure < caller.measure:
                _logger.warning(f"measure did not decrease: {caller} -> {current}")
                self.violations.append((caller, current))
        self.frames.append(current)
        self._stack.append(len(self.frames) - 1)
        try:
            yield current
        finally:
            self._stack.pop()

    def count(self, op: str) -> int:
        return sum(1 for f in self.frames if f.op == op)

    def descents_below(self, case: str) -> int:
        """Number of calls made from inside a call that handled ``case``."""
        return sum(
            1
            for f in self.frames
            if f.parent is not None and self.frames[f.parent].case == case
        )

    @property
    def max_depth(self) -> int:
        return max((f.depth for f in self.frames), default=0)


# ---------------------------------------------------------------------------
# Validation gates
# ---------------------------------------------------------------------------


def require_valid(op: str, d: Derivation, system: SystemId, mode: ScopeMode):
    """Reject an invalid input derivation when running with ``debug``."""
    if settings.debug:
        report = validate_derivation(d, system, mode)
        if not report.ok:
            raise errors.InvalidInputError(op, report)


def confirm(op: str, d: Derivation, system: SystemId, mode: ScopeMode) -> Derivation:
    """Re-validate a produced derivation when running with ``debug``."""
    if settings.debug:
        report = validate_derivation(d, system, mode)
        if not report.ok:
            raise errors.ConstructionError(op, report)
    return d


def require_env(op: str, d: Derivation, env: TypeEnv):
    if not env_equiv(d.env, env):
        raise errors.JudgmentMismatchError(
            f"{op}: expected environment '{env}', found '{d.env}'"
        )


def require_cut(d1: Derivation, d2: Derivation):
    """Check that ``d1`` and ``d2`` meet at one environment and cut type."""
    require_env("transitivity", d2, d1.env)
    if not alpha_eq(d1.right, d2.left):
        raise errors.JudgmentMismatchError(f"cut types differ: {d1.right} is not {d2.left}")


def require_split(split: EnvSplit, d: Derivation, dP: Derivation):
    require_env("narrowing", d, split.env)
    require_env("narrowing", dP, split.prefix)
    if not alpha_eq(dP.right, split.pivot.bound):
        raise errors.JudgmentMismatchError(
            f"{dP.right} is not the bound {split.pivot.bound} of {split.name}"
        )


# ---------------------------------------------------------------------------
# Structural rebuilding
# ---------------------------------------------------------------------------

_VISITORS = {
    Rule.TOP: "visit_top",
    Rule.REFL_TVAR: "visit_refl_tvar",
    Rule.TRANS_TVAR: "visit_trans_tvar",
    Rule.ARROW: "visit_arrow",
    Rule.ALL: "visit_all",
    Rule.HYP: "visit_hyp",
    Rule.TR_TVAR: "visit_tr_tvar",
    Rule.EXTRA: "visit_extra",
}


class Rebuild:
    """
    Copy a derivation into a target environment.

    The target environment must bind every name the source environment
    binds (possibly with a different bound where a subclass handles the
    consequences). ``ren`` maps SA-All binders of the source to the binders
    chosen in the copy; a source binder is kept whenever it is still fresh.
    """

    def __call__(self, d: Derivation, env: TypeEnv, ren: Renaming | None = None) -> Derivation:
        ren = ren or {}
        left, right = rename(d.left, ren), rename(d.right, ren)
        visit = getattr(self, _VISITORS[d.rule])
        return visit(d, env, ren, left, right)

    def visit_top(self, d, env, ren, left, right) -> Derivation:
        return leaf(Rule.TOP, env, left, right)

    def visit_refl_tvar(self, d, env, ren, left, right) -> Derivation:
        return leaf(Rule.REFL_TVAR, env, left, right)

    def visit_hyp(self, d, env, ren, left, right) -> Derivation:
        return leaf(Rule.HYP, env, left, right)

    def visit_trans_tvar(self, d, env, ren, left, right) -> Derivation:
        (rest,) = d.premises
        return node(Rule.TRANS_TVAR, env, left, right, self(rest, env, ren))

    def visit_arrow(self, d, env, ren, left, right) -> Derivation:
        dom, cod = d.premises
        return node(Rule.ARROW, env, left, right, self(dom, env, ren), self(cod, env, ren))

    def visit_tr_tvar(self, d, env, ren, left, right) -> Derivation:
        first, rest = d.premises
        return node(Rule.TR_TVAR, env, left, right, self(first, env, ren), self(rest, env, ren))

    def visit_all(self, d, env, ren, left, right) -> Derivation:
        bound, body = d.premises
        z, inner = self.rebind(d, env, ren, left, right)
        return node(
            Rule.ALL,
            env,
            left,
            right,
            self(bound, env, ren),
            self(body, env.extend(z, right.bound), inner),
        )

    def visit_extra(self, d, env, ren, left, right) -> Derivation:
        first, second = d.premises
        new_first = self(first, env, ren)
        narrowed = env.with_bound(new_first.left.name, new_first.right)
        return node(Rule.EXTRA, env, left, right, new_first, self(second, narrowed, ren))

    @staticmethod
    def rebind(d, env, ren, left, right) -> tuple[TyVarName, dict[TyVarName, TyVarName]]:
        """Binder for the body premise of an SA-All node, and the extended renaming."""
        old = d.premises[1].env.entries[-1].name
        taken = env.vocabulary | free_vars(left) | free_vars(right) | set(ren.values())
        z = old if old not in taken else choose_binder(env, left, right, ren.values(), d.names)
        return z, {**ren, old: z}


def transport(d: Derivation, env: TypeEnv, ren: Renaming | None = None) -> Derivation:
    """Unchecked weakening used inside other transformers."""
    return Rebuild()(d, env, ren)


def weakening(d: Derivation, wider: TypeEnv, system: SystemId, mode: ScopeMode) -> Derivation:
    """
    Transport a derivation to an environment containing its own.

    Parameters
    ----------
    d : Derivation
        A valid derivation.
    wider : TypeEnv
        An environment with ``d``'s environment as a subsequence.
    system : SystemId
        The system ``d`` is valid in.
    mode : ScopeMode
        The scope mode ``d`` is valid in.

    Returns
    -------
    Derivation
        The same sides derived under ``wider``. SA-All binders that clash
        with names of ``wider`` are re-freshened.

    Raises
    ------
    NameClashError
        If ``wider`` binds a name of ``d``'s environment to a different bound.
    JudgmentMismatchError
        If ``d``'s environment is not a subsequence of ``wider``.
    """
    require_valid("weakening", d, system, mode)
    for entry in d.env:
        bound = wider.lookup(entry.name)
        if bound is not None and not alpha_eq(bound, entry.bound):
            raise errors.NameClashError(
                f"{entry.name} is bound to {bound} in the wider environment, not {entry.bound}"
            )
    if not d.env.is_subsequence_of(wider):
        raise errors.JudgmentMismatchError(f"'{d.env}' is not a subsequence of '{wider}'")
    if mode is ScopeMode.STRICT and not env_well_formed(wider, mode):
        raise errors.IllFormedEnvError(f"environment '{wider}' is not well-scoped")
    return confirm("weakening", transport(d, wider), system, mode)


def reflexivity(env: TypeEnv, t: Type, mode: ScopeMode) -> Derivation:
    """
    Original-system derivation of ``env ⊢ t <: t``.

    Variables use SA-Refl-TVar, Top uses SA-Top, and arrows and universals
    recurse through SA-Arrow and SA-All.

    Raises
    ------
    NotWellScopedError
        In strict mode, if ``t`` mentions variables ``env`` does not bind.
    """
    if mode is ScopeMode.STRICT and not well_scoped_type(t, env):
        raise errors.NotWellScopedError(f"{t} is not well-scoped in '{env}'")
    return confirm("reflexivity", refl_derivation(env, t), SystemId.ORIGINAL, mode)


def refl_derivation(env: TypeEnv, t: Type) -> Derivation:
    """Reflexivity without scope or validity checks."""
    match t:
        case Top():
            return leaf(Rule.TOP, env, t, t)
        case Var():
            return leaf(Rule.REFL_TVAR, env, t, t)
        case Arrow(dom, cod):
            return node(Rule.ARROW, env, t, t, refl_derivation(env, dom), refl_derivation(env, cod))
        case Forall(binder, bound, body):
            z = choose_binder(env, t, t)
            opened = rename(body, {binder: z})
            return node(
                Rule.ALL,
                env,
                t,
                t,
                refl_derivation(env, bound),
                refl_derivation(env.extend(z, bound), opened),
            )
    raise TypeError(f"not a type: {t!r}")


def is_pivot(t: Type, name: TyVarName) -> bool:
    return isinstance(t, Var) and t.name == name
