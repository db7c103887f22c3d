"""
This module implements the syntax of System F<: types and type environments.

Types use a named representation. Binders inside types are compared up to
renaming with :func:`alpha_eq`, while environment names are global and must be
pairwise distinct. Every value is an immutable dataclass.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TypeAlias

from fsub import errors

#: Words that can never be variable names.
RESERVED: frozenset[str] = frozenset({"Top", "All"})

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

TyVarName: TypeAlias = str


class ScopeMode(Enum):
    """Whether rule provisos and prefix scoping of environments are enforced."""

    STRICT = "strict"
    LAX = "lax"

    def __str__(self) -> str:
        return self.value


def check_name(name: str, position: int | None = None) -> TyVarName:
    """
    Return ``name`` if it is a legal type variable name.

    Raises
    ------
    ReservedNameError
        If the name is reserved or is not an identifier.
    """
    if name in RESERVED or not _NAME.match(name):
        raise errors.ReservedNameError(name, position)
    return name


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: TyVarName

    def __post_init__(self):
        check_name(self.name)

    def __str__(self) -> str:
        return render_type(self)


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "Top"


@dataclass(frozen=True)
class Arrow:
    dom: Type
    cod: Type

    def __str__(self) -> str:
        return render_type(self)


@dataclass(frozen=True)
class Forall:
    """Bounded universal ``All binder <: bound . body``; binds in body only."""

    binder: TyVarName
    bound: Type
    body: Type

    def __post_init__(self):
        check_name(self.binder)

    def __str__(self) -> str:
        return render_type(self)


Type: TypeAlias = Var | Top | Arrow | Forall

#: The single Top value.
TOP = Top()


def size(t: Type) -> int:
    """Number of nodes in ``t``."""
    match t:
        case Arrow(dom, cod):
            return 1 + size(dom) + size(cod)
        case Forall(_, bound, body):
            return 1 + size(bound) + size(body)
        case _:
            return 1


def free_vars(t: Type) -> frozenset[TyVarName]:
    """
    Free variables of a type.

    A universal removes its binder from the body's contribution only; the
    bound is in the outer scope.
    """
    match t:
        case Var(name):
            return frozenset({name})
        case Arrow(dom, cod):
            return free_vars(dom) | free_vars(cod)
        case Forall(binder, bound, body):
            return free_vars(bound) | (free_vars(body) - {binder})
        case _:
            return frozenset()


def all_names(t: Type) -> frozenset[TyVarName]:
    """Every name occurring in ``t``, free or bound."""
    match t:
        case Var(name):
            return frozenset({name})
        case Arrow(dom, cod):
            return all_names(dom) | all_names(cod)
        case Forall(binder, bound, body):
            return all_names(bound) | all_names(body) | {binder}
        case _:
            return frozenset()


def subterms(t: Type) -> Iterator[Type]:
    """Pre-order traversal of ``t`` and all of its subterms."""
    yield t
    match t:
        case Arrow(dom, cod):
            yield from subterms(dom)
            yield from subterms(cod)
        case Forall(_, bound, body):
            yield from subterms(bound)
            yield from subterms(body)


def fresh_name(avoid: Iterable[TyVarName]) -> TyVarName:
    """
    Return the first of ``X, X1, X2, ...`` that is not in ``avoid``.

    Parameters
    ----------
    avoid : Iterable[str]
        Names that are taken.

    Returns
    -------
    str
        A deterministic fresh name.
    """
    taken = set(avoid)
    if "X" not in taken:
        return "X"
    i = 1
    while f"X{i}" in taken:
        i += 1
    return f"X{i}"


def rename(t: Type, mapping: Mapping[TyVarName, TyVarName]) -> Type:
    """
    Simultaneously rename free variables of ``t``, avoiding capture.

    Binders that would capture a renamed occurrence are themselves renamed to
    a fresh name.
    """
    if not mapping:
        return t
    match t:
        case Var(name):
            return Var(mapping[name]) if name in mapping else t
        case Top():
            return t
        case Arrow(dom, cod):
            return Arrow(rename(dom, mapping), rename(cod, mapping))
        case Forall(binder, bound, body):
            inner = {k: v for k, v in mapping.items() if k != binder}
            body_fv = free_vars(body) - {binder}
            targets = {inner[k] for k in body_fv if k in inner}
            new_binder = binder
            if binder in targets:
                new_binder = fresh_name(
                    all_names(body) | set(inner) | set(inner.values()) | {binder}
                )
                inner[binder] = new_binder
            return Forall(new_binder, rename(bound, mapping), rename(body, inner))
    raise TypeError(f"not a type: {t!r}")


def alpha_eq(t1: Type, t2: Type) -> bool:
    """
    Equality up to consistent renaming of universal binders.

    Free variables compare by name.
    """
    return _alpha(t1, t2, {}, {}, 0)


def _alpha(t1, t2, left: dict, right: dict, depth: int) -> bool:
    match t1, t2:
        case Top(), Top():
            return True
        case Var(a), Var(b):
            if a in left or b in right:
                return left.get(a) == right.get(b)
            return a == b
        case Arrow(d1, c1), Arrow(d2, c2):
            return _alpha(d1, d2, left, right, depth) and _alpha(
                c1, c2, left, right, depth
            )
        case Forall(x, b1, body1), Forall(y, b2, body2):
            if not _alpha(b1, b2, left, right, depth):
                return False
            return _alpha(
                body1, body2, {**left, x: depth}, {**right, y: depth}, depth + 1
            )
    return False


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Binding:
    name: TyVarName
    bound: Type

    def __post_init__(self):
        check_name(self.name)

    def __str__(self) -> str:
        return f"{self.name} <: {render_type(self.bound)}"


@dataclass(frozen=True)
class TypeEnv:
    """
    Ordered sequence of bindings with pairwise distinct names.

    Attributes
    ----------
    entries : tuple[Binding, ...]
        The bindings, outermost first.
    """

    entries: tuple[Binding, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for entry in self.entries:
            if entry.name in seen:
                raise errors.DuplicateNameError(entry.name)
            seen.add(entry.name)

    @classmethod
    def of(cls, *pairs: tuple[TyVarName, Type]) -> TypeEnv:
        """Build an environment from ``(name, bound)`` pairs."""
        return cls(tuple(Binding(name, bound) for name, bound in pairs))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Binding]:
        return iter(self.entries)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __str__(self) -> str:
        return render_env(self)

    @cached_property
    def _index(self) -> dict[TyVarName, int]:
        return {entry.name: i for i, entry in enumerate(self.entries)}

    @cached_property
    def names(self) -> frozenset[TyVarName]:
        return frozenset(self._index)

    @cached_property
    def vocabulary(self) -> frozenset[TyVarName]:
        """Bound names together with every free variable of every bound."""
        names = set(self._index)
        for entry in self.entries:
            names |= free_vars(entry.bound)
        return frozenset(names)

    def lookup(self, name: TyVarName) -> Type | None:
        """Return the bound declared for ``name``, or None."""
        i = self._index.get(name)
        return None if i is None else self.entries[i].bound

    def position(self, name: TyVarName) -> int:
        return self._index[name]

    def extend(self, name: TyVarName, bound: Type) -> TypeEnv:
        return TypeEnv((*self.entries, Binding(name, bound)))

    def with_bound(self, name: TyVarName, bound: Type) -> TypeEnv:
        """Copy of the environment with the bound of ``name`` replaced."""
        i = self._index[name]
        entries = list(self.entries)
        entries[i] = Binding(name, bound)
        return TypeEnv(tuple(entries))

    def prefix(self, name: TyVarName) -> TypeEnv:
        """Bindings strictly before ``name``."""
        return TypeEnv(self.entries[: self._index[name]])

    def suffix(self, name: TyVarName) -> TypeEnv:
        """Bindings strictly after ``name``."""
        return TypeEnv(self.entries[self._index[name] + 1 :])

    def permuted(self, order: Iterable[int]) -> TypeEnv:
        return TypeEnv(tuple(self.entries[i] for i in order))

    def without(self, name: TyVarName) -> TypeEnv:
        return TypeEnv(tuple(e for e in self.entries if e.name != name))

    def is_subsequence_of(self, other: TypeEnv) -> bool:
        """True if every binding occurs in ``other``, in the same order, with an alpha-equal bound."""
        last = -1
        for entry in self.entries:
            if entry.name not in other:
                return False
            i = other.position(entry.name)
            if i <= last or not alpha_eq(entry.bound, other.entries[i].bound):
                return False
            last = i
        return True


def env_equiv(env1: TypeEnv, env2: TypeEnv) -> bool:
    """Same names in the same order with alpha-equal bounds."""
    if len(env1) != len(env2):
        return False
    return all(
        a.name == b.name and alpha_eq(a.bound, b.bound)
        for a, b in zip(env1.entries, env2.entries)
    )


def well_scoped_type(t: Type, env: TypeEnv) -> bool:
    """True iff every free variable of ``t`` is bound in ``env``."""
    return free_vars(t) <= env.names


def env_well_formed(env: TypeEnv, mode: ScopeMode) -> bool:
    """
    Check the scoping discipline of an environment.

    Strict mode requires each bound to be well-scoped over the bindings
    before it. Lax mode only requires distinct names, which every
    :class:`TypeEnv` already has.
    """
    if mode is ScopeMode.LAX:
        return len(env.names) == len(env.entries)
    seen: set[TyVarName] = set()
    for entry in env.entries:
        if entry.name in seen or not free_vars(entry.bound) <= seen:
            return False
        seen.add(entry.name)
    return True


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<arrow>->)|(?P<sub><:)|(?P<punct>[().,])|(?P<word>[A-Za-z0-9_]+))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            where = pos + len(rest) - len(rest.lstrip())
            raise errors.ParseError(f"unexpected character {text[where]!r}", where)
        tokens.append((match.group(match.lastgroup), match.start(match.lastgroup)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def position(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return len(self.text)

    def advance(self) -> str:
        token = self.peek()
        if token is None:
            raise errors.ParseError("unexpected end of input", self.position())
        self.i += 1
        return token

    def expect(self, token: str):
        if self.peek() != token:
            found = self.peek()
            what = "end of input" if found is None else repr(found)
            raise errors.ParseError(f"expected {token!r}, found {what}", self.position())
        self.i += 1

    def name(self) -> TyVarName:
        pos = self.position()
        token = self.advance()
        if token in RESERVED:
            raise errors.ReservedNameError(token, pos)
        if not _NAME.match(token):
            raise errors.ParseError(f"expected a variable name, found {token!r}", pos)
        return token

    def ty(self) -> Type:
        if self.peek() == "All":
            self.advance()
            binder = self.name()
            self.expect("<:")
            bound = self.ty()
            self.expect(".")
            return Forall(binder, bound, self.ty())
        return self.arr()

    def arr(self) -> Type:
        dom = self.atom()
        if self.peek() == "->":
            self.advance()
            return Arrow(dom, self.ty())
        return dom

    def atom(self) -> Type:
        pos = self.position()
        token = self.peek()
        if token == "Top":
            self.advance()
            return TOP
        if token == "(":
            self.advance()
            t = self.ty()
            self.expect(")")
            return t
        if token is None or token in {")", ".", ",", "->", "<:", "All"}:
            what = "end of input" if token is None else repr(token)
            raise errors.ParseError(f"expected a type, found {what}", pos)
        return Var(self.name())

    def done(self):
        if self.peek() is not None:
            raise errors.ParseError(f"unexpected {self.peek()!r}", self.position())


def parse_type(text: str) -> Type:
    """
    Parse the surface syntax of a type.

    Arrows associate to the right and ``All X <: T1 . T2`` extends as far
    right as possible, also when it is the codomain of an arrow
    (``A -> All X <: Top . X``).

    Raises
    ------
    ParseError
        For malformed input.
    ReservedNameError
        If a binder is ``Top`` or ``All``.

    Examples
    --------
    >>> parse_type("A -> B -> Top")
    Arrow(dom=Var(name='A'), cod=Arrow(dom=Var(name='B'), cod=Top()))
    """
    parser = _Parser(text)
    t = parser.ty()
    parser.done()
    return t


def parse_env(text: str) -> TypeEnv:
    """
    Parse a comma separated list of ``X <: T`` bindings.

    The empty string is the empty environment.

    Raises
    ------
    ParseError
        For malformed input.
    DuplicateNameError
        When a name is bound twice.
    """
    parser = _Parser(text)
    entries: list[Binding] = []
    if parser.peek() is None:
        return TypeEnv()
    while True:
        name = parser.name()
        parser.expect("<:")
        entries.append(Binding(name, parser.ty()))
        if parser.peek() != ",":
            break
        parser.advance()
    parser.done()
    return TypeEnv(tuple(entries))


def render_type(t: Type) -> str:
    """Canonical text of ``t``; a quantifier in an arrow codomain stays parenthesized."""
    match t:
        case Top():
            return "Top"
        case Var(name):
            return name
        case Arrow(dom, cod):
            left = render_type(dom)
            right = render_type(cod)
            if isinstance(dom, (Arrow, Forall)):
                left = f"({left})"
            if isinstance(cod, Forall):
                right = f"({right})"
            return f"{left} -> {right}"
        case Forall(binder, bound, body):
            return f"All {binder} <: {render_type(bound)} . {render_type(body)}"
    raise TypeError(f"not a type: {t!r}")


def render_env(env: TypeEnv) -> str:
    return ", ".join(str(entry) for entry in env.entries)
