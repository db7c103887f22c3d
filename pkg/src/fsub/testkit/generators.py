"""
Seeded random and exhaustive generation of environments and types.

Random streams come from :func:`numpy.random.default_rng`. Each trial of a
harness run gets its own generator, seeded by mixing the run seed with the
trial index, so serial and parallel runs draw identical instances.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from fsub._settings import settings
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
    fresh_name,
    rename,
)

_logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

#: splitmix64 increment and multipliers.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Seed of trial ``trial`` in a run seeded with ``seed``."""
    return splitmix64((seed ^ trial) & MASK64)


@dataclass(frozen=True)
class GenConfig:
    """
    Parameters of a sample stream.

    Equal configurations produce equal streams.

    Attributes
    ----------
    seed : int
        64-bit seed.
    max_type_size : int
        Upper bound on the node count of generated types.
    max_env_len : int
        Upper bound on the number of environment entries.
    mode : ScopeMode
        Strict streams are well-scoped; lax streams are not constrained.
    """

    seed: int = field(default_factory=lambda: settings.seed)
    max_type_size: int = field(default_factory=lambda: settings.max_type_size)
    max_env_len: int = field(default_factory=lambda: settings.max_env_len)
    mode: ScopeMode = ScopeMode.STRICT

    def __post_init__(self):
        object.__setattr__(self, "seed", self.seed & MASK64)
        if self.max_type_size < 1:
            raise ValueError("max_type_size must be positive")
        if self.max_env_len < 0:
            raise ValueError("max_env_len must be nonnegative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def for_trial(self, trial: int) -> GenConfig:
        return replace(self, seed=trial_seed(self.seed, trial))


def _weights() -> tuple[float, float, float]:
    w = settings.generator
    return w["leaf"], w["arrow"], w["forall"]


def _draw(rng: np.random.Generator, budget: int, scope: Sequence[TyVarName], taken: frozenset) -> Type:
    leaf_w, arrow_w, forall_w = _weights()
    kind = "leaf"
    if budget >= 3:
        kind = rng.choice(["leaf", "arrow", "forall"], p=[leaf_w, arrow_w, forall_w])
    if kind == "leaf":
        i = int(rng.integers(0, len(scope) + 1))
        return TOP if i == len(scope) else Var(scope[i])
    first = int(rng.integers(1, budget - 1))
    second = budget - 1 - first
    if kind == "arrow":
        return Arrow(_draw(rng, first, scope, taken), _draw(rng, second, scope, taken))
    binder = fresh_name(taken | set(scope))
    bound = _draw(rng, first, scope, taken)
    body = _draw(rng, second, [*scope, binder], taken | {binder})
    return Forall(binder, bound, body)


def gen_type(cfg: GenConfig, env: TypeEnv, rng: np.random.Generator | None = None) -> Type:
    """
    Draw a type of at most ``cfg.max_type_size`` nodes.

    Strict streams use only the names ``env`` binds. Lax streams may also
    use one name outside ``env``.
    """
    rng = rng if rng is not None else cfg.rng()
    scope = [entry.name for entry in env]
    if cfg.mode is ScopeMode.LAX:
        scope.append(fresh_name(env.vocabulary))
    return _draw(rng, cfg.max_type_size, scope, frozenset(env.vocabulary))


def gen_env(cfg: GenConfig, rng: np.random.Generator | None = None, min_len: int = 0) -> TypeEnv:
    """
    Draw an environment of at least ``min_len`` and at most
    ``max(cfg.max_env_len, min_len)`` entries.

    Names follow the fresh sequence ``X, X1, ...``. Strict bounds range over
    the entries before them; lax bounds over every name of the environment.
    """
    rng = rng if rng is not None else cfg.rng()
    n = int(rng.integers(min_len, max(cfg.max_env_len, min_len) + 1))
    names: list[TyVarName] = []
    for _ in range(n):
        names.append(fresh_name(names))
    entries = []
    for i, name in enumerate(names):
        scope = names[:i] if cfg.mode is ScopeMode.STRICT else names
        bound = _draw(rng, cfg.max_type_size, scope, frozenset(names))
        entries.append(Binding(name, bound))
    return TypeEnv(tuple(entries))


def gen_instance(cfg: GenConfig, rng: np.random.Generator | None = None) -> tuple[TypeEnv, Type, Type]:
    """Draw an environment and two endpoint types over it."""
    rng = rng if rng is not None else cfg.rng()
    env = gen_env(cfg, rng)
    return env, gen_type(cfg, env, rng), gen_type(cfg, env, rng)


# ---------------------------------------------------------------------------
# Related types
# ---------------------------------------------------------------------------


def _open(t: Forall, env: TypeEnv) -> tuple[TyVarName, Type]:
    if t.binder not in env.vocabulary:
        return t.binder, t.body
    z = fresh_name(env.vocabulary | {t.binder})
    return z, rename(t.body, {t.binder: z})


def gen_subtype(
    cfg: GenConfig, env: TypeEnv, t: Type, rng: np.random.Generator | None = None
) -> Type:
    """
    Draw a type ``S`` with ``env ⊢ S <: t`` derivable by construction.

    Variables whose declared bound is ``t`` may replace it; arrows vary
    covariantly in the codomain and contravariantly in the domain; below
    ``Top`` any generated type will do.
    """
    rng = rng if rng is not None else cfg.rng()
    below = [Var(e.name) for e in env if alpha_eq(e.bound, t)]
    if below and rng.random() < 0.5:
        return below[int(rng.integers(0, len(below)))]
    match t:
        case Top():
            return gen_type(replace(cfg, mode=ScopeMode.STRICT), env, rng)
        case Arrow(dom, cod):
            return Arrow(gen_supertype(cfg, env, dom, rng), gen_subtype(cfg, env, cod, rng))
        case Forall(_, bound, _):
            z, body = _open(t, env)
            return Forall(z, bound, gen_subtype(cfg, env.extend(z, bound), body, rng))
    return t


def gen_supertype(
    cfg: GenConfig, env: TypeEnv, s: Type, rng: np.random.Generator | None = None
) -> Type:
    """Draw a type ``T`` with ``env ⊢ s <: T`` derivable by construction."""
    rng = rng if rng is not None else cfg.rng()
    if rng.random() < 0.2:
        return TOP
    match s:
        case Var(name):
            bound = env.lookup(name)
            if bound is not None and rng.random() < 0.5:
                return gen_supertype(cfg, env, bound, rng)
            return s
        case Arrow(dom, cod):
            return Arrow(gen_subtype(cfg, env, dom, rng), gen_supertype(cfg, env, cod, rng))
        case Forall(_, bound, _):
            z, body = _open(s, env)
            return Forall(z, bound, gen_supertype(cfg, env.extend(z, bound), body, rng))
    return s


# ---------------------------------------------------------------------------
# Exhaustive universes
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _types_of_size(n: int, scope: tuple[TyVarName, ...]) -> tuple[Type, ...]:
    if n == 1:
        return (TOP, *(Var(x) for x in scope))
    out: list[Type] = []
    for first in range(1, n - 1):
        second = n - 1 - first
        for dom, cod in itertools.product(_types_of_size(first, scope), _types_of_size(second, scope)):
            out.append(Arrow(dom, cod))
    binder = fresh_name(scope)
    for first in range(1, n - 1):
        second = n - 1 - first
        for bound in _types_of_size(first, scope):
            for body in _types_of_size(second, (*scope, binder)):
                out.append(Forall(binder, bound, body))
    return tuple(out)


def enumerate_types(names: Iterable[TyVarName], max_size: int) -> Iterator[Type]:
    """
    Every type of at most ``max_size`` nodes over free names ``names``.

    Binders are canonical, so no two results are alpha-equivalent. Results
    come in order of increasing size.
    """
    scope = tuple(names)
    for n in range(1, max_size + 1):
        yield from _types_of_size(n, scope)


def enumerate_envs(max_len: int, max_size: int) -> Iterator[TypeEnv]:
    """Every strict environment of at most ``max_len`` entries with bounds of at most ``max_size`` nodes."""

    def extend(env: TypeEnv) -> Iterator[TypeEnv]:
        yield env
        if len(env) == max_len:
            return
        name = fresh_name(env.names)
        for bound in enumerate_types([e.name for e in env], max_size):
            yield from extend(env.extend(name, bound))

    yield from extend(TypeEnv())
