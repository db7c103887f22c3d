"""fsub

Derivation-producing subtyping for System F<:
"""

__version__ = "2025.11.0"
__author__ = "James Mineau"
__email__ = "jameskmineau@gmail.com"

import logging

logging.getLogger(__name__).addHandler(logging.NullHandler())

from . import testkit, transforms
from ._settings import settings
from .checker import CheckOutcome, Derivable, Fuel, FuelExhausted, NotDerivable, check
from .rules import (
    Derivation,
    Judgment,
    Rule,
    SystemId,
    ValidationReport,
    parse_derivation,
    render_derivation,
    serialize_derivation,
    validate_derivation,
)
from .syntax import (
    TOP,
    Arrow,
    Binding,
    Forall,
    ScopeMode,
    Top,
    Type,
    TypeEnv,
    Var,
    alpha_eq,
    parse_env,
    parse_type,
    render_type,
)


def _coerce(env: TypeEnv | str, *types: Type | str) -> tuple:
    env = parse_env(env) if isinstance(env, str) else env
    return (env, *(parse_type(t) if isinstance(t, str) else t for t in types))


def derive(
    env: TypeEnv | str,
    s: Type | str,
    t: Type | str,
    system: SystemId | str = SystemId.ORIGINAL,
    mode: ScopeMode | str = ScopeMode.STRICT,
    fuel: int | None = None,
) -> CheckOutcome:
    """
    Check ``env ⊢ s <: t``, accepting surface syntax for every argument.

    Parameters
    ----------
    env : TypeEnv | str
        Environment, e.g. ``"A <: Top, B <: A"``.
    s, t : Type | str
        Left and right sides.
    system : SystemId | str, optional
        ``"original"`` (default), ``"variant"`` or ``"variant-plus"``.
    mode : ScopeMode | str, optional
        ``"strict"`` (default) or ``"lax"``.
    fuel : int, optional
        Expansion budget. Defaults to the configured fuel.

    Returns
    -------
    CheckOutcome
        ``Derivable`` carrying the derivation, ``NotDerivable`` or
        ``FuelExhausted``.

    Examples
    --------
    >>> import fsub
    >>> fsub.derive("A <: Top, B <: A", "B", "A").derivation.rule
    <Rule.TRANS_TVAR: 'SA-Trans-TVar'>
    """
    env, s, t = _coerce(env, s, t)
    return check(SystemId(system), ScopeMode(mode), env, s, t, fuel)


def is_subtype(
    env: TypeEnv | str,
    s: Type | str,
    t: Type | str,
    system: SystemId | str = SystemId.ORIGINAL,
    mode: ScopeMode | str = ScopeMode.STRICT,
    fuel: int | None = None,
) -> bool | None:
    """
    True or False when the check is decided, None when fuel runs out.

    See :func:`derive` for the parameters.
    """
    outcome = derive(env, s, t, system, mode, fuel)
    if isinstance(outcome, FuelExhausted):
        return None
    return isinstance(outcome, Derivable)


__all__ = [
    "TOP",
    "Arrow",
    "Binding",
    "CheckOutcome",
    "Derivable",
    "Derivation",
    "Forall",
    "Fuel",
    "FuelExhausted",
    "Judgment",
    "NotDerivable",
    "Rule",
    "ScopeMode",
    "SystemId",
    "Top",
    "Type",
    "TypeEnv",
    "ValidationReport",
    "Var",
    "alpha_eq",
    "check",
    "derive",
    "is_subtype",
    "parse_derivation",
    "parse_env",
    "parse_type",
    "render_derivation",
    "render_type",
    "serialize_derivation",
    "settings",
    "testkit",
    "transforms",
    "validate_derivation",
]
