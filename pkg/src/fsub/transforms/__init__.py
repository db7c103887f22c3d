"""
Derivation transformers: the metatheory of both rule systems as programs.
"""

from fsub.transforms.core import (
    Audit,
    EnvSplit,
    Frame,
    Rebuild,
    reflexivity,
    weakening,
)
from fsub.transforms.original import narrowing_original, transitivity_original
from fsub.transforms.translate import (
    eliminate_extra,
    lax_to_strict,
    orig_to_variant,
    variant_to_orig,
)
from fsub.transforms.variant import (
    extra_rule_admissible,
    narrowing_variant,
    transitivity_variant,
)

__all__ = [
    "Audit",
    "EnvSplit",
    "Frame",
    "Rebuild",
    "eliminate_extra",
    "extra_rule_admissible",
    "lax_to_strict",
    "narrowing_original",
    "narrowing_variant",
    "orig_to_variant",
    "reflexivity",
    "transitivity_original",
    "transitivity_variant",
    "variant_to_orig",
    "weakening",
]
