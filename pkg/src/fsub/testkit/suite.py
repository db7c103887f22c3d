"""
Property-based acceptance criteria, runnable at any scale.

Each criterion returns a :class:`CriterionResult`; :func:`run_suite` runs a
selection of them and tabulates the results.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd

from fsub import errors
from fsub._settings import settings
from fsub.checker import Derivable, FuelExhausted, check
from fsub.rules import (
    Derivation,
    Judgment,
    Rule,
    SystemId,
    parse_derivation,
    serialize_derivation,
    validate_derivation,
)
from fsub.syntax import ScopeMode, Type, TypeEnv, Var
from fsub.testkit.generators import (
    GenConfig,
    enumerate_envs,
    enumerate_types,
    gen_env,
    gen_subtype,
    gen_supertype,
    gen_type,
)
from fsub.testkit.harness import differential_run, permutation_run
from fsub.testkit.oracle import oracle_derivable
from fsub.transforms import (
    Audit,
    EnvSplit,
    extra_rule_admissible,
    lax_to_strict,
    narrowing_original,
    narrowing_variant,
    orig_to_variant,
    reflexivity,
    transitivity_original,
    transitivity_variant,
    variant_to_orig,
)

_logger = logging.getLogger(__name__)

STRICT = ScopeMode.STRICT


@dataclass
class CriterionResult:
    """
    Outcome of one acceptance criterion.

    Attributes
    ----------
    name : str
    trials : int
        Instances attempted.
    passed : int
        Instances meeting the criterion.
    skipped : int
        Instances that could not be set up because the checker ran out of
        fuel on an input that holds by construction.
    failures : list[str]
        One line per failing instance.
    seconds : float
        Wall time.
    """

    name: str
    trials: int = 0
    passed: int = 0
    skipped: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, passed: bool, detail: str = ""):
        self.trials += 1
        if passed:
            self.passed += 1
        else:
            self.failures.append(detail)

    def skip(self):
        self.trials += 1
        self.skipped += 1


class _Timer:
    def __init__(self, result: CriterionResult):
        self.result = result

    def __enter__(self) -> CriterionResult:
        self._start = time.perf_counter()
        return self.result

    def __exit__(self, *exc):
        self.result.seconds = time.perf_counter() - self._start
        status = "ok" if self.result.ok else f"{len(self.result.failures)} failure(s)"
        _logger.info(f"{self.result.name}: {self.result.passed}/{self.result.trials} passed, {status}")


class _SetupFailed(Exception):
    """A judgment that holds by construction was not derived."""

    def __init__(self, judgment: Judgment, outcome):
        super().__init__(f"{judgment} is {outcome}")
        self.judgment = judgment
        self.outcome = outcome

    def settle(self, result: CriterionResult, trial: int):
        """Skip the trial when fuel ran out, fail it otherwise."""
        if isinstance(self.outcome, FuelExhausted):
            result.skip()
        else:
            result.record(False, f"trial {trial}: {self}")


def _derive(system: SystemId, env: TypeEnv, s: Type, t: Type, fuel: int, mode=STRICT) -> Derivation:
    """
    Derive a judgment the generators built to hold.

    Raises
    ------
    _SetupFailed
        If the checker runs out of fuel or reports the judgment underivable.
    """
    outcome = check(system, mode, env, s, t, fuel)
    if not isinstance(outcome, Derivable):
        raise _SetupFailed(Judgment(env, s, t), outcome)
    return outcome.derivation


def _concludes(d: Derivation, env: TypeEnv, s: Type, t: Type) -> bool:
    return d.conclusion.equiv(Judgment(env, s, t))


def _valid(d: Derivation, system: SystemId, mode: ScopeMode = STRICT) -> bool:
    return validate_derivation(d, system, mode).ok


def _rederivable(d: Derivation, system: SystemId, fuel: int) -> bool:
    outcome = check(system, STRICT, d.env, d.left, d.right, fuel)
    return isinstance(outcome, (Derivable, FuelExhausted))


def _related(cfg: GenConfig, rng: np.random.Generator):
    """An environment and ``s``, ``q``, ``t`` with ``s <: q <: t`` by construction."""
    env = gen_env(cfg, rng)
    q = gen_type(cfg, env, rng)
    return env, gen_subtype(cfg, env, q, rng), q, gen_supertype(cfg, env, q, rng)


def _defaults(trials, seed, fuel) -> tuple[int, int, int]:
    return (
        settings.trials if trials is None else trials,
        settings.seed if seed is None else seed,
        settings.fuel if fuel is None else fuel,
    )


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def oracle_equivalence(max_env_len: int = 2, max_size: int = 3, depth: int = 8, fuel: int = 10_000) -> CriterionResult:
    """The original checker agrees with the oracle on an enumerated universe."""
    with _Timer(CriterionResult("oracle-equivalence")) as result:
        for env in enumerate_envs(max_env_len, max_size):
            universe = list(enumerate_types([e.name for e in env], max_size))
            for s in universe:
                for t in universe:
                    outcome = check(SystemId.ORIGINAL, STRICT, env, s, t, fuel)
                    found = oracle_derivable(SystemId.ORIGINAL, STRICT, env, s, t, depth)
                    agree = not isinstance(outcome, FuelExhausted) and (
                        isinstance(outcome, Derivable) == (found is not None)
                    )
                    result.record(agree, f"{Judgment(env, s, t)}: checker {outcome}, oracle {found is not None}")
    return result


def transitivity(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """Original-system transitivity yields valid compositions with a decreasing measure."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    with _Timer(CriterionResult("transitivity-original")) as result:
        for i in range(trials):
            rng = cfg.for_trial(i).rng()
            env, s, q, t = _related(cfg, rng)
            try:
                d1 = _derive(SystemId.ORIGINAL, env, s, q, fuel)
                d2 = _derive(SystemId.ORIGINAL, env, q, t, fuel)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            audit = Audit()
            try:
                out = transitivity_original(d1, d2, STRICT, audit)
            except errors.FsubError as e:
                result.record(False, f"trial {i}: {e}")
                continue
            ok = (
                _valid(out, SystemId.ORIGINAL)
                and _concludes(out, env, s, t)
                and not audit.violations
                and _rederivable(out, SystemId.ORIGINAL, fuel)
            )
            result.record(ok, f"trial {i}: {Judgment(env, s, t)}")
    return result


def _narrowing_instance(
    cfg: GenConfig, rng: np.random.Generator, system: SystemId, fuel: int
) -> tuple[EnvSplit, Derivation, Derivation]:
    """A split around a random pivot, a derivation under it and a narrower bound."""
    env = gen_env(cfg, rng, min_len=1)
    pivot = env.entries[int(rng.integers(0, len(env)))]
    split = EnvSplit.at(env, pivot.name)
    p = gen_subtype(cfg, split.prefix, pivot.bound, rng)
    dP = _derive(system, split.prefix, p, pivot.bound, fuel)
    m = Var(pivot.name) if rng.random() < 0.5 else gen_type(cfg, env, rng)
    n = gen_supertype(cfg, env, m, rng)
    return split, _derive(system, env, m, n, fuel), dP


def narrowing(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """Original-system narrowing replaces the pivot bound and keeps both sides."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    with _Timer(CriterionResult("narrowing-original")) as result:
        for i in range(trials):
            try:
                split, d, dP = _narrowing_instance(cfg, cfg.for_trial(i).rng(), SystemId.ORIGINAL, fuel)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            audit = Audit()
            try:
                out = narrowing_original(split, d, dP, STRICT, audit)
            except errors.FsubError as e:
                result.record(False, f"trial {i}: {e}")
                continue
            ok = (
                _valid(out, SystemId.ORIGINAL)
                and _concludes(out, split.rebound(dP.left), d.left, d.right)
                and not audit.violations
            )
            result.record(ok, f"trial {i}: narrowing {split.name} in {d.conclusion}")
    return result


def variant_claims(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """
    Transitivity never descends into a variable-headed first derivation,
    narrowing never calls transitivity, and extra-rule elimination leaves
    no SA-Extra node.
    """
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    variant = SystemId.VARIANT
    with _Timer(CriterionResult("variant-claims")) as result:
        for i in range(trials):
            rng = cfg.for_trial(i).rng()
            env, s, q, t = _related(cfg, rng)
            try:
                d1 = _derive(variant, env, s, q, fuel)
                d2 = _derive(variant, env, q, t, fuel)
                split, d, dP = _narrowing_instance(cfg, rng, variant, fuel)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            try:
                trans_audit = Audit()
                composed = transitivity_variant(d1, d2, STRICT, trans_audit)
                narrow_audit = Audit()
                narrowed = narrowing_variant(split, d, dP, STRICT, narrow_audit)
                d_xv = _derive(variant, narrowed.env, Var(split.name), split.pivot.bound, fuel)
                spliced = extra_rule_admissible(d_xv, d, STRICT)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            except errors.FsubError as e:
                result.record(False, f"trial {i}: {e}")
                continue
            ok = (
                trans_audit.descents_below("variable") == 0
                and narrow_audit.count("transitivity_variant") == 0
                and Rule.EXTRA not in spliced.tags()
                and _valid(composed, variant)
                and _valid(narrowed, variant)
            )
            result.record(ok, f"trial {i}: {d1.conclusion} ; {d2.conclusion}")
    return result


def differential(trials=None, seed=None, fuel=None, num_processes: int | Literal["max"] = 1) -> CriterionResult:
    """Original and variant agree on derivability; fewer than 1% of trials run out of fuel."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    with _Timer(CriterionResult("differential")) as result:
        report = differential_run(GenConfig(seed), (SystemId.ORIGINAL, SystemId.VARIANT), fuel, trials, num_processes)
        result.trials = report.trials
        result.passed = report.agree
        result.skipped = report.fuel_exhausted
        result.failures = [c.to_sexp() for c in report.disagree]
        if trials and report.fuel_exhausted / trials >= 0.01:
            result.failures.append(f"fuel exhausted in {report.fuel_exhausted} of {trials} trials")
    return result


def translations(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """Both system translations validate and keep the conclusion."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    with _Timer(CriterionResult("translations")) as result:
        for i in range(trials):
            rng = cfg.for_trial(i).rng()
            env, s, q, _ = _related(cfg, rng)
            try:
                d = _derive(SystemId.ORIGINAL, env, s, q, fuel)
                v = _derive(SystemId.VARIANT, env, s, q, fuel)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            try:
                to_variant = orig_to_variant(d, STRICT)
                to_original = variant_to_orig(v, STRICT)
                round_trip = variant_to_orig(to_variant, STRICT)
            except errors.FsubError as e:
                result.record(False, f"trial {i}: {e}")
                continue
            ok = (
                _valid(to_variant, SystemId.VARIANT)
                and _valid(to_original, SystemId.ORIGINAL)
                and all(_concludes(x, env, s, q) for x in (to_variant, to_original, round_trip))
            )
            result.record(ok, f"trial {i}: {Judgment(env, s, q)}")
    return result


def permutation(trials=None, seed=None, fuel=None, num_processes: int | Literal["max"] = 1) -> CriterionResult:
    """Lax derivability is unchanged by permuting the environment."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    with _Timer(CriterionResult("permutation")) as result:
        report = permutation_run(GenConfig(seed, mode=ScopeMode.LAX), trials, fuel, num_processes)
        result.trials = report.trials
        result.passed = report.agree
        result.skipped = report.fuel_exhausted
        result.failures = [c.to_sexp() for c in report.disagree]
    return result


def lax_transfer(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """Lax derivations of strict instances are strict derivations."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    with _Timer(CriterionResult("lax-to-strict")) as result:
        for i in range(trials):
            rng = cfg.for_trial(i).rng()
            system = (SystemId.ORIGINAL, SystemId.VARIANT)[i % 2]
            env, s, q, _ = _related(cfg, rng)
            try:
                d = _derive(system, env, s, q, fuel, mode=ScopeMode.LAX)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            try:
                out = lax_to_strict(d, system)
            except errors.FsubError as e:
                result.record(False, f"trial {i}: {e}")
                continue
            result.record(_valid(out, system), f"trial {i}: {d.conclusion}")
    return result


def reflexivity_universe(max_env_len: int = 2, max_bound_size: int = 3, max_size: int = 5) -> CriterionResult:
    """Reflexivity validates for every type of an enumerated universe."""
    with _Timer(CriterionResult("reflexivity")) as result:
        for env in enumerate_envs(max_env_len, max_bound_size):
            for t in enumerate_types([e.name for e in env], max_size):
                try:
                    d = reflexivity(env, t, STRICT)
                except errors.FsubError as e:
                    result.record(False, f"{Judgment(env, t, t)}: {e}")
                    continue
                ok = _valid(d, SystemId.ORIGINAL) and _concludes(d, env, t, t)
                result.record(ok, str(Judgment(env, t, t)))
    return result


def serialization(trials=None, seed=None, fuel=None, cfg: GenConfig | None = None) -> CriterionResult:
    """Serializing then parsing a derivation is the identity, byte for byte."""
    trials, seed, fuel = _defaults(trials, seed, fuel)
    cfg = cfg or GenConfig(seed)
    with _Timer(CriterionResult("serialization")) as result:
        for i in range(trials):
            rng = cfg.for_trial(i).rng()
            system = (SystemId.ORIGINAL, SystemId.VARIANT)[i % 2]
            env, s, _, t = _related(cfg, rng)
            try:
                d = _derive(system, env, s, t, fuel)
            except _SetupFailed as e:
                e.settle(result, i)
                continue
            text = serialize_derivation(d)
            parsed = parse_derivation(text)
            result.record(parsed == d and serialize_derivation(parsed) == text, f"trial {i}: {text}")
    return result


CRITERIA: dict[str, Callable[..., CriterionResult]] = {
    "oracle-equivalence": oracle_equivalence,
    "transitivity-original": transitivity,
    "narrowing-original": narrowing,
    "variant-claims": variant_claims,
    "differential": differential,
    "translations": translations,
    "permutation": permutation,
    "lax-to-strict": lax_transfer,
    "reflexivity": reflexivity_universe,
    "serialization": serialization,
}

_EXHAUSTIVE = {"oracle-equivalence", "reflexivity"}


def run_suite(
    trials: int | None = None,
    seed: int | None = None,
    fuel: int | None = None,
    criteria: list[str] | None = None,
) -> pd.DataFrame:
    """
    Run acceptance criteria and tabulate their results.

    Parameters
    ----------
    trials : int, optional
        Trials per randomized criterion. Permutation and lax-to-strict run a
        tenth as many. Defaults to the configured trial count.
    seed : int, optional
    fuel : int, optional
    criteria : list[str], optional
        Names from :data:`CRITERIA`. Defaults to all of them.

    Returns
    -------
    pd.DataFrame
        One row per criterion, indexed by name.
    """
    trials, seed, fuel = _defaults(trials, seed, fuel)
    names = list(CRITERIA) if criteria is None else criteria
    unknown = set(names) - set(CRITERIA)
    if unknown:
        raise ValueError(f"unknown criteria: {', '.join(sorted(unknown))}")

    results = []
    for name in names:
        func = CRITERIA[name]
        if name in _EXHAUSTIVE:
            results.append(func())
        elif name in {"permutation", "lax-to-strict"}:
            results.append(func(max(1, trials // 10), seed, fuel))
        else:
            results.append(func(trials, seed, fuel))

    frame = pd.DataFrame(
        [
            {
                "name": r.name,
                "trials": r.trials,
                "passed": r.passed,
                "skipped": r.skipped,
                "failed": len(r.failures),
                "seconds": round(r.seconds, 3),
                "ok": r.ok,
            }
            for r in results
        ]
    )
    return frame.set_index("name")
