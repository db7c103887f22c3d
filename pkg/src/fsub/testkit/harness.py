"""
Differential and permutation harnesses with counterexample shrinking.
"""

from __future__ import annotations

import logging
import multiprocessing
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field, replace
from typing import Literal

import pandas as pd

from fsub import errors
from fsub.checker import CheckOutcome, Derivable, Fuel, FuelExhausted, check
from fsub.rules import SystemId, type_to_sexp
from fsub.syntax import (
    TOP,
    Arrow,
    Forall,
    ScopeMode,
    Top,
    Type,
    TypeEnv,
    free_vars,
    render_type,
    size,
)
from fsub.testkit.generators import GenConfig, gen_instance

_logger = logging.getLogger(__name__)

Recheck = Callable[[TypeEnv, Type, Type], dict[str, CheckOutcome]]


def _field(name: str, body: str) -> str:
    return f"({name} {body})" if body else f"({name})"


def _env_sexp(env: TypeEnv) -> str:
    return " ".join(f"({e.name} {type_to_sexp(e.bound)})" for e in env)


@dataclass
class Counterexample:
    """
    An instance on which two checks disagree about derivability.

    Attributes
    ----------
    env : TypeEnv
    left, right : Type
    outcomes : dict[str, CheckOutcome]
        Outcome per label (a system name, or ``given``/``permuted``).
    shrunk : bool
        Whether :func:`shrink_instance` has minimized the instance.
    permuted_env : TypeEnv, optional
        The permuted environment of a permutation counterexample.
    """

    env: TypeEnv
    left: Type
    right: Type
    outcomes: dict[str, CheckOutcome]
    shrunk: bool = False
    permuted_env: TypeEnv | None = None

    @property
    def genuine(self) -> bool:
        return _genuine(self.outcomes)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.env), size(self.left), size(self.right)

    def render_text(self) -> str:
        outcomes = " ".join(f"{label}={outcome}" for label, outcome in self.outcomes.items())
        judgment = f"{self.env} |- {render_type(self.left)} <: {render_type(self.right)}".lstrip()
        text = f"{judgment} : {outcomes}"
        if self.permuted_env is not None:
            text += f" (permuted: {self.permuted_env})"
        return text

    def to_sexp(self) -> str:
        outcomes = " ".join(f"({label} {outcome})" for label, outcome in self.outcomes.items())
        parts = [
            _field("env", _env_sexp(self.env)),
            _field("left", type_to_sexp(self.left)),
            _field("right", type_to_sexp(self.right)),
            _field("outcomes", outcomes),
            _field("shrunk", "true" if self.shrunk else "false"),
        ]
        if self.permuted_env is not None:
            parts.append(_field("permuted", _env_sexp(self.permuted_env)))
        return "(counterexample " + " ".join(parts) + ")"


def _genuine(outcomes: dict[str, CheckOutcome]) -> bool:
    labels = {outcome.label for outcome in outcomes.values()}
    return labels == {"derivable", "not-derivable"}


@dataclass
class DiffReport:
    """
    Tally of a harness run.

    ``trials == agree + len(disagree) + fuel_exhausted`` always holds.
    """

    trials: int = 0
    agree: int = 0
    disagree: list[Counterexample] = field(default_factory=list)
    fuel_exhausted: int = 0

    def __post_init__(self):
        if self.trials != self.agree + len(self.disagree) + self.fuel_exhausted:
            raise ValueError("report tallies do not add up to the trial count")

    def to_frame(self) -> pd.DataFrame:
        """One row per disagreement, one outcome column per label."""
        rows = []
        for c in self.disagree:
            row = {
                "env": str(c.env),
                "left": render_type(c.left),
                "right": render_type(c.right),
                "shrunk": c.shrunk,
            }
            row.update({label: outcome.label for label, outcome in c.outcomes.items()})
            rows.append(row)
        if not rows:
            return pd.DataFrame(columns=["env", "left", "right", "shrunk"])
        return pd.DataFrame(rows)

    def render_text(self) -> str:
        lines = [
            f"trials: {self.trials}",
            f"agree: {self.agree}",
            f"fuel-exhausted: {self.fuel_exhausted}",
            f"disagreements: {len(self.disagree)}",
        ]
        lines.extend(f"  {c.render_text()}" for c in self.disagree)
        return "\n".join(lines)

    def render_sexp(self) -> str:
        disagreements = " ".join(c.to_sexp() for c in self.disagree)
        return (
            f"(diff-report (trials {self.trials}) (agree {self.agree}) "
            f"(fuel-exhausted {self.fuel_exhausted}) "
            f"{_field('disagreements', disagreements)})"
        )


# ---------------------------------------------------------------------------
# Shrinking
# ---------------------------------------------------------------------------


def _type_shrinks(t: Type) -> Iterator[Type]:
    if not isinstance(t, Top):
        yield TOP
    match t:
        case Arrow(dom, cod):
            yield dom
            yield cod
            for smaller in _type_shrinks(dom):
                yield Arrow(smaller, cod)
            for smaller in _type_shrinks(cod):
                yield Arrow(dom, smaller)
        case Forall(binder, bound, body):
            if binder not in free_vars(body):
                yield body
            for smaller in _type_shrinks(bound):
                yield Forall(binder, smaller, body)
            for smaller in _type_shrinks(body):
                yield Forall(binder, bound, smaller)


def _instance_shrinks(c: Counterexample) -> Iterator[tuple[TypeEnv, Type, Type]]:
    env, left, right = c.env, c.left, c.right
    for entry in env:
        yield env.without(entry.name), left, right
    for entry in env:
        for smaller in _type_shrinks(entry.bound):
            yield env.with_bound(entry.name, smaller), left, right
    for smaller in _type_shrinks(left):
        yield env, smaller, right
    for smaller in _type_shrinks(right):
        yield env, left, smaller


def shrink_instance(c: Counterexample, recheck: Recheck) -> Counterexample:
    """
    Greedily minimize a counterexample.

    Parameters
    ----------
    c : Counterexample
        A genuine counterexample.
    recheck : callable
        Maps ``(env, left, right)`` to fresh outcomes per label.

    Returns
    -------
    Counterexample
        A counterexample no single shrink step can reduce further while it
        still disagrees, with ``shrunk`` set.
    """
    current = c
    improved = True
    while improved:
        improved = False
        for env, left, right in _instance_shrinks(current):
            try:
                outcomes = recheck(env, left, right)
            except errors.FsubError:
                continue
            if _genuine(outcomes):
                current = replace(current, env=env, left=left, right=right, outcomes=outcomes)
                improved = True
                break
    return replace(current, shrunk=True)


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Recheck:
    systems: tuple[SystemId, SystemId]
    mode: ScopeMode
    fuel: int

    @property
    def labels(self) -> list[str]:
        first, second = (str(system) for system in self.systems)
        # Self-comparisons still report two outcomes
        return [first, second] if first != second else [f"{first}-1", f"{second}-2"]

    def __call__(self, env: TypeEnv, left: Type, right: Type) -> dict[str, CheckOutcome]:
        return {
            label: check(system, self.mode, env, left, right, self.fuel)
            for label, system in zip(self.labels, self.systems)
        }


def _budget(fuel: Fuel | int) -> int:
    return fuel.remaining if isinstance(fuel, Fuel) else int(fuel)


def _processes(num_processes: int | Literal["max"], trials: int) -> int:
    cpu_count = multiprocessing.cpu_count()
    if num_processes == "max":
        processes = cpu_count
    elif num_processes > cpu_count:
        _logger.debug(
            f"{num_processes} processes requested, "
            f"but there are only {cpu_count} CPU(s) available."
        )
        processes = cpu_count
    else:
        processes = num_processes
    return max(1, min(processes, trials))


def _map(func, tasks: list, num_processes: int | Literal["max"]) -> list:
    processes = _processes(num_processes, len(tasks))
    if processes == 1:
        _logger.debug("Running trials sequentially...")
        return [func(task) for task in tasks]
    _logger.debug(f"Running trials in parallel with {processes} processes...")
    with multiprocessing.Pool(processes=processes) as pool:
        results = pool.map(func=func, iterable=tasks)
        pool.close()
        pool.join()
    return results


def _tally(results: list[tuple[str, Counterexample | None]]) -> DiffReport:
    report = DiffReport()
    for kind, counterexample in results:
        report.trials += 1
        if kind == "fuel":
            report.fuel_exhausted += 1
        elif kind == "agree":
            report.agree += 1
        else:
            report.disagree.append(counterexample)
    return report


def _classify(outcomes: dict[str, CheckOutcome]) -> str:
    if any(isinstance(o, FuelExhausted) for o in outcomes.values()):
        return "fuel"
    derivable = {isinstance(o, Derivable) for o in outcomes.values()}
    return "agree" if len(derivable) == 1 else "disagree"


def _differential_trial(task) -> tuple[str, Counterexample | None]:
    cfg, trial, recheck = task
    env, left, right = gen_instance(cfg, cfg.for_trial(trial).rng())
    outcomes = recheck(env, left, right)
    kind = _classify(outcomes)
    if kind != "disagree":
        return kind, None
    found = Counterexample(env, left, right, outcomes)
    _logger.warning(f"trial {trial}: {found.render_text()}")
    return kind, shrink_instance(found, recheck)


def differential_run(
    cfg: GenConfig,
    systems: tuple[SystemId, SystemId],
    fuel: Fuel | int,
    trials: int,
    num_processes: int | Literal["max"] = 1,
) -> DiffReport:
    """
    Compare derivability in two systems on generated instances.

    Parameters
    ----------
    cfg : GenConfig
        Instance stream; trial ``i`` draws from ``cfg.for_trial(i)``.
    systems : tuple[SystemId, SystemId]
        The systems to compare.
    fuel : Fuel | int
        Budget given afresh to every check.
    trials : int
        Number of instances.
    num_processes : int | 'max', optional
        Worker processes. Defaults to 1.

    Returns
    -------
    DiffReport
        Tallies in trial order, with every disagreement shrunk.
    """
    recheck = _Recheck(tuple(systems), cfg.mode, _budget(fuel))
    tasks = [(cfg, i, recheck) for i in range(trials)]
    _logger.info(f"differential run: {systems[0]} vs {systems[1]}, {trials} trial(s)")
    report = _tally(_map(_differential_trial, tasks, num_processes))
    _logger.info(f"{report.agree} agree, {len(report.disagree)} disagree, {report.fuel_exhausted} out of fuel")
    return report


def _permutation_trial(task) -> tuple[str, Counterexample | None]:
    cfg, trial, budget = task
    rng = cfg.for_trial(trial).rng()
    env, left, right = gen_instance(cfg, rng)
    permuted = env.permuted(rng.permutation(len(env)))
    outcomes = {
        "given": check(SystemId.ORIGINAL, ScopeMode.LAX, env, left, right, budget),
        "permuted": check(SystemId.ORIGINAL, ScopeMode.LAX, permuted, left, right, budget),
    }
    kind = _classify(outcomes)
    if kind != "disagree":
        return kind, None
    found = Counterexample(env, left, right, outcomes, permuted_env=permuted)
    _logger.warning(f"trial {trial}: {found.render_text()}")
    return kind, found


def permutation_run(
    cfg: GenConfig,
    trials: int,
    fuel: Fuel | int,
    num_processes: int | Literal["max"] = 1,
) -> DiffReport:
    """
    Check that lax derivability ignores the order of environment entries.

    Raises
    ------
    ModeError
        If ``cfg`` generates strict instances.
    """
    if cfg.mode is ScopeMode.STRICT:
        raise errors.ModeError("permutation runs need lax instances")
    tasks = [(cfg, i, _budget(fuel)) for i in range(trials)]
    _logger.info(f"permutation run: {trials} trial(s)")
    return _tally(_map(_permutation_trial, tasks, num_processes))
