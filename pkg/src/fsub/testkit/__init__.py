"""
Oracle, generators and property harnesses for the subtyping kernel.
"""

from fsub.testkit.generators import (
    GenConfig,
    enumerate_envs,
    enumerate_types,
    gen_env,
    gen_instance,
    gen_subtype,
    gen_supertype,
    gen_type,
    splitmix64,
    trial_seed,
)
from fsub.testkit.harness import (
    Counterexample,
    DiffReport,
    differential_run,
    permutation_run,
    shrink_instance,
)
from fsub.testkit.oracle import enumerate_oracle, oracle_derivable
from fsub.testkit.suite import CRITERIA, CriterionResult, run_suite

__all__ = [
    "CRITERIA",
    "Counterexample",
    "CriterionResult",
    "DiffReport",
    "GenConfig",
    "differential_run",
    "enumerate_envs",
    "enumerate_oracle",
    "enumerate_types",
    "gen_env",
    "gen_instance",
    "gen_subtype",
    "gen_supertype",
    "gen_type",
    "oracle_derivable",
    "permutation_run",
    "run_suite",
    "shrink_instance",
    "splitmix64",
    "trial_seed",
]
