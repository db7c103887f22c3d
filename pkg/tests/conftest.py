"""
Shared fixtures and configuration for fsub tests.
"""

import os

import pytest
from hypothesis import HealthCheck
from hypothesis import settings as hypothesis_settings

from fsub import checker, parse_env, parse_type, serialize_derivation
from fsub._settings import settings
from fsub.rules import SystemId
from fsub.syntax import ScopeMode

hypothesis_settings.register_profile(
    "dev", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
hypothesis_settings.register_profile(
    "ci", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
hypothesis_settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def chain_env():
    """Return the environment A <: Top, B <: A, C <: B."""
    return parse_env("A <: Top, B <: A, C <: B")


@pytest.fixture
def derive_strict():
    """Return a helper that derives a judgment given in surface syntax, or fails the test."""

    def derive(env, s, t, system=SystemId.ORIGINAL, mode=ScopeMode.STRICT):
        env = parse_env(env) if isinstance(env, str) else env
        outcome = checker.check(system, mode, env, parse_type(s), parse_type(t), 1000)
        assert isinstance(outcome, checker.Derivable), f"{s} <: {t} is {outcome}"
        return outcome.derivation

    return derive


@pytest.fixture
def derivation_file(tmp_path):
    """Return a helper writing a derivation to a file and returning the path."""
    counter = iter(range(1_000_000))

    def write(d):
        path = tmp_path / f"d{next(counter)}.sexp"
        path.write_text(serialize_derivation(d) + "\n", encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def no_debug(monkeypatch):
    """Turn off transformer input and output validation."""
    monkeypatch.setattr(settings, "debug", False)
