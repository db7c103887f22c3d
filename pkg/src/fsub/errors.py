"""
This module provides custom exceptions for fsub.
"""


class FsubError(Exception):
    # Base class for every error raised by fsub
    pass


class ParseError(FsubError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class ReservedNameError(ParseError):
    def __init__(self, name: str, position: int | None = None):
        self.name = name
        super().__init__(f"'{name}' is not a legal variable name", position)


class DuplicateNameError(FsubError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"{name} is bound more than once in the environment")


class ArityError(FsubError):
    def __init__(self, rule, expected: int, got: int):
        msg = f"{rule} takes {expected} premise(s), got {got}"
        super().__init__(msg)


class IllFormedEnvError(FsubError):
    # Environment breaks the scoping discipline of the requested mode
    pass


class UnknownVariableError(FsubError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(f"unbound type variable(s): {', '.join(self.names)}")


class NotWellScopedError(FsubError):
    # A type mentions variables its environment does not bind
    pass


class NameClashError(FsubError):
    # Weakening target rebinds a name with a different bound
    pass


class JudgmentMismatchError(FsubError):
    # Derivations handed to a transformer do not fit its contract
    pass


class InvalidInputError(FsubError):
    def __init__(self, operation: str, report):
        self.report = report
        super().__init__(f"{operation}: input derivation is not valid\n{report}")


class ConstructionError(FsubError):
    def __init__(self, operation: str, report):
        self.report = report
        super().__init__(f"{operation}: produced an invalid derivation\n{report}")


class ScopeViolationError(FsubError):
    def __init__(self, path: tuple[int, ...], reason: str):
        self.path = path
        self.reason = reason
        where = "/".join(str(i) for i in path) or "root"
        super().__init__(f"scope violation at {where}: {reason}")


class DepthGuardError(FsubError):
    def __init__(self, depth: int, limit: int):
        super().__init__(f"oracle depth {depth} exceeds the guardrail of {limit}")


class ModeError(FsubError):
    # Operation is not meaningful under the requested scope mode
    pass


class UsageError(FsubError):
    # Command line could not be interpreted
    pass
