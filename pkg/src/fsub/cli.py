"""
Command-line front end.

Every command is a batch job: arguments in, results on stdout, one-line
diagnostics on stderr, and an exit code that depends only on the outcome.

====  ==========================================
Code  Meaning
====  ==========================================
0     derivable / success
1     not derivable / disagreements found
2     fuel exhausted
3     parse, validation or other input error
4     usage error
====  ==========================================
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path
from typing import BinaryIO

from fsub import errors
from fsub._settings import settings
from fsub.checker import Derivable, check
from fsub.rules import (
    Derivation,
    SystemId,
    parse_derivation,
    render_derivation,
    serialize_derivation,
    validate_derivation,
)
from fsub.syntax import Binding, ScopeMode, parse_env, parse_type
from fsub.testkit import (
    CRITERIA,
    GenConfig,
    differential_run,
    enumerate_oracle,
    permutation_run,
    run_suite,
)
from fsub.transforms import (
    EnvSplit,
    eliminate_extra,
    narrowing_original,
    narrowing_variant,
    orig_to_variant,
    reflexivity,
    transitivity_original,
    transitivity_variant,
    variant_to_orig,
)

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 3
EXIT_USAGE = 4


class _Exit(Exception):
    def __init__(self, status: int):
        self.status = status


class _ArgumentParser(argparse.ArgumentParser):
    """Parser that reports through exceptions instead of exiting the process."""

    out: io.StringIO | None = None

    def error(self, message):
        raise errors.UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if message:
            self._print_message(message)
        raise _Exit(status)

    def _print_message(self, message, file=None):
        if message and self.out is not None:
            self.out.write(message)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def _processes(text: str) -> int | str:
    return text if text == "max" else _positive(text)


def build_parser(out: io.StringIO | None = None) -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--system", choices=[s.value for s in SystemId], default=SystemId.ORIGINAL.value)
    common.add_argument("--scoping", choices=[m.value for m in ScopeMode], default=ScopeMode.STRICT.value)
    common.add_argument("--fuel", type=_positive, default=settings.fuel)
    common.add_argument("--format", choices=["text", "sexp"], default="text")
    common.add_argument("--verbose", action="store_true", help="log to stderr")

    generated = _ArgumentParser(add_help=False)
    generated.add_argument("--seed", type=int, default=settings.seed)
    generated.add_argument("--trials", type=_nonnegative, default=settings.trials)
    generated.add_argument("--processes", type=_processes, default=1)
    generated.add_argument("--max-type-size", type=_positive, default=settings.max_type_size)
    generated.add_argument("--max-env-len", type=_nonnegative, default=settings.max_env_len)

    parser = _ArgumentParser(prog="fsub", description="Subtyping derivations for System F<:")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def command(name: str, help: str, *parents):
        sub = commands.add_parser(name, help=help, parents=[common, *parents])
        return sub

    sub = command("check", "decide ENV |- S <: T")
    sub.add_argument("env")
    sub.add_argument("s")
    sub.add_argument("t")

    sub = command("derive", "print the derivation of ENV |- S <: T")
    sub.add_argument("env")
    sub.add_argument("s")
    sub.add_argument("t")

    sub = command("validate", "validate a derivation file")
    sub.add_argument("derivation")

    sub = command("transit", "compose derivations of S <: Q and Q <: T")
    sub.add_argument("d1")
    sub.add_argument("d2")

    sub = command("narrow", "narrow the bound of X from Q to the left side of DP")
    sub.add_argument("env1")
    sub.add_argument("x")
    sub.add_argument("q")
    sub.add_argument("env2")
    sub.add_argument("d")
    sub.add_argument("dp")

    sub = command("translate", "translate a derivation out of --system")
    sub.add_argument("derivation")

    sub = command("reflexivity", "derive ENV |- T <: T")
    sub.add_argument("env")
    sub.add_argument("t")

    sub = command("oracle", "enumerate derivations by brute force")
    sub.add_argument("env")
    sub.add_argument("s")
    sub.add_argument("t")
    sub.add_argument("--depth", type=_positive, default=6)

    sub = command("fuzz", "compare the original and variant checkers", generated)
    sub.add_argument("--counterexample-dir", type=Path)

    command("permute", "check lax derivability under environment permutations", generated)

    sub = command("suite", "run the acceptance criteria", generated)
    sub.add_argument("--criteria", nargs="+", choices=list(CRITERIA))

    for p in (parser, common, generated, *commands.choices.values()):
        p.out = out
    return parser


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


class _Inputs:
    def __init__(self, stdin: BinaryIO | bytes | None):
        self._stdin = stdin
        self._stdin_text: str | None = None

    def stdin(self) -> str:
        if self._stdin_text is None:
            data = self._stdin if isinstance(self._stdin, bytes) else (self._stdin.read() if self._stdin else b"")
            self._stdin_text = data.decode("utf-8")
        return self._stdin_text

    def text(self, arg: str) -> str:
        """An inline argument, or the contents of ``@file``."""
        if arg.startswith("@"):
            return Path(arg[1:]).read_text(encoding="utf-8").strip()
        return arg

    def derivation(self, path: str) -> Derivation:
        text = self.stdin() if path == "-" else Path(path).read_text(encoding="utf-8")
        return parse_derivation(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _write_derivation(out: io.StringIO, d: Derivation, fmt: str):
    out.write((serialize_derivation(d) if fmt == "sexp" else render_derivation(d)) + "\n")


def _cmd_check(args, inputs, out) -> int:
    env = parse_env(inputs.text(args.env))
    s, t = parse_type(inputs.text(args.s)), parse_type(inputs.text(args.t))
    outcome = check(args.system, args.scoping, env, s, t, args.fuel)
    # sexp output stays parseable, so a derivable check prints the derivation itself
    if isinstance(outcome, Derivable) and (args.command == "derive" or args.format == "sexp"):
        _write_derivation(out, outcome.derivation, args.format)
    else:
        out.write(f"{outcome}\n")
    return outcome.exit_code


def _cmd_validate(args, inputs, out) -> int:
    report = validate_derivation(inputs.derivation(args.derivation), args.system, args.scoping)
    out.write(f"{report}\n")
    return EXIT_OK if report.ok else EXIT_INPUT


def _cmd_transit(args, inputs, out) -> int:
    d1, d2 = inputs.derivation(args.d1), inputs.derivation(args.d2)
    if args.system is SystemId.ORIGINAL:
        d = transitivity_original(d1, d2, args.scoping)
    else:
        d = transitivity_variant(d1, d2, args.scoping)
    _write_derivation(out, d, args.format)
    return EXIT_OK


def _cmd_narrow(args, inputs, out) -> int:
    split = EnvSplit(
        parse_env(inputs.text(args.env1)),
        Binding(args.x, parse_type(inputs.text(args.q))),
        parse_env(inputs.text(args.env2)),
    )
    d, dp = inputs.derivation(args.d), inputs.derivation(args.dp)
    if args.system is SystemId.ORIGINAL:
        result = narrowing_original(split, d, dp, args.scoping)
    else:
        result = narrowing_variant(split, d, dp, args.scoping)
    _write_derivation(out, result, args.format)
    return EXIT_OK


def _cmd_translate(args, inputs, out) -> int:
    d = inputs.derivation(args.derivation)
    translated = {
        SystemId.ORIGINAL: orig_to_variant,
        SystemId.VARIANT: variant_to_orig,
        SystemId.VARIANT_PLUS: eliminate_extra,
    }[args.system](d, args.scoping)
    _write_derivation(out, translated, args.format)
    return EXIT_OK


def _cmd_reflexivity(args, inputs, out) -> int:
    env = parse_env(inputs.text(args.env))
    _write_derivation(out, reflexivity(env, parse_type(inputs.text(args.t)), args.scoping), args.format)
    return EXIT_OK


def _cmd_oracle(args, inputs, out) -> int:
    env = parse_env(inputs.text(args.env))
    s, t = parse_type(inputs.text(args.s)), parse_type(inputs.text(args.t))
    found = enumerate_oracle(args.system, args.scoping, env, s, t, args.depth)
    if args.format == "text":
        out.write(f"{len(found)} derivation(s)\n")
    for d in found:
        _write_derivation(out, d, args.format)
    return EXIT_OK if found else EXIT_NEGATIVE


def _gen_config(args, mode: ScopeMode) -> GenConfig:
    return GenConfig(args.seed, args.max_type_size, args.max_env_len, mode)


def _cmd_fuzz(args, inputs, out) -> int:
    cfg = _gen_config(args, args.scoping)
    report = differential_run(cfg, (SystemId.ORIGINAL, SystemId.VARIANT), args.fuel, args.trials, args.processes)
    out.write((report.render_sexp() if args.format == "sexp" else report.render_text()) + "\n")
    if args.counterexample_dir is not None and report.disagree:
        args.counterexample_dir.mkdir(parents=True, exist_ok=True)
        for i, c in enumerate(report.disagree):
            path = args.counterexample_dir / f"counterexample-{i:04d}.sexp"
            path.write_text(c.to_sexp() + "\n", encoding="utf-8")
            _logger.info(f"wrote {path}")
    return EXIT_NEGATIVE if report.disagree else EXIT_OK


def _cmd_permute(args, inputs, out) -> int:
    report = permutation_run(_gen_config(args, ScopeMode.LAX), args.trials, args.fuel, args.processes)
    out.write((report.render_sexp() if args.format == "sexp" else report.render_text()) + "\n")
    return EXIT_NEGATIVE if report.disagree else EXIT_OK


def _cmd_suite(args, inputs, out) -> int:
    frame = run_suite(args.trials, args.seed, args.fuel, args.criteria)
    out.write(frame.to_string() + "\n")
    return EXIT_OK if frame["ok"].all() else EXIT_NEGATIVE


_COMMANDS = {
    "check": _cmd_check,
    "derive": _cmd_check,
    "validate": _cmd_validate,
    "transit": _cmd_transit,
    "narrow": _cmd_narrow,
    "translate": _cmd_translate,
    "reflexivity": _cmd_reflexivity,
    "oracle": _cmd_oracle,
    "fuzz": _cmd_fuzz,
    "permute": _cmd_permute,
    "suite": _cmd_suite,
}


def run(argv: list[str], stdin: BinaryIO | bytes | None = None) -> tuple[bytes, bytes, int]:
    """
    Run one command.

    Parameters
    ----------
    argv : list[str]
        Arguments, without the program name.
    stdin : BinaryIO | bytes, optional
        Read when a derivation path is ``-``.

    Returns
    -------
    tuple[bytes, bytes, int]
        stdout, stderr and the exit code.
    """
    out, err = io.StringIO(), io.StringIO()
    handler = None
    package_logger = logging.getLogger("fsub")
    try:
        args = build_parser(out).parse_args(argv)
        args.system = SystemId(args.system)
        args.scoping = ScopeMode(args.scoping)
        if args.verbose:
            handler = logging.StreamHandler(err)
            handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
            package_logger.addHandler(handler)
            package_logger.setLevel(logging.DEBUG)
        code = _COMMANDS[args.command](args, _Inputs(stdin), out)
    except _Exit as e:
        code = e.status
    except errors.UsageError as e:
        err.write(f"{e}\n")
        code = EXIT_USAGE
    except (errors.FsubError, OSError, UnicodeDecodeError) as e:
        err.write(f"error: {str(e).splitlines()[0]}\n")
        code = EXIT_INPUT
    except RecursionError:
        err.write("error: input is nested too deeply\n")
        code = EXIT_INPUT
    finally:
        if handler is not None:
            package_logger.removeHandler(handler)
            package_logger.setLevel(logging.NOTSET)
    return out.getvalue().encode("utf-8"), err.getvalue().encode("utf-8"), code


def main() -> None:
    stdout, stderr, code = run(sys.argv[1:], sys.stdin.buffer)
    sys.stdout.buffer.write(stdout)
    sys.stderr.buffer.write(stderr)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
