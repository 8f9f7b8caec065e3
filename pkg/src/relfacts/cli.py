"""``relfacts`` command line: run and validate scenario files, query the oracles.

Exit codes: 0 success, 2 parse or usage error, 3 runtime contract
violation, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Sequence

from . import oracles
from .errors import RelfactsError
from .facts import DEFAULT_THRESHOLD
from .report import build_report, fmt, to_csv, to_json, to_text
from .scenario import ParseError, ScenarioRuntimeError, interpret, parse

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

SEED_ENV = "RELFACTS_SEED"
R = 1 / math.sqrt(2)

# named inputs for the oracle subcommands
FIXTURES = {
    "trace": {
        "bell": {"ket": [R, 0, 0, R], "dims": [2, 2], "keep": [0]},
        "product": {"ket": [0.6, 0.8, 0, 0], "dims": [2, 2], "keep": [1]},
    },
    "stability": {
        # populations only; every projector is diagonal so nothing interferes
        "diagonal": {"rho_diag": [0.2, 0.3, 0.5], "blocks": [[0, 1], [2]], "target": [1, 2]},
        # (0.6|up,ptr up> + 0.8|down,ptr down>) with the symmetric target
        "wigner": {"ket": [0, 0.6, 0, 0, 0, 0.8], "blocks": [[0, 3], [1, 4], [2, 5]],
                   "target_ket": [0, R, 0, 0, 0, R]},
    },
}


class UsageFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageFailure(message)


def _numbers(text: str, kind=complex) -> list:
    try:
        return [kind(x.strip().replace("i", "j")) if kind is complex else kind(x.strip())
                for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageFailure(f"malformed number list {text!r}") from exc


def _blocks(text: str) -> list[list[int]]:
    return [_numbers(b, int) for b in text.split(";")]


def _num(x: complex) -> str:
    x = complex(x)
    if x.imag == 0.0:
        return fmt(x.real)
    return f"{fmt(x.real)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag))}i"


def _print_matrix(out, m) -> None:
    for row in m:
        out.write(" ".join(_num(x) for x in row) + "\n")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _seed(flag: int | None) -> int | None:
    """Seed precedence: --seed, then $RELFACTS_SEED, then the file (None here)."""
    if flag is not None:
        seed, source = flag, "--seed"
    else:
        env = os.environ.get(SEED_ENV)
        if env is None or env == "":
            return None
        try:
            seed, source = int(env, 0), SEED_ENV
        except ValueError as exc:
            raise UsageFailure(f"{SEED_ENV}={env!r} is not an integer") from exc
    if not 0 <= seed < 2**64:
        raise UsageFailure(f"{source} {seed} outside [0, 2**64)")
    return seed


def cmd_run(args, out) -> int:
    source = _read(args.path)
    ast = parse(source)
    if not (args.threshold >= 0.0 and math.isfinite(args.threshold)):
        raise UsageFailure(f"--threshold {args.threshold!r} must be a finite non-negative number")
    result = interpret(ast, seed_override=_seed(args.seed), threshold=args.threshold)
    if args.format == "json":
        out.write(to_json(build_report(result)))
    elif args.format == "csv":
        out.write(to_csv(result))
    else:
        out.write(to_text(result))
    return EXIT_OK


def cmd_validate(args, out) -> int:
    parse(_read(args.path))
    return EXIT_OK


def cmd_oracle_chain(args, out) -> int:
    w_ba, w_cb = _numbers(args.wba), _numbers(args.wcb)
    if len(w_ba) != len(w_cb) or not w_ba:
        raise UsageFailure("--wba and --wcb need the same, non-zero number of entries")
    res = oracles.chain(w_ba, w_cb)
    for key in ("p_unitary", "p_collapse", "deficit", "cross_terms"):
        out.write(f"{key} {fmt(res[key])}\n")
    return EXIT_OK


def cmd_oracle_trace(args, out) -> int:
    if args.fixture:
        fx = FIXTURES["trace"][args.fixture]
        ket, dims, keep = fx["ket"], fx["dims"], fx["keep"]
    else:
        if not (args.ket and args.dims and args.keep):
            raise UsageFailure("give --fixture, or all of --ket, --dims and --keep")
        ket, dims, keep = _numbers(args.ket), _numbers(args.dims, int), _numbers(args.keep, int)
    total = 1
    for d in dims:
        total *= d
    if len(ket) != total or any(d < 1 for d in dims):
        raise UsageFailure(f"ket has {len(ket)} entries, dims {dims} need {total}")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise UsageFailure(f"keep indices {keep} out of range")
    _print_matrix(out, oracles.partial_trace(oracles.outer(ket), dims, keep))
    return EXIT_OK


def cmd_oracle_stability(args, out) -> int:
    if args.fixture:
        fx = FIXTURES["stability"][args.fixture]
        ket, diag, blocks = fx.get("ket"), fx.get("rho_diag"), fx["blocks"]
        target, target_ket = fx.get("target"), fx.get("target_ket")
    else:
        ket = _numbers(args.ket) if args.ket else None
        diag = _numbers(args.rho_diag, float) if args.rho_diag else None
        blocks = _blocks(args.blocks) if args.blocks else None
        target = _numbers(args.target, int) if args.target else None
        target_ket = _numbers(args.target_ket) if args.target_ket else None
        if (ket is None) == (diag is None) or blocks is None or (target is None) == (target_ket is None):
            raise UsageFailure("give --fixture, or one of --ket/--rho-diag, --blocks, and one of --target/--target-ket")
    n = len(ket) if ket is not None else len(diag)
    if ket is not None:
        rho = oracles.outer(ket)
    else:
        rho = [[complex(diag[i]) if i == j else 0j for j in range(n)] for i in range(n)]
    if sorted(i for b in blocks for i in b) != list(range(n)):
        raise UsageFailure(f"--blocks must split indices 0..{n - 1} exactly once")
    projectors = [[[1.0 if i == j and i in b else 0.0 for j in range(n)] for i in range(n)] for b in blocks]
    if target_ket is not None:
        if len(target_ket) != n:
            raise UsageFailure(f"target ket needs {n} entries")
        b = oracles.outer(target_ket)
    else:
        if any(t < 0 or t >= n for t in target):
            raise UsageFailure("target indices out of range")
        b = [[1.0 if i == j and i in target else 0.0 for j in range(n)] for i in range(n)]
    res = oracles.stability(rho, projectors, b)
    for key in ("p_direct", "p_composed", "deviation"):
        out.write(f"{key} {fmt(res[key])}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relfacts", description="Observer-relative quantum facts: scenarios and oracles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a scenario file and print a report")
    run.add_argument("path")
    run.add_argument("--seed", type=int, default=None, help=f"overrides {SEED_ENV} and the file's seed")
    run.add_argument("--format", choices=("json", "csv", "text"), default="json")
    run.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="parse and statically check a scenario file")
    val.add_argument("path")
    val.set_defaults(func=cmd_validate)

    orc = sub.add_parser("oracle", help="brute-force reference computations")
    osub = orc.add_subparsers(dest="oracle", required=True, parser_class=_Parser)
    ch = osub.add_parser("chain", help="amplitude chain probabilities")
    ch.add_argument("--wba", required=True, help="comma separated W(b_i, a)")
    ch.add_argument("--wcb", required=True, help="comma separated W(c, b_i)")
    ch.set_defaults(func=cmd_oracle_chain)
    tr = osub.add_parser("trace", help="partial trace of a pure state")
    tr.add_argument("--fixture", choices=sorted(FIXTURES["trace"]))
    tr.add_argument("--ket")
    tr.add_argument("--dims")
    tr.add_argument("--keep")
    tr.set_defaults(func=cmd_oracle_trace)
    st = osub.add_parser("stability", help="direct versus composed probability")
    st.add_argument("--fixture", choices=sorted(FIXTURES["stability"]))
    st.add_argument("--ket")
    st.add_argument("--rho-diag", dest="rho_diag")
    st.add_argument("--blocks", help='basis indices per alternative, e.g. "0,1;2"')
    st.add_argument("--target", help="basis indices spanned by the target projector")
    st.add_argument("--target-ket", dest="target_ket", help="target projector onto this ket")
    st.set_defaults(func=cmd_oracle_stability)
    return p


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageFailure as exc:
        err.write(f"relfacts: usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"{getattr(args, 'path', '<input>')}:{exc}\n")
        return EXIT_USAGE
    except UnicodeDecodeError as exc:
        err.write(f"relfacts: {getattr(args, 'path', '<input>')} is not valid UTF-8 ({exc.reason} at byte {exc.start})\n")
        return EXIT_IO
    except OSError as exc:
        err.write(f"relfacts: cannot read {exc.filename or ''}: {exc.strerror or exc}\n")
        return EXIT_IO
    except (ScenarioRuntimeError, RelfactsError) as exc:
        err.write(f"relfacts: runtime error: {exc}\n")
        return EXIT_RUNTIME


def entry() -> None:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    sys.exit(main())
