"""Line-oriented scenario language: tokens, AST, parser and printer.

One statement per line, ``#`` starts a comment. Grammar::

    program    := { statement NEWLINE }
    statement  := "scenario" STRING | "seed" INT
                | "system" IDENT "dim" INT
                | "apparatus" IDENT "dim" INT "ready" INT
                | "environment" IDENT "dim" INT
                | "observer" IDENT
                | "state" IDENT "=" amplitudes
                | "observable" IDENT "on" IDENT "=" ( "spin-z" | "pointer" | matrix )
                | "projector" IDENT "on" IDENT { IDENT } "=" amplitudes
                | "premeasure" IDENT "with" IDENT "using" IDENT
                | "measure" IDENT IDENT "on" IDENT [ "seed" INT ]
                | "unitary-view" IDENT
                | "decohere" IDENT "into" IDENT "overlap" FLOAT
                | "stability-check" IDENT "partition" IDENT "target" IDENT
                | "cross-check" IDENT "against" IDENT
    amplitudes := "(" complex { "," complex } ")"
    matrix     := "[" row { ";" row } "]"
    row        := complex { "," complex }
    complex    := [ "-" ] FLOAT [ ( "+" | "-" ) FLOAT "i" ]

The parser checks references, dimensions and normalizability as it goes,
so a successfully parsed scenario is ready to interpret.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import RelfactsError
from ..linalg import MAX_ENTRIES, is_hermitian, spectral_decompose

KEYWORDS = {
    "scenario", "seed", "system", "apparatus", "environment", "observer", "state",
    "observable", "projector", "premeasure", "measure", "unitary-view", "decohere",
    "stability-check", "cross-check",
}
RESERVED = KEYWORDS | {
    "dim", "ready", "on", "with", "using", "into", "overlap", "partition", "target",
    "against", "spin-z", "pointer",
}
MAX_SEED = 2**64 - 1
# builtin observables usable by name in premeasure and measure
BUILTINS = ("spin-z", "pointer")


class ParseError(RelfactsError):
    def __init__(self, line: int, column: int, message: str, expected: list[str] | None = None):
        self.line = line
        self.column = column
        self.message = message
        self.expected = list(expected or [])
        super().__init__(f"{line}:{column}: {message}")


# --- tokens -----------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # WORD NUMBER IMAG STRING PUNCT NEWLINE EOF
    text: str
    line: int
    column: int


_NUMBER = re.compile(r"([0-9]+\.?[0-9]*|\.[0-9]+)([eE][+-]?[0-9]+)?")
_DIGITS = "0123456789"
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PUNCT = "()[],;=+-"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    lines = source.split("\n")
    for lineno, text in enumerate(lines, start=1):
        text = text.rstrip("\r")
        pos = 0
        while pos < len(text):
            ch = text[pos]
            col = pos + 1
            if ch in " \t":
                pos += 1
            elif ch == "#":
                break
            elif ch == '"':
                end = pos + 1
                buf = []
                while end < len(text) and text[end] != '"':
                    if text[end] == "\\" and end + 1 < len(text) and text[end + 1] in '"\\':
                        end += 1
                    buf.append(text[end])
                    end += 1
                if end >= len(text):
                    raise ParseError(lineno, col, "lexical error: unterminated string", ['"'])
                tokens.append(Token("STRING", "".join(buf), lineno, col))
                pos = end + 1
            elif ch in _DIGITS or (ch == "." and pos + 1 < len(text) and text[pos + 1] in _DIGITS):
                m = _NUMBER.match(text, pos)
                end = m.end()
                kind = "NUMBER"
                if end < len(text) and text[end] == "i" and not (
                    end + 1 < len(text) and (text[end + 1].isalnum() or text[end + 1] in "_-")
                ):
                    kind = "IMAG"
                    nxt = end + 1
                else:
                    nxt = end
                if nxt < len(text) and (text[nxt].isalnum() or text[nxt] in "_."):
                    raise ParseError(lineno, col, f"lexical error: malformed number {text[pos:nxt + 1]!r}")
                tokens.append(Token(kind, m.group(0), lineno, col))
                pos = nxt
            elif ch.isascii() and (ch.isalpha() or ch == "_"):
                m = _WORD.match(text, pos)
                tokens.append(Token("WORD", m.group(0), lineno, col))
                pos = m.end()
            elif ch in _PUNCT:
                tokens.append(Token("PUNCT", ch, lineno, col))
                pos += 1
            else:
                raise ParseError(lineno, col, f"lexical error: unexpected character {ch!r}")
        tokens.append(Token("NEWLINE", "\n", lineno, len(text) + 1))
    last = len(lines)
    tokens.append(Token("EOF", "", last, len(lines[-1].rstrip("\r")) + 1))
    return tokens


# --- AST --------------------------------------------------------------------

def _pos():
    return field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class SystemDecl:
    label: str
    dim: int
    line: int = _pos()


@dataclass(frozen=True)
class ApparatusDecl:
    label: str
    dim: int
    ready: int
    line: int = _pos()


@dataclass(frozen=True)
class EnvironmentDecl:
    label: str
    dim: int
    line: int = _pos()


@dataclass(frozen=True)
class ObserverDecl:
    label: str
    line: int = _pos()


@dataclass(frozen=True)
class StateDecl:
    """Initial amplitudes as written; ``scale`` is the normalization factor applied."""

    label: str
    amplitudes: tuple[complex, ...]
    scale: float = 1.0
    line: int = _pos()

    @property
    def normalized(self) -> tuple[complex, ...]:
        return tuple(a * self.scale for a in self.amplitudes)


@dataclass(frozen=True)
class ObservableDecl:
    name: str
    target: str
    kind: str  # "spin-z", "pointer" or "matrix"
    matrix: tuple[tuple[complex, ...], ...] | None = None
    line: int = _pos()


@dataclass(frozen=True)
class ProjectorDecl:
    name: str
    targets: tuple[str, ...]
    amplitudes: tuple[complex, ...]
    scale: float = 1.0
    line: int = _pos()

    @property
    def normalized(self) -> tuple[complex, ...]:
        return tuple(a * self.scale for a in self.amplitudes)


@dataclass(frozen=True)
class Premeasure:
    system: str
    apparatus: str
    observable: str
    line: int = _pos()


@dataclass(frozen=True)
class Measure:
    observer: str
    observable: str
    system: str
    seed: int | None = None
    line: int = _pos()


@dataclass(frozen=True)
class UnitaryView:
    observer: str
    line: int = _pos()


@dataclass(frozen=True)
class Decohere:
    target: str
    env: str
    overlap: float
    line: int = _pos()


@dataclass(frozen=True)
class StabilityCheck:
    observer: str
    partition: str
    target: str
    line: int = _pos()


@dataclass(frozen=True)
class CrossCheck:
    observer: str
    friend: str
    line: int = _pos()


Declaration = Union[SystemDecl, ApparatusDecl, EnvironmentDecl, ObserverDecl, StateDecl, ObservableDecl, ProjectorDecl]
StepNode = Union[Premeasure, Measure, UnitaryView, Decohere, StabilityCheck, CrossCheck]


@dataclass(frozen=True)
class ScenarioAst:
    name: str | None
    seed: int | None
    declarations: tuple[Declaration, ...]
    steps: tuple[StepNode, ...]

    def subsystems(self) -> list[tuple[str, int]]:
        return [
            (d.label, d.dim)
            for d in self.declarations
            if isinstance(d, (SystemDecl, ApparatusDecl, EnvironmentDecl))
        ]

    def observers(self) -> list[str]:
        return [d.label for d in self.declarations if isinstance(d, ObserverDecl)]

    def find(self, kind, label: str):
        for d in self.declarations:
            if isinstance(d, kind) and getattr(d, "label", getattr(d, "name", None)) == label:
                return d
        return None


# --- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.name: str | None = None
        self.seed: int | None = None
        self.decls: list = []
        self.steps: list = []
        # label -> declaration, one namespace for subsystems and observers
        self.subsystems: dict[str, object] = {}
        self.observers: dict[str, ObserverDecl] = {}
        self.observables: dict[str, ObservableDecl] = {}
        self.group_counts: dict[str, int] = {}
        self.projectors: dict[str, ProjectorDecl] = {}
        self.states: set[str] = set()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, tok: Token, message: str, expected=None):
        raise ParseError(tok.line, tok.column, message, expected)

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def describe(self, tok: Token) -> str:
        return {"NEWLINE": "end of line", "EOF": "end of input"}.get(tok.kind, repr(tok.text))

    def expect_word(self, word: str) -> Token:
        t = self.tok
        if t.kind != "WORD" or t.text != word:
            self.fail(t, f"expected {word!r}, found {self.describe(t)}", [repr(word)])
        return self.advance()

    def expect_punct(self, ch: str) -> Token:
        t = self.tok
        if t.kind != "PUNCT" or t.text != ch:
            self.fail(t, f"expected {ch!r}, found {self.describe(t)}", [repr(ch)])
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "WORD":
            self.fail(t, f"expected identifier, found {self.describe(t)}", ["identifier"])
        if t.text in RESERVED:
            self.fail(t, f"keyword {t.text!r} cannot be used as an identifier", ["identifier"])
        return self.advance()

    def integer(self, low: int = 0, high: int = MAX_SEED) -> tuple[int, Token]:
        t = self.tok
        if t.kind != "NUMBER" or not all(c in _DIGITS for c in t.text):
            self.fail(t, f"expected integer, found {self.describe(t)}", ["integer"])
        value = int(t.text)
        if not low <= value <= high:
            self.fail(t, f"integer {value} outside [{low}, {high}]")
        self.advance()
        return value, t

    def number(self) -> float:
        t = self.tok
        if t.kind != "NUMBER":
            self.fail(t, f"expected number, found {self.describe(t)}", ["number"])
        value = float(t.text)
        if not math.isfinite(value):
            self.fail(t, f"lexical error: number {t.text!r} out of range")
        self.advance()
        return value

    def complex_literal(self) -> complex:
        sign = 1.0
        if self.tok.kind == "PUNCT" and self.tok.text == "-":
            self.advance()
            sign = -1.0
        re_part = sign * self.number()
        im_part = 0.0
        t = self.tok
        if t.kind == "PUNCT" and t.text in "+-":
            self.advance()
            it = self.tok
            if it.kind != "IMAG":
                self.fail(it, f"expected imaginary part like 0.5i, found {self.describe(it)}", ["imaginary number"])
            im_part = float(it.text)
            if not math.isfinite(im_part):
                self.fail(it, f"lexical error: number {it.text!r} out of range")
            if t.text == "-":
                im_part = -im_part
            self.advance()
        return complex(re_part, im_part)

    def amplitudes(self) -> tuple[tuple[complex, ...], Token]:
        open_tok = self.expect_punct("(")
        values = [self.complex_literal()]
        while self.tok.kind == "PUNCT" and self.tok.text == ",":
            self.advance()
            values.append(self.complex_literal())
        self.expect_punct(")")
        return tuple(values), open_tok

    def matrix(self) -> tuple[tuple[complex, ...], ...]:
        self.expect_punct("[")
        rows = [[self.complex_literal()]]
        while True:
            t = self.tok
            if t.kind == "PUNCT" and t.text == ",":
                self.advance()
                rows[-1].append(self.complex_literal())
            elif t.kind == "PUNCT" and t.text == ";":
                self.advance()
                rows.append([self.complex_literal()])
            else:
                break
        self.expect_punct("]")
        return tuple(tuple(r) for r in rows)

    def end_of_statement(self):
        t = self.tok
        if t.kind == "NEWLINE":
            self.advance()
        elif t.kind != "EOF":
            self.fail(t, f"expected end of line, found {self.describe(t)}", ["end of line"])

    # reference helpers
    def ref_subsystem(self, kinds=None, what: str = "subsystem") -> Token:
        t = self.ident()
        decl = self.subsystems.get(t.text)
        if decl is None:
            if t.text in self.observers and kinds is None:
                self.fail(t, f"{t.text!r} is an observer, not a subsystem")
            self.fail(t, f"forward reference to undeclared {what} {t.text!r}")
        if kinds is not None and not isinstance(decl, kinds):
            self.fail(t, f"{t.text!r} is not a{'n' if what[0] in 'aeiou' else ''} {what}")
        return t

    def ref_observer(self) -> Token:
        t = self.ident()
        if t.text not in self.observers:
            self.fail(t, f"forward reference to undeclared observer {t.text!r}")
        return t

    def ref_observable(self, inline: bool = False) -> Token:
        t = self.tok
        if inline and t.kind == "WORD" and t.text in BUILTINS:
            return self.advance()
        t = self.ident()
        if t.text not in self.observables:
            self.fail(t, f"forward reference to undeclared observable {t.text!r}")
        return t

    def check_target(self, obs: Token, system: Token, at: Token | None = None) -> int:
        """Check ``obs`` acts on ``system``; returns its number of outcomes."""
        at = at or obs
        dim = self.subsystems[system.text].dim
        if obs.text == "spin-z":
            if dim != 2:
                self.fail(at, f"dimension mismatch: spin-z needs dimension 2, {system.text!r} has {dim}")
            return 2
        if obs.text == "pointer":
            return dim
        decl = self.observables[obs.text]
        if decl.target != system.text:
            self.fail(at, f"observable {obs.text!r} acts on {decl.target!r}, not {system.text!r}")
        return self.group_counts[obs.text]

    def declare_name(self, t: Token, space: dict):
        if t.text in space:
            self.fail(t, f"duplicate declaration of {t.text!r}")

    def total_dim_ok(self, t: Token, extra: int):
        total = extra
        for d in self.subsystems.values():
            total *= d.dim
        if total > MAX_ENTRIES:
            self.fail(t, f"dimension too large: total dimension {total} exceeds {MAX_ENTRIES}")

    # statements
    def parse(self) -> ScenarioAst:
        while self.tok.kind != "EOF":
            if self.tok.kind == "NEWLINE":
                self.advance()
                continue
            self.statement()
        return ScenarioAst(self.name, self.seed, tuple(self.decls), tuple(self.steps))

    def statement(self):
        t = self.tok
        if t.kind != "WORD":
            self.fail(t, f"expected a statement keyword, found {self.describe(t)}", sorted(KEYWORDS))
        if t.text not in KEYWORDS:
            self.fail(t, f"unknown keyword {t.text!r}", sorted(KEYWORDS))
        self.advance()
        getattr(self, "st_" + t.text.replace("-", "_"))(t)
        self.end_of_statement()

    def st_scenario(self, kw):
        if self.name is not None:
            self.fail(kw, "duplicate scenario name")
        t = self.tok
        if t.kind != "STRING":
            self.fail(t, f"expected string, found {self.describe(t)}", ["string"])
        self.name = self.advance().text

    def st_seed(self, kw):
        if self.seed is not None:
            self.fail(kw, "duplicate seed")
        self.seed, _ = self.integer()

    def _dim(self) -> int:
        self.expect_word("dim")
        dim, dt = self.integer(1, MAX_ENTRIES)
        self.total_dim_ok(dt, dim)
        return dim

    def _new_subsystem(self) -> Token:
        t = self.ident()
        self.declare_name(t, self.subsystems)
        if t.text in self.observables or t.text in self.projectors:
            self.fail(t, f"{t.text!r} is already an observable or projector name")
        return t

    def st_system(self, kw):
        t = self._new_subsystem()
        if t.text in self.observers:
            self.fail(t, f"observer {t.text!r} can only coincide with an apparatus")
        decl = SystemDecl(t.text, self._dim(), line=kw.line)
        self.subsystems[t.text] = decl
        self.decls.append(decl)

    def st_apparatus(self, kw):
        t = self._new_subsystem()
        dim = self._dim()
        self.expect_word("ready")
        ready, rt = self.integer()
        if ready >= dim:
            self.fail(rt, f"dimension mismatch: ready index {ready} outside apparatus dimension {dim}")
        decl = ApparatusDecl(t.text, dim, ready, line=kw.line)
        self.subsystems[t.text] = decl
        self.decls.append(decl)

    def st_environment(self, kw):
        t = self._new_subsystem()
        if t.text in self.observers:
            self.fail(t, f"observer {t.text!r} can only coincide with an apparatus")
        decl = EnvironmentDecl(t.text, self._dim(), line=kw.line)
        self.subsystems[t.text] = decl
        self.decls.append(decl)

    def st_observer(self, kw):
        t = self.ident()
        self.declare_name(t, self.observers)
        existing = self.subsystems.get(t.text)
        if existing is not None and not isinstance(existing, ApparatusDecl):
            self.fail(t, f"observer {t.text!r} can only coincide with an apparatus")
        if t.text in self.observables or t.text in self.projectors:
            self.fail(t, f"{t.text!r} is already an observable or projector name")
        decl = ObserverDecl(t.text, line=kw.line)
        self.observers[t.text] = decl
        self.decls.append(decl)

    def _scale(self, values, tok) -> float:
        norm = math.sqrt(sum(abs(v) ** 2 for v in values))
        if norm == 0.0 or not math.isfinite(norm):
            self.fail(tok, "state has zero norm" if norm == 0.0 else "state norm is not finite")
        return 1.0 / norm

    def st_state(self, kw):
        t = self.ref_subsystem(SystemDecl, "system")
        if t.text in self.states:
            self.fail(t, f"duplicate state for {t.text!r}")
        self.expect_punct("=")
        values, open_tok = self.amplitudes()
        dim = self.subsystems[t.text].dim
        if len(values) != dim:
            self.fail(open_tok, f"dimension mismatch: {len(values)} amplitudes for {t.text!r} of dimension {dim}")
        decl = StateDecl(t.text, values, self._scale(values, open_tok), line=kw.line)
        self.states.add(t.text)
        self.decls.append(decl)

    def _new_operator_name(self) -> Token:
        t = self.ident()
        if t.text in self.observables or t.text in self.projectors:
            self.fail(t, f"duplicate declaration of {t.text!r}")
        if t.text in self.subsystems or t.text in self.observers:
            self.fail(t, f"{t.text!r} is already a subsystem or observer")
        return t

    def st_observable(self, kw):
        name = self._new_operator_name()
        self.expect_word("on")
        target = self.ref_subsystem()
        dim = self.subsystems[target.text].dim
        self.expect_punct("=")
        t = self.tok
        matrix = None
        if t.kind == "WORD" and t.text == "spin-z":
            self.advance()
            if dim != 2:
                self.fail(t, f"dimension mismatch: spin-z needs dimension 2, {target.text!r} has {dim}")
            kind, groups = "spin-z", 2
        elif t.kind == "WORD" and t.text == "pointer":
            self.advance()
            kind, groups = "pointer", dim
        elif t.kind == "PUNCT" and t.text == "[":
            matrix = self.matrix()
            if len(matrix) != dim or any(len(r) != dim for r in matrix):
                self.fail(t, f"dimension mismatch: matrix must be {dim}x{dim} for {target.text!r}")
            m = np.array(matrix, dtype=np.complex128)
            if not np.all(np.isfinite(m)) or not is_hermitian(m):
                self.fail(t, "observable matrix is not Hermitian")
            kind, groups = "matrix", len(spectral_decompose(m))
        else:
            self.fail(t, f"expected 'spin-z', 'pointer' or a matrix, found {self.describe(t)}",
                      ["'spin-z'", "'pointer'", "'['"])
        decl = ObservableDecl(name.text, target.text, kind, matrix, line=kw.line)
        self.observables[name.text] = decl
        self.group_counts[name.text] = groups
        self.decls.append(decl)

    def st_projector(self, kw):
        name = self._new_operator_name()
        self.expect_word("on")
        targets = [self.ref_subsystem().text]
        while self.tok.kind == "WORD":
            t = self.ref_subsystem()
            if t.text in targets:
                self.fail(t, f"subsystem {t.text!r} listed twice")
            targets.append(t.text)
        self.expect_punct("=")
        values, open_tok = self.amplitudes()
        dim = math.prod(self.subsystems[x].dim for x in targets)
        if len(values) != dim:
            self.fail(open_tok, f"dimension mismatch: {len(values)} amplitudes for targets of dimension {dim}")
        decl = ProjectorDecl(name.text, tuple(targets), values, self._scale(values, open_tok), line=kw.line)
        self.projectors[name.text] = decl
        self.decls.append(decl)

    def st_premeasure(self, kw):
        system = self.ref_subsystem()
        self.expect_word("with")
        app = self.ref_subsystem(ApparatusDecl, "apparatus")
        if app.text == system.text:
            self.fail(app, "system and apparatus must differ")
        self.expect_word("using")
        obs = self.ref_observable(inline=True)
        groups = self.check_target(obs, system)
        adim = self.subsystems[app.text].dim
        if adim < groups + 1:
            self.fail(app, f"dimension mismatch: apparatus {app.text!r} of dimension {adim} "
                           f"cannot record {groups} outcomes plus ready")
        self.steps.append(Premeasure(system.text, app.text, obs.text, line=kw.line))

    def st_measure(self, kw):
        who = self.ref_observer()
        obs = self.ref_observable(inline=True)
        self.expect_word("on")
        system = self.ref_subsystem()
        self.check_target(obs, system, at=system)
        if system.text == who.text:
            self.fail(system, f"observer {who.text!r} cannot measure itself")
        seed = None
        if self.tok.kind == "WORD" and self.tok.text == "seed":
            self.advance()
            seed, _ = self.integer()
        self.steps.append(Measure(who.text, obs.text, system.text, seed, line=kw.line))

    def st_unitary_view(self, kw):
        who = self.ref_observer()
        self.steps.append(UnitaryView(who.text, line=kw.line))

    def st_decohere(self, kw):
        target = self.ref_subsystem()
        self.expect_word("into")
        env = self.ref_subsystem(EnvironmentDecl, "environment")
        self.expect_word("overlap")
        ot = self.tok
        overlap = self.number()
        if overlap > 1.0:
            self.fail(ot, f"overlap {overlap!r} outside [0, 1]")
        tdim = self.subsystems[target.text].dim
        edim = self.subsystems[env.text].dim
        if overlap < 1.0 and edim < tdim:
            self.fail(env, f"dimension mismatch: environment {env.text!r} of dimension {edim} "
                           f"cannot record {tdim} branches of {target.text!r}")
        self.steps.append(Decohere(target.text, env.text, overlap, line=kw.line))

    def st_stability_check(self, kw):
        who = self.ref_observer()
        self.expect_word("partition")
        part = self.ref_observable()
        self.expect_word("target")
        t = self.ident()
        if t.text not in self.projectors:
            self.fail(t, f"forward reference to undeclared projector {t.text!r}")
        involved = {self.observables[part.text].target, *self.projectors[t.text].targets}
        if who.text in involved:
            self.fail(t, f"observer {who.text!r} cannot check facts about itself")
        self.steps.append(StabilityCheck(who.text, part.text, t.text, line=kw.line))

    def st_cross_check(self, kw):
        who = self.ref_observer()
        self.expect_word("against")
        friend = self.ref_observer()
        if friend.text == who.text:
            self.fail(friend, "an observer cannot cross-check against itself")
        self.steps.append(CrossCheck(who.text, friend.text, line=kw.line))


def parse(source: str) -> ScenarioAst:
    """Parse scenario text; raises :class:`ParseError` at the first problem."""
    return _Parser(source).parse()


# --- printer ----------------------------------------------------------------

def _num(x: float) -> str:
    return repr(float(x))


def _complex(z: complex) -> str:
    out = "-" + _num(-z.real) if math.copysign(1.0, z.real) < 0 else _num(z.real)
    if z.imag != 0.0:
        out += ("-" if z.imag < 0 else "+") + _num(abs(z.imag)) + "i"
    return out


def _amps(values) -> str:
    return "(" + ", ".join(_complex(v) for v in values) + ")"


def _string(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_node(node) -> str:
    if isinstance(node, SystemDecl):
        return f"system {node.label} dim {node.dim}"
    if isinstance(node, ApparatusDecl):
        return f"apparatus {node.label} dim {node.dim} ready {node.ready}"
    if isinstance(node, EnvironmentDecl):
        return f"environment {node.label} dim {node.dim}"
    if isinstance(node, ObserverDecl):
        return f"observer {node.label}"
    if isinstance(node, StateDecl):
        return f"state {node.label} = {_amps(node.amplitudes)}"
    if isinstance(node, ObservableDecl):
        if node.kind == "matrix":
            body = "[" + "; ".join(", ".join(_complex(z) for z in row) for row in node.matrix) + "]"
        else:
            body = node.kind
        return f"observable {node.name} on {node.target} = {body}"
    if isinstance(node, ProjectorDecl):
        return f"projector {node.name} on {' '.join(node.targets)} = {_amps(node.amplitudes)}"
    if isinstance(node, Premeasure):
        return f"premeasure {node.system} with {node.apparatus} using {node.observable}"
    if isinstance(node, Measure):
        tail = f" seed {node.seed}" if node.seed is not None else ""
        return f"measure {node.observer} {node.observable} on {node.system}{tail}"
    if isinstance(node, UnitaryView):
        return f"unitary-view {node.observer}"
    if isinstance(node, Decohere):
        return f"decohere {node.target} into {node.env} overlap {_num(node.overlap)}"
    if isinstance(node, StabilityCheck):
        return f"stability-check {node.observer} partition {node.partition} target {node.target}"
    if isinstance(node, CrossCheck):
        return f"cross-check {node.observer} against {node.friend}"
    raise TypeError(f"not a scenario node: {node!r}")


def format_scenario(ast: ScenarioAst) -> str:
    lines = []
    if ast.name is not None:
        lines.append(f"scenario {_string(ast.name)}")
    if ast.seed is not None:
        lines.append(f"seed {ast.seed}")
    lines.extend(format_node(d) for d in ast.declarations)
    lines.extend(format_node(s) for s in ast.steps)
    return "\n".join(lines) + "\n"
