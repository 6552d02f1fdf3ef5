"""Scenario configuration: a tiny expression language plus a line-oriented
scenario file format.

Expression grammar (whitespace-insensitive, left associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' integer)*          # integer exponent, may be signed
    atom   := number | x0..x3 | fn '(' expr ')' | '(' expr ')'
    fn     := sin | cos | exp | sqrt

Scenario files are UTF-8, LF or CRLF, one assignment per line, ``#`` starts
a comment.  Sections and keys::

    [chart]     x<k>_min = <number>, x<k>_max = <number>   (defaults 0..1)
    [tetrad]    e<a>_<mu> = "expr" | number    (coframe components theta^a_mu;
                every row a must appear; unset entries in a row are 0)
    [torsion]   T<c>_<a><b> = "expr" | number  (frame components, a < b;
                the a > b half is implied by antisymmetry; unset entries 0)
    [fields]    f.<name> = "expr"              (named scalar fields)
                A.<name>.<idx> = "expr"        (multivector frame component,
                idx 0..15 in canonical blade order; unset components 0)
    [checks]    <check-name> = on | off        (default: the full suite)
    [sampling]  seed = int, points = int, tol = float
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

from . import jets
from .jets import ChartPoint, Jet2, JetDomainError

COORD_NAMES = ("x0", "x1", "x2", "x3")
FUNCTIONS = ("sin", "cos", "exp", "sqrt")


class ExprSyntaxError(ValueError):
    def __init__(self, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(
            f"syntax error at offset {offset}: expected {expected}, found {found}"
        )


class ExprNameError(ValueError):
    def __init__(self, offset: int, name: str):
        self.offset = offset
        self.name = name
        super().__init__(
            f"unknown identifier {name!r} at offset {offset} "
            f"(coordinates are x0..x3; functions are {', '.join(FUNCTIONS)})"
        )


class ExprDomainError(ValueError):
    def __init__(self, point: ChartPoint, detail: str):
        self.point = point
        super().__init__(f"domain error at point {point.x}: {detail}")


class ScenarioError(ValueError):
    """Malformed scenario file."""


# -- AST ----------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Const | Coord | Neg | BinOp | Pow | Call


# -- tokenizer / parser ---------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            off = len(src) - len(stripped)
            raise ExprSyntaxError(off, "a token", repr(src[off]))
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str):
        kind, text, off = self.peek()
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(off, expected, found)

    def expect_op(self, op: str):
        kind, text, _ = self.peek()
        if kind == "op" and text == op:
            return self.next()
        self.fail(f"'{op}'")

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("an operator or end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.next()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        while self.peek()[:2] == ("op", "^"):
            self.next()
            e = Pow(e, self.integer())
        return e

    def integer(self) -> int:
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.next()
            sign = -1
        kind, text, off = self.peek()
        if kind != "num" or not re.fullmatch(r"\d+", text):
            self.fail("an integer exponent")
        self.next()
        return sign * int(text)

    def atom(self) -> Expr:
        kind, text, off = self.peek()
        if kind == "num":
            self.next()
            return Const(float(text))
        if kind == "name":
            self.next()
            if text in COORD_NAMES:
                return Coord(COORD_NAMES.index(text))
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ExprNameError(off, text)
        if kind == "op" and text == "(":
            self.next()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail("a number, coordinate, function or '('")


def parse_expr(src: str) -> Expr:
    return _Parser(src).parse()


# -- printing (for round-trip tests and diagnostics) ----------------------

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _LEVEL_ADD if e.op in "+-" else _LEVEL_MUL
    if isinstance(e, Neg):
        return _LEVEL_UNARY
    if isinstance(e, Pow):
        return _LEVEL_POW
    return _LEVEL_ATOM


def print_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else f"(-{repr(-e.value)})"
    if isinstance(e, Coord):
        return COORD_NAMES[e.index]
    if isinstance(e, Call):
        return f"{e.fn}({print_expr(e.arg)})"
    if isinstance(e, Neg):
        inner = print_expr(e.arg)
        if _level(e.arg) < _LEVEL_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = print_expr(e.base)
        if _level(e.base) < _LEVEL_POW:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, BinOp):
        lvl = _level(e)
        left = print_expr(e.left)
        right = print_expr(e.right)
        if _level(e.left) < lvl:
            left = f"({left})"
        # right operand at the same level must be parenthesized: the grammar
        # is left associative, so "a - b - c" rebuilds as "(a - b) - c".
        if _level(e.right) <= lvl:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def has_division(e: Expr) -> bool:
    """True if any division node occurs (candidates for domain failures)."""
    if isinstance(e, BinOp):
        return e.op == "/" or has_division(e.left) or has_division(e.right)
    if isinstance(e, Neg):
        return has_division(e.arg)
    if isinstance(e, Pow):
        return e.exponent < 0 or has_division(e.base)
    if isinstance(e, Call):
        return has_division(e.arg)
    return False


# -- evaluation ------------------------------------------------------------


def eval_expr(e: Expr, p: ChartPoint) -> Jet2:
    """Order-2 jet of the expression at p; division/sqrt guard the domain."""
    coords = [jets.seed_coordinate(mu, p) for mu in range(4)]
    try:
        return _eval(e, coords)
    except JetDomainError as err:
        raise ExprDomainError(p, str(err)) from err


def _eval(e: Expr, coords) -> Jet2:
    if isinstance(e, Const):
        return Jet2.const(e.value)
    if isinstance(e, Coord):
        return coords[e.index]
    if isinstance(e, Neg):
        return -_eval(e.arg, coords)
    if isinstance(e, Pow):
        return jets.pow_int(_eval(e.base, coords), e.exponent)
    if isinstance(e, Call):
        return jets.ELEMENTARY[e.fn](_eval(e.arg, coords))
    if isinstance(e, BinOp):
        left = _eval(e.left, coords)
        right = _eval(e.right, coords)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        return left * jets.recip(right)
    raise TypeError(f"not an expression node: {e!r}")


# -- scenario ---------------------------------------------------------------

ZERO_EXPR = Const(0.0)


@dataclass(frozen=True)
class Sampling:
    seed: int = 0
    points: int = 20
    tol: float = 1e-8


@dataclass
class Scenario:
    """Parsed, validated scenario configuration."""

    chart_box: tuple[tuple[float, float], ...]
    tetrad: tuple[tuple[Expr, ...], ...]          # theta^a_mu, rows a
    torsion: dict[tuple[int, int, int], Expr]     # (c, a, b) with a < b
    scalar_fields: dict[str, Expr]
    multivector_fields: dict[str, tuple[Expr, ...]]
    checks: tuple[str, ...] = ()                  # empty = full suite
    sampling: Sampling = field(default_factory=Sampling)
    digest: str = ""

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.chart_box == other.chart_box
            and self.tetrad == other.tetrad
            and self.torsion == other.torsion
            and self.scalar_fields == other.scalar_fields
            and self.multivector_fields == other.multivector_fields
            and self.checks == other.checks
            and self.sampling == other.sampling
        )

    def torsion_expr(self, c: int, a: int, b: int) -> Expr:
        """T^c_{ab} with the antisymmetric completion applied."""
        if a == b:
            return ZERO_EXPR
        if a < b:
            return self.torsion.get((c, a, b), ZERO_EXPR)
        e = self.torsion.get((c, b, a), ZERO_EXPR)
        return ZERO_EXPR if e == ZERO_EXPR else Neg(e)


_SECTION_RE = re.compile(r"^\[([a-z]+)\]$")
_TETRAD_KEY = re.compile(r"^e([0-3])_([0-3])$")
_TORSION_KEY = re.compile(r"^T([0-3])_([0-3])([0-3])$")
_SCALAR_KEY = re.compile(r"^f\.([A-Za-z_][A-Za-z0-9_]*)$")
_MV_KEY = re.compile(r"^A\.([A-Za-z_][A-Za-z0-9_]*)\.(\d{1,2})$")
_CHART_KEY = re.compile(r"^x([0-3])_(min|max)$")
_NAME_KEY = re.compile(r"^[A-Za-z0-9_-]+$")

_SECTIONS = ("chart", "tetrad", "torsion", "fields", "checks", "sampling")


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def _parse_number(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(f"line {lineno}: expected a number, got {text!r}") from None


def _parse_value_expr(value: str, lineno: int) -> Expr:
    """Quoted string -> parsed expression; bare number -> constant."""
    if value.startswith('"'):
        if not (len(value) >= 2 and value.endswith('"')):
            raise ScenarioError(f"line {lineno}: unterminated string")
        try:
            return parse_expr(value[1:-1])
        except (ExprSyntaxError, ExprNameError) as err:
            raise ScenarioError(f"line {lineno}: {err}") from err
    return Const(_parse_number(value, lineno))


def load_scenario(text: str, valid_checks=None) -> Scenario:
    """Parse and validate a scenario file's contents.

    ``valid_checks``: optional collection of known check names; when given,
    unknown names in [checks] raise a ScenarioError listing the valid ones.
    """
    sections: dict[str, dict[str, tuple[str, int]]] = {s: {} for s in _SECTIONS}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name not in _SECTIONS:
                raise ScenarioError(
                    f"line {lineno}: unknown section [{name}]; "
                    f"valid sections: {', '.join(_SECTIONS)}"
                )
            current = name
            continue
        if current is None:
            raise ScenarioError(f"line {lineno}: entry before any [section] header")
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ScenarioError(f"line {lineno}: expected 'key = value'")
        if key in sections[current]:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value, lineno)

    box = _load_chart(sections["chart"])
    tetrad = _load_tetrad(sections["tetrad"])
    torsion = _load_torsion(sections["torsion"])
    scalars, mvs = _load_fields(sections["fields"])
    checks = _load_checks(sections["checks"], valid_checks)
    sampling = _load_sampling(sections["sampling"])
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Scenario(
        chart_box=box,
        tetrad=tetrad,
        torsion=torsion,
        scalar_fields=scalars,
        multivector_fields=mvs,
        checks=checks,
        sampling=sampling,
        digest=digest,
    )


def load_scenario_file(path, valid_checks=None) -> Scenario:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ScenarioError(f"{path}: not valid UTF-8 ({err})") from err
    return load_scenario(text, valid_checks)


def _load_chart(entries) -> tuple[tuple[float, float], ...]:
    bounds = [[0.0, 1.0] for _ in range(4)]
    for key, (value, lineno) in entries.items():
        m = _CHART_KEY.match(key)
        if not m:
            raise ScenarioError(
                f"line {lineno}: bad [chart] key {key!r} (use x<k>_min / x<k>_max)"
            )
        k, side = int(m.group(1)), m.group(2)
        v = _parse_number(value, lineno)
        if not math.isfinite(v):
            raise ScenarioError(f"line {lineno}: non-finite chart bound")
        bounds[k][0 if side == "min" else 1] = v
    return tuple((lo, hi) for lo, hi in bounds)


def _load_tetrad(entries) -> tuple[tuple[Expr, ...], ...]:
    if not entries:
        raise ScenarioError("missing [tetrad] section entries (all four rows required)")
    rows: list[list[Expr]] = [[ZERO_EXPR] * 4 for _ in range(4)]
    seen_rows = set()
    for key, (value, lineno) in entries.items():
        m = _TETRAD_KEY.match(key)
        if not m:
            raise ScenarioError(f"line {lineno}: bad [tetrad] key {key!r} (use e<a>_<mu>)")
        a, mu = int(m.group(1)), int(m.group(2))
        rows[a][mu] = _parse_value_expr(value, lineno)
        seen_rows.add(a)
    missing = sorted(set(range(4)) - seen_rows)
    if missing:
        raise ScenarioError(f"tetrad row missing for a = {missing}")
    return tuple(tuple(r) for r in rows)


def _load_torsion(entries) -> dict[tuple[int, int, int], Expr]:
    torsion = {}
    for key, (value, lineno) in entries.items():
        m = _TORSION_KEY.match(key)
        if not m:
            raise ScenarioError(
                f"line {lineno}: bad [torsion] key {key!r} (use T<c>_<a><b>)"
            )
        c, a, b = (int(m.group(g)) for g in (1, 2, 3))
        if a >= b:
            raise ScenarioError(
                f"line {lineno}: torsion key {key!r} needs a < b "
                "(the other half is implied by antisymmetry)"
            )
        torsion[(c, a, b)] = _parse_value_expr(value, lineno)
    return torsion


def _load_fields(entries):
    scalars: dict[str, Expr] = {}
    mv_parts: dict[str, dict[int, Expr]] = {}
    for key, (value, lineno) in entries.items():
        m = _SCALAR_KEY.match(key)
        if m:
            scalars[m.group(1)] = _parse_value_expr(value, lineno)
            continue
        m = _MV_KEY.match(key)
        if m:
            idx = int(m.group(2))
            if not 0 <= idx <= 15:
                raise ScenarioError(f"line {lineno}: blade index {idx} outside 0..15")
            mv_parts.setdefault(m.group(1), {})[idx] = _parse_value_expr(value, lineno)
            continue
        raise ScenarioError(
            f"line {lineno}: bad [fields] key {key!r} (use f.<name> or A.<name>.<idx>)"
        )
    mvs = {
        name: tuple(parts.get(i, ZERO_EXPR) for i in range(16))
        for name, parts in mv_parts.items()
    }
    return scalars, mvs


def _load_checks(entries, valid_checks) -> tuple[str, ...]:
    names = []
    for key, (value, lineno) in entries.items():
        if not _NAME_KEY.match(key):
            raise ScenarioError(f"line {lineno}: bad check name {key!r}")
        flag = value.lower()
        if flag in ("on", "1", "true"):
            enabled = True
        elif flag in ("off", "0", "false"):
            enabled = False
        else:
            raise ScenarioError(
                f"line {lineno}: check value must be on/off, got {value!r}"
            )
        if valid_checks is not None and key not in valid_checks:
            raise ScenarioError(
                f"line {lineno}: unknown check name {key!r}; valid names: "
                + ", ".join(sorted(valid_checks))
            )
        if enabled:
            names.append(key)
    return tuple(names)


def _load_sampling(entries) -> Sampling:
    seed, points, tol = 0, 20, 1e-8
    for key, (value, lineno) in entries.items():
        if key == "seed":
            seed = int(_parse_number(value, lineno))
        elif key == "points":
            points = int(_parse_number(value, lineno))
        elif key == "tol":
            tol = _parse_number(value, lineno)
        else:
            raise ScenarioError(
                f"line {lineno}: bad [sampling] key {key!r} (seed, points, tol)"
            )
    return Sampling(seed=seed, points=points, tol=tol)
