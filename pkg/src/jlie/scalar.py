"""Symbolic scalar functions on a coordinate chart.

Expressions are immutable trees over rational constants, coordinates, sums,
products, integer powers and ``exp``.  Every expression has a canonical form:
a reduced fraction of two polynomials over QQ in the chart coordinates, where
each distinct ``exp(u)`` is treated as one extra generator.  For exp-free
expressions equality of canonical forms is equality of functions.
"""

from __future__ import annotations

import enum
import functools
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

import mpmath
from sympy import QQ, Symbol
from sympy.polys.fields import field as _frac_field
from sympy.polys.orderings import grlex

Number = Union[int, Fraction]

ZERO_TOLERANCE = 1e-30
SAMPLE_PRECISION = 128
MIN_SAMPLES = 20

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = {"exp"}


class ScalarError(ValueError):
    pass


class ParseError(ScalarError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownCoordinateError(ScalarError):
    def __init__(self, name: str):
        super().__init__(f"unknown coordinate {name!r}")
        self.name = name


class ChartMismatchError(ScalarError):
    pass


class PoleError(ScalarError, ArithmeticError):
    """Raised when a denominator vanishes."""


class SamplingError(ScalarError):
    """All sample points hit poles of the expression."""


@dataclass(frozen=True)
class Chart:
    name: str
    coords: tuple[str, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ScalarError("a chart needs at least one coordinate")
        for c in coords:
            if not isinstance(c, str) or not _IDENT.match(c) or c in _RESERVED:
                raise ScalarError(f"invalid coordinate name {c!r}")
        if len(set(coords)) != len(coords):
            raise ScalarError(f"duplicate coordinates in {coords}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, coord: str) -> int:
        try:
            return self.coords.index(coord)
        except ValueError:
            raise UnknownCoordinateError(coord) from None

    def coord(self, name: str) -> "Expr":
        return Expr(self, "var", (self.index(name),))

    def const(self, value: Number | str) -> "Expr":
        return Expr(self, "num", (Fraction(value),))

    def parse(self, text: str) -> "Expr":
        return parse_expr(text, self)

    def __str__(self):
        return f"{self.name}[{','.join(self.coords)}]"


# --------------------------------------------------------------------------
# expression tree


class Expr:
    """Immutable symbolic scalar on ``chart``.

    ``op`` is one of ``num``, ``var``, ``add``, ``mul``, ``pow``, ``exp``.
    Use the arithmetic operators or :func:`parse_expr` to build expressions.
    """

    __slots__ = ("chart", "op", "args", "_canon", "_simple")

    def __init__(self, chart: Chart, op: str, args: tuple):
        self.chart = chart
        self.op = op
        self.args = args
        self._canon = None
        self._simple = False

    # -- smart constructors -------------------------------------------------

    def _coerce(self, other) -> "Expr":
        if isinstance(other, Expr):
            if other.chart != self.chart:
                raise ChartMismatchError(f"{self.chart} vs {other.chart}")
            return other
        if isinstance(other, (int, Fraction)):
            return Expr(self.chart, "num", (Fraction(other),))
        return NotImplemented

    @property
    def is_number(self) -> bool:
        return self.op == "num"

    @property
    def is_literal_zero(self) -> bool:
        return self.op == "num" and self.args[0] == 0

    @property
    def value(self) -> Fraction:
        if self.op != "num":
            raise ScalarError("not a constant")
        return self.args[0]

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self.chart, (self, other))

    __radd__ = __add__

    def __neg__(self):
        return _mul(self.chart, (Expr(self.chart, "num", (Fraction(-1),)), self))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self.chart, (self, -other))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _add(self.chart, (other, -self))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self.chart, (self, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self.chart, (self, _pow(other, -1)))

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _mul(self.chart, (other, _pow(self, -1)))

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ScalarError("only integer exponents are supported")
        return _pow(self, n)

    def exp(self) -> "Expr":
        return _exp(self)

    # -- canonical form -----------------------------------------------------

    def canonical(self) -> "Canonical":
        if self._canon is None:
            self._canon = _canonicalize(self)
        return self._canon

    def simplify(self) -> "Expr":
        """Rebuild the expression from its canonical form."""
        if self._simple:
            return self
        return self.canonical().to_expr()

    @property
    def has_exp(self) -> bool:
        return bool(self.canonical().atoms)

    def is_polynomial(self) -> bool:
        c = self.canonical()
        return not c.atoms and c.denom == (((0,) * self.chart.dim, Fraction(1)),)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.chart.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.chart == other.chart and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())

    def __str__(self):
        return self.canonical().text

    def __repr__(self):
        return f"Expr({str(self)!r})"

    # -- calculus / evaluation ----------------------------------------------

    def diff(self, coord: str) -> "Expr":
        return differentiate(self, coord)

    def subs_numbers(self, point: Mapping[str, object]):
        return evaluate(self, point)


def _add(chart: Chart, terms: Iterable[Expr]) -> Expr:
    flat: list[Expr] = []
    const = Fraction(0)
    for t in terms:
        parts = t.args if t.op == "add" else (t,)
        for p in parts:
            if p.op == "num":
                const += p.args[0]
            else:
                flat.append(p)
    if const != 0:
        flat.insert(0, Expr(chart, "num", (const,)))
    if not flat:
        return Expr(chart, "num", (Fraction(0),))
    if len(flat) == 1:
        return flat[0]
    return Expr(chart, "add", tuple(flat))


def _mul(chart: Chart, factors: Iterable[Expr]) -> Expr:
    flat: list[Expr] = []
    const = Fraction(1)
    for f in factors:
        parts = f.args if f.op == "mul" else (f,)
        for p in parts:
            if p.op == "num":
                const *= p.args[0]
            else:
                flat.append(p)
    if const == 0:
        return Expr(chart, "num", (Fraction(0),))
    if const != 1:
        flat.insert(0, Expr(chart, "num", (const,)))
    if not flat:
        return Expr(chart, "num", (Fraction(1),))
    if len(flat) == 1:
        return flat[0]
    return Expr(chart, "mul", tuple(flat))


def _pow(base: Expr, n: int) -> Expr:
    if n == 0:
        return Expr(base.chart, "num", (Fraction(1),))
    if n == 1:
        return base
    if base.op == "num":
        if base.args[0] == 0 and n < 0:
            raise PoleError("division by the zero constant")
        return Expr(base.chart, "num", (base.args[0] ** n,))
    if base.op == "pow":
        return _pow(base.args[0], base.args[1] * n)
    return Expr(base.chart, "pow", (base, n))


def _exp(arg: Expr) -> Expr:
    if arg.is_literal_zero:
        return Expr(arg.chart, "num", (Fraction(1),))
    return Expr(arg.chart, "exp", (arg,))


def const(chart: Chart, value: Number | str) -> Expr:
    return chart.const(value)


# --------------------------------------------------------------------------
# canonical forms

Monomial = tuple[int, ...]
Terms = tuple[tuple[Monomial, Fraction], ...]


@dataclass(frozen=True)
class Canonical:
    """Reduced numerator/denominator pair, terms in descending graded-lex order.

    Monomial exponents cover the chart coordinates followed by one slot per
    entry of ``atoms`` (the canonical text of each ``exp`` argument).  The
    denominator is monic.
    """

    chart: Chart
    atoms: tuple[str, ...]
    numer: Terms
    denom: Terms
    atom_args: tuple[Expr, ...] = field(default=(), compare=False, hash=False, repr=False)

    @property
    def exp_free(self) -> bool:
        return not self.atoms

    @property
    def is_zero(self) -> bool:
        return not self.numer

    @functools.cached_property
    def text(self) -> str:
        names = list(self.chart.coords) + [f"exp({a})" for a in self.atoms]
        num = _terms_text(self.numer, names)
        if _is_one(self.denom):
            return num
        den = _terms_text(self.denom, names)
        if len(self.numer) > 1:
            num = f"({num})"
        (mono, _), = self.denom[:1]
        if len(self.denom) > 1 or sum(1 for e in mono if e) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def to_expr(self) -> Expr:
        chart = self.chart
        num = _terms_expr(chart, self.numer, self.atom_args)
        if _is_one(self.denom):
            out = num
        else:
            out = _mul(chart, (num, _pow(_terms_expr(chart, self.denom, self.atom_args), -1)))
        out._canon = self
        out._simple = True
        return out


def _is_one(terms: Terms) -> bool:
    return len(terms) == 1 and not any(terms[0][0]) and terms[0][1] == 1


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _terms_text(terms: Terms, names: Sequence[str]) -> str:
    if not terms:
        return "0"
    out = []
    for k, (mono, coef) in enumerate(terms):
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
        mag = abs(coef)
        if not factors:
            body = _frac_text(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _frac_text(mag) + "*" + "*".join(factors)
        if k == 0:
            out.append(("-" if coef < 0 else "") + body)
        else:
            out.append((" - " if coef < 0 else " + ") + body)
    return "".join(out)


def _terms_expr(chart: Chart, terms: Terms, atom_args: Sequence[Expr]) -> Expr:
    n = chart.dim
    summands = []
    for mono, coef in terms:
        factors = [Expr(chart, "num", (coef,))]
        for i, e in enumerate(mono):
            if not e:
                continue
            base = Expr(chart, "var", (i,)) if i < n else _exp(atom_args[i - n])
            factors.append(_pow(base, e))
        summands.append(_mul(chart, factors))
    return _add(chart, summands)


@functools.lru_cache(maxsize=None)
def _field(names: tuple[str, ...]):
    K, *gens = _frac_field([Symbol(n) for n in names], QQ, grlex)
    return K, gens


def _collect_atoms(e: Expr, acc: dict[str, Expr]) -> None:
    if e.op == "exp":
        arg = e.args[0]
        acc.setdefault(arg.canonical().text, arg)
    elif e.op in ("add", "mul"):
        for a in e.args:
            _collect_atoms(a, acc)
    elif e.op == "pow":
        _collect_atoms(e.args[0], acc)


def _to_frac(e: Expr, K, gens, atom_pos: Mapping[str, int], memo: dict):
    key = id(e)
    if key in memo:
        return memo[key][1]
    op = e.op
    if op == "num":
        v = K(QQ(e.args[0].numerator, e.args[0].denominator))
    elif op == "var":
        v = gens[e.args[0]]
    elif op == "add":
        v = K.zero
        for a in e.args:
            v = v + _to_frac(a, K, gens, atom_pos, memo)
    elif op == "mul":
        v = K.one
        for a in e.args:
            v = v * _to_frac(a, K, gens, atom_pos, memo)
    elif op == "pow":
        b = _to_frac(e.args[0], K, gens, atom_pos, memo)
        try:
            v = b ** e.args[1]
        except ZeroDivisionError:
            raise PoleError("expression divides by an identically zero function") from None
    elif op == "exp":
        v = gens[e.chart.dim + atom_pos[e.args[0].canonical().text]]
    else:  # pragma: no cover
        raise ScalarError(f"bad op {op}")
    memo[key] = (e, v)  # keep e alive so id() stays unique
    return v


def _poly_terms(p, keep: Sequence[int]) -> list[tuple[Monomial, Fraction]]:
    out = []
    for mono, c in p.terms():
        out.append((tuple(mono[i] for i in keep), Fraction(int(c.numerator), int(c.denominator))))
    return out


def _grlex_sorted(terms) -> Terms:
    return tuple(sorted(terms, key=lambda t: (sum(t[0]), t[0]), reverse=True))


def _canonicalize(e: Expr) -> Canonical:
    chart = e.chart
    atoms: dict[str, Expr] = {}
    _collect_atoms(e, atoms)
    keys = sorted(atoms)
    names = tuple(chart.coords) + tuple(f"exp({k})" for k in keys)
    K, gens = _field(names)
    frac = _to_frac(e, K, gens, {k: i for i, k in enumerate(keys)}, {})
    num, den = frac.numer, frac.denom
    n = chart.dim
    used = set()
    for p in (num, den):
        for mono in p.monoms():
            used.update(i for i in range(n, len(names)) if mono[i])
    keep = list(range(n)) + sorted(used)
    kept_atoms = tuple(keys[i - n] for i in sorted(used))
    num_terms = _poly_terms(num, keep)
    den_terms = _grlex_sorted(_poly_terms(den, keep))
    lc = den_terms[0][1]
    if lc != 1:
        num_terms = [(m, c / lc) for m, c in num_terms]
        den_terms = tuple((m, c / lc) for m, c in den_terms)
    if not num_terms:
        den_terms = (((0,) * len(keep), Fraction(1)),)
    return Canonical(
        chart,
        kept_atoms,
        _grlex_sorted(num_terms),
        den_terms,
        tuple(atoms[k] for k in kept_atoms),
    )


def canonical(e: Expr) -> Canonical:
    return e.canonical()


def to_fractions(exprs: Sequence[Expr]):
    """Map exp-free expressions into one sympy rational function field.

    Returns ``(K, elements)``; used for exact linear algebra over function
    coefficients.
    """
    if not exprs:
        raise ScalarError("need at least one expression")
    chart = exprs[0].chart
    K, gens = _field(tuple(chart.coords))
    out = []
    for e in exprs:
        if e.chart != chart:
            raise ChartMismatchError(f"{e.chart} vs {chart}")
        if e.has_exp:
            raise ScalarError("exp-bearing expression on the exact path")
        out.append(_to_frac(e.simplify(), K, gens, {}, {}))
    return K, out


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("int", m.group(1), start))
        elif m.group(2):
            tokens.append(("ident", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", start)
            tokens.append((ch, ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.i = 0
        self.chart = chart

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, kind=None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> Expr:
        out = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Expr:
        out = self.factor()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.factor()
            if op == "*":
                out = out * rhs
            else:
                if rhs.is_literal_zero:
                    raise ParseError("division by zero", pos)
                out = out / rhs
        return out

    def factor(self) -> Expr:
        neg = False
        if self.peek()[0] == "-":
            self.take()
            neg = True
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "-":
                self.take()
                sign = -1
            _, digits, pos = self.take("int")
            if base.is_literal_zero and sign < 0:
                raise ParseError("division by zero", pos)
            base = base ** (sign * int(digits))
        return -base if neg else base

    def atom(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "int":
            self.take()
            value = Fraction(int(text))
            if self.peek()[0] == "/" and self.peek(1)[0] == "int":
                self.take()
                _, den, dpos = self.take("int")
                if int(den) == 0:
                    raise ParseError("division by zero", dpos)
                value /= int(den)
            return self.chart.const(value)
        if kind == "ident":
            self.take()
            if text == "exp":
                self.take("(")
                inner = self.expr()
                self.take(")")
                return _exp(inner)
            if text not in self.chart.coords:
                raise UnknownCoordinateError(text)
            return self.chart.coord(text)
        if kind == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        got = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {got}", pos)


def parse_expr(text: str, chart: Chart) -> Expr:
    """Parse ``text`` with the grammar::

        expr   := term (("+"|"-") term)*
        term   := factor (("*"|"/") factor)*
        factor := ["-"] atom ["^" integer]
        atom   := rational | ident | "exp" "(" expr ")" | "(" expr ")"

    ``-x^2`` means ``-(x^2)``.
    """
    p = _Parser(text, chart)
    out = p.expr()
    p.take("end")
    return out


# --------------------------------------------------------------------------
# calculus


def differentiate(f: Expr, coord: str) -> Expr:
    idx = f.chart.index(coord)
    memo: dict[int, Expr] = {}
    return _diff(f, idx, memo).simplify()


def _diff(e: Expr, idx: int, memo: dict) -> Expr:
    key = id(e)
    if key in memo:
        return memo[key]
    chart = e.chart
    op = e.op
    if op == "num":
        out = chart.const(0)
    elif op == "var":
        out = chart.const(1 if e.args[0] == idx else 0)
    elif op == "add":
        out = _add(chart, [_diff(a, idx, memo) for a in e.args])
    elif op == "mul":
        terms = []
        for i, a in enumerate(e.args):
            da = _diff(a, idx, memo)
            if da.is_literal_zero:
                continue
            terms.append(_mul(chart, e.args[:i] + (da,) + e.args[i + 1:]))
        out = _add(chart, terms)
    elif op == "pow":
        base, n = e.args
        db = _diff(base, idx, memo)
        out = _mul(chart, (chart.const(n), _pow(base, n - 1), db))
    elif op == "exp":
        out = _mul(chart, (e, _diff(e.args[0], idx, memo)))
    else:  # pragma: no cover
        raise ScalarError(op)
    memo[key] = out
    return out


# --------------------------------------------------------------------------
# evaluation


def _eval_tree(e: Expr, values: Sequence, exp_fn: Callable, memo: dict):
    key = id(e)
    if key in memo:
        return memo[key]
    op = e.op
    if op == "num":
        v = e.args[0]
    elif op == "var":
        v = values[e.args[0]]
    elif op == "add":
        v = 0
        for a in e.args:
            v = v + _eval_tree(a, values, exp_fn, memo)
    elif op == "mul":
        v = 1
        for a in e.args:
            v = v * _eval_tree(a, values, exp_fn, memo)
    elif op == "pow":
        b = _eval_tree(e.args[0], values, exp_fn, memo)
        n = e.args[1]
        if n < 0 and b == 0:
            raise PoleError(f"zero denominator in {e.args[0]}")
        v = b ** n
    else:
        v = exp_fn(_eval_tree(e.args[0], values, exp_fn, memo))
    memo[key] = v
    return v


def _point_values(chart: Chart, point: Mapping[str, object]) -> list:
    values = []
    for c in chart.coords:
        if c not in point:
            raise ScalarError(f"point does not assign coordinate {c!r}")
        v = point[c]
        values.append(Fraction(v) if isinstance(v, (int, Fraction)) else float(v))
    extra = set(point) - set(chart.coords)
    if extra:
        raise UnknownCoordinateError(sorted(extra)[0])
    return values


def evaluate(f: Expr, point: Mapping[str, object]):
    """Evaluate ``f`` at ``point``.

    The result is an exact :class:`Fraction` when every coordinate value is
    rational and ``f`` is exp-free; a float otherwise.
    """
    values = _point_values(f.chart, point)
    exact = all(isinstance(v, Fraction) for v in values)
    if not exact:
        values = [float(v) for v in values]
    try:
        v = _eval_tree(f, values, lambda u: math.exp(float(u)), {})
    except ZeroDivisionError as exc:
        raise PoleError(str(exc)) from None
    if isinstance(v, Fraction) and not f.has_exp:
        return v
    return float(v)


def compile_expr(f: Expr) -> Callable[..., float]:
    """Return a fast float function of the chart coordinates (positional)."""
    f = f.simplify()
    args = [f"_c{i}" for i in range(f.chart.dim)]
    src = _py_source(f)
    code = f"lambda {', '.join(args)}: {src}"
    return eval(code, {"_exp": math.exp})  # noqa: S307 - source built from our own tree


def _py_source(e: Expr) -> str:
    op = e.op
    if op == "num":
        return repr(float(e.args[0]))
    if op == "var":
        return f"_c{e.args[0]}"
    if op == "add":
        return "(" + " + ".join(_py_source(a) for a in e.args) + ")"
    if op == "mul":
        return "(" + " * ".join(_py_source(a) for a in e.args) + ")"
    if op == "pow":
        base, n = e.args
        if n < 0:
            return f"(1.0 / {_py_source(base)} ** {-n})"
        return f"({_py_source(base)} ** {n})"
    return f"_exp({_py_source(e.args[0])})"


# --------------------------------------------------------------------------
# zero testing


class ZeroStatus(str, enum.Enum):
    PROVEN_ZERO = "ProvenZero"
    PROVEN_NONZERO = "ProvenNonzero"
    PROBABLY_ZERO = "ProbablyZero"
    PROBABLY_NONZERO = "ProbablyNonzero"


@dataclass(frozen=True)
class ZeroVerdict:
    status: ZeroStatus
    n_samples: int | None = None
    tolerance: float | None = None
    witness: tuple[tuple[str, str], ...] | None = None

    @property
    def is_zero(self) -> bool:
        return self.status in (ZeroStatus.PROVEN_ZERO, ZeroStatus.PROBABLY_ZERO)

    @property
    def proven(self) -> bool:
        return self.status in (ZeroStatus.PROVEN_ZERO, ZeroStatus.PROVEN_NONZERO)

    @property
    def certainty(self) -> str:
        return "proven" if self.proven else "probable"

    def to_dict(self) -> dict:
        out: dict = {"status": self.status.value}
        if self.n_samples is not None:
            out["n_samples"] = self.n_samples
            out["tolerance"] = self.tolerance
        if self.witness is not None:
            out["witness"] = dict(self.witness)
        return out

    def __str__(self):
        if self.status is ZeroStatus.PROBABLY_ZERO:
            return f"ProbablyZero({self.n_samples}, {self.tolerance:g})"
        return self.status.value


PROVEN_ZERO = ZeroVerdict(ZeroStatus.PROVEN_ZERO)
PROVEN_NONZERO = ZeroVerdict(ZeroStatus.PROVEN_NONZERO)


def combine_verdicts(verdicts: Iterable[ZeroVerdict]) -> ZeroVerdict:
    """Zero verdict for a tuple of expressions (zero iff all are zero)."""
    worst = PROVEN_ZERO
    for v in verdicts:
        if not v.is_zero:
            return v
        if v.status is ZeroStatus.PROBABLY_ZERO:
            worst = v
    return worst


def sample_point(chart: Chart, rng: random.Random) -> dict[str, Fraction]:
    return {c: Fraction(rng.randint(-20, 20), rng.randint(1, 7)) for c in chart.coords}


def is_zero(f: Expr, seed: int = 0, n_samples: int = MIN_SAMPLES) -> ZeroVerdict:
    """Decide whether ``f`` vanishes identically.

    Exp-free expressions are decided exactly from the canonical form.  When
    exp atoms survive canonicalization the canonical numerator is sampled at
    ``n_samples`` seeded random points at 128-bit precision.
    """
    c = f.canonical()
    if c.exp_free:
        return PROVEN_ZERO if c.is_zero else PROVEN_NONZERO
    return _sample_zero(c, seed, max(n_samples, MIN_SAMPLES))


def _sample_zero(c: Canonical, seed: int, n_samples: int) -> ZeroVerdict:
    rng = random.Random(seed)
    chart = c.chart
    budget = 50 * n_samples
    good = 0
    with mpmath.workprec(SAMPLE_PRECISION):
        while good < n_samples:
            if budget == 0:
                raise SamplingError("resample budget exhausted: every sample point hit a pole")
            budget -= 1
            point = sample_point(chart, rng)
            values = [mpmath.mpf(v.numerator) / v.denominator for v in point.values()]
            try:
                atom_vals = [
                    mpmath.exp(_eval_tree(a, values, mpmath.exp, {})) for a in c.atom_args
                ]
            except (ZeroDivisionError, PoleError):
                continue
            gens = values + atom_vals
            den, _ = _eval_terms(c.denom, gens)
            if abs(den) < mpmath.mpf(10) ** -20:
                continue
            num, scale = _eval_terms(c.numer, gens)
            good += 1
            if abs(num) > ZERO_TOLERANCE * max(1, scale):
                witness = tuple((k, _frac_text(v)) for k, v in point.items())
                return ZeroVerdict(ZeroStatus.PROBABLY_NONZERO, witness=witness)
    return ZeroVerdict(ZeroStatus.PROBABLY_ZERO, n_samples, ZERO_TOLERANCE)


def _eval_terms(terms: Terms, gens):
    total = mpmath.mpf(0)
    scale = mpmath.mpf(0)
    for mono, coef in terms:
        t = mpmath.mpf(coef.numerator) / coef.denominator
        for g, e in zip(gens, mono):
            if e:
                t *= g ** e
        total += t
        scale += abs(t)
    return total, scale
