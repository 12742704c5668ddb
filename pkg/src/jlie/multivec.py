"""Multivector fields on a chart and the Schouten-Nijenhuis calculus."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence, Union

from .scalar import (
    Chart,
    ChartMismatchError,
    Expr,
    ScalarError,
    ZeroVerdict,
    combine_verdicts,
    differentiate,
    is_zero,
    parse_expr,
)

Key = tuple[int, ...]
Scalar = Union[Expr, int, Fraction]


class MultivectorError(ScalarError):
    pass


class Multivector:
    """A k-vector field ``sum_I c_I d_I`` with ``I`` strictly increasing.

    Components are stored simplified; zero components are dropped.  A
    degree above the chart dimension (or the degree -1 produced by
    bracketing two functions) only admits the zero object.
    """

    __slots__ = ("chart", "degree", "components")

    def __init__(self, chart: Chart, degree: int, components: Mapping[Key, Scalar] | None = None):
        if degree < -1:
            raise MultivectorError(f"invalid degree {degree}")
        comps: dict[Key, Expr] = {}
        for key, coef in (components or {}).items():
            key = tuple(key)
            if len(key) != degree or any(a >= b for a, b in zip(key, key[1:])):
                raise MultivectorError(f"bad component key {key} for degree {degree}")
            if any(i < 0 or i >= chart.dim for i in key):
                raise MultivectorError(f"index out of range in {key}")
            if not isinstance(coef, Expr):
                coef = chart.const(coef)
            elif coef.chart != chart:
                raise ChartMismatchError(f"{coef.chart} vs {chart}")
            coef = coef.simplify()
            if not coef.canonical().is_zero:
                comps[key] = coef
        self.chart = chart
        self.degree = degree
        self.components = dict(sorted(comps.items()))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "Multivector":
        return cls(chart, degree)

    @classmethod
    def scalar(cls, f: Expr) -> "Multivector":
        return cls(f.chart, 0, {(): f})

    @classmethod
    def basis(cls, chart: Chart, *coords: str) -> "Multivector":
        """``d_{c1} ^ d_{c2} ^ ...`` for the named coordinates."""
        idx = [chart.index(c) for c in coords]
        if len(set(idx)) != len(idx):
            return cls(chart, len(idx))
        return cls(chart, len(idx), {tuple(sorted(idx)): _perm_sign(idx)})

    @classmethod
    def vector(cls, chart: Chart, coefficients: Mapping[str, Scalar] | Sequence[Scalar]) -> "Multivector":
        if isinstance(coefficients, Mapping):
            comps = {(chart.index(c),): v for c, v in coefficients.items()}
        else:
            if len(coefficients) != chart.dim:
                raise MultivectorError("one coefficient per coordinate is required")
            comps = {(i,): v for i, v in enumerate(coefficients)}
        return cls(chart, 1, comps)

    # -- algebra ------------------------------------------------------------

    def _check(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.chart != self.chart:
            raise ChartMismatchError(f"{self.chart} vs {other.chart}")

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        if self.degree != other.degree:
            if not self.components:
                return other
            if not other.components:
                return self
            raise MultivectorError("cannot add multivectors of different degree")
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return Multivector(self.chart, self.degree, out)

    def __neg__(self) -> "Multivector":
        return Multivector(self.chart, self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def scale(self, f: Scalar) -> "Multivector":
        return Multivector(self.chart, self.degree, {k: v * f for k, v in self.components.items()})

    def __mul__(self, f: Scalar) -> "Multivector":
        if isinstance(f, Multivector):
            return NotImplemented
        return self.scale(f)

    __rmul__ = __mul__

    def __xor__(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    def __getitem__(self, key: Key) -> Expr:
        return self.components.get(tuple(key), self.chart.const(0))

    def coefficient(self, *coords: str) -> Expr:
        idx = [self.chart.index(c) for c in coords]
        return self[tuple(sorted(idx))] * _perm_sign(idx)

    @property
    def is_zero_object(self) -> bool:
        return not self.components

    def zero_verdict(self, seed: int = 0) -> ZeroVerdict:
        return combine_verdicts(is_zero(v, seed) for v in self.components.values())

    def nonzero_verdict(self, seed: int = 0) -> ZeroVerdict:
        """Verdict on whether some component is nonzero (worst case first)."""
        verdicts = [is_zero(v, seed) for v in self.components.values()]
        for v in verdicts:
            if not v.is_zero and v.proven:
                return v
        for v in verdicts:
            if not v.is_zero:
                return v
        return combine_verdicts(verdicts)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        if self.chart != other.chart:
            return False
        if not self.components and not other.components:
            return True
        return self.degree == other.degree and self.components == other.components

    def __hash__(self):
        return hash((self.chart, self.degree, tuple(self.components.items())))

    # -- vector field helpers -----------------------------------------------

    def __call__(self, f: Expr) -> Expr:
        return apply(self, f)

    def as_list(self) -> list[Expr]:
        if self.degree != 1:
            raise MultivectorError("not a vector field")
        return [self[(i,)] for i in range(self.chart.dim)]

    # -- text / json --------------------------------------------------------

    def __str__(self):
        if not self.components:
            return "0"
        if self.degree == 0:
            return str(self.components[()])
        parts = []
        for key, coef in self.components.items():
            basis = "^".join("d" + self.chart.coords[i] for i in key)
            text = str(coef)
            if text == "1":
                parts.append(basis)
            elif text == "-1":
                parts.append("-" + basis)
            else:
                if any(op in text.lstrip("-") for op in " /"):
                    text = f"({text})"
                parts.append(f"{text} * {basis}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Multivector(degree={self.degree}, {str(self)!r})"

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "components": {",".join(map(str, k)): str(v) for k, v in self.components.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping, chart: Chart) -> "Multivector":
        degree = int(data["degree"])
        comps = {}
        for key, text in data.get("components", {}).items():
            idx = tuple(int(s) for s in key.split(",")) if key.strip() else ()
            comps[idx] = parse_expr(text, chart)
        return cls(chart, degree, comps)


VectorField = Multivector


def vector_field(chart: Chart, coefficients) -> Multivector:
    return Multivector.vector(chart, coefficients)


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    for a, b in combinations(range(len(seq)), 2):
        if seq[a] > seq[b]:
            sign = -sign
    return sign


def _check_pair(P: Multivector, Q: Multivector) -> Chart:
    if P.chart != Q.chart:
        raise ChartMismatchError(f"{P.chart} vs {Q.chart}")
    return P.chart


def wedge(P: Multivector, Q: Multivector) -> Multivector:
    chart = _check_pair(P, Q)
    degree = P.degree + Q.degree
    if P.degree < 0 or Q.degree < 0:
        return Multivector(chart, max(degree, -1))
    out: dict[Key, Expr] = {}
    if degree <= chart.dim:
        for I, f in P.components.items():
            for J, g in Q.components.items():
                if set(I) & set(J):
                    continue
                merged = I + J
                key = tuple(sorted(merged))
                term = f * g * _perm_sign(merged)
                out[key] = out[key] + term if key in out else term
    return Multivector(chart, degree, out)


def apply(X: Multivector, f: Expr) -> Expr:
    """``X(f) = sum_i X^i d_i f``."""
    if X.degree != 1:
        raise MultivectorError("apply needs a vector field")
    if f.chart != X.chart:
        raise ChartMismatchError(f"{f.chart} vs {X.chart}")
    total = X.chart.const(0)
    for (i,), c in X.components.items():
        total = total + c * differentiate(f, X.chart.coords[i])
    return total.simplify()


def lie_bracket(X: Multivector, Y: Multivector) -> Multivector:
    chart = _check_pair(X, Y)
    if X.degree != 1 or Y.degree != 1:
        raise MultivectorError("lie_bracket needs vector fields")
    out = {}
    for i in range(chart.dim):
        c = apply(X, Y[(i,)]) - apply(Y, X[(i,)])
        out[(i,)] = c
    return Multivector(chart, 1, out)


def _contract_df(P: Multivector, f: Expr) -> Multivector:
    # i_{df} P, contracting into the first slot
    chart = P.chart
    grads = [differentiate(f, c) for c in chart.coords]
    out: dict[Key, Expr] = {}
    for I, c in P.components.items():
        for pos, i in enumerate(I):
            if grads[i].canonical().is_zero:
                continue
            rest = I[:pos] + I[pos + 1:]
            term = c * grads[i] * (-1) ** pos
            out[rest] = out[rest] + term if rest in out else term
    return Multivector(chart, P.degree - 1, out)


def _decompose(key: Key, coef: Expr, chart: Chart) -> list[Multivector]:
    factors = [Multivector(chart, 1, {(key[0],): coef})]
    factors += [Multivector(chart, 1, {(i,): 1}) for i in key[1:]]
    return factors


def _wedge_all(chart: Chart, fields: Iterable[Multivector]) -> Multivector:
    out = Multivector.scalar(chart.const(1))
    for X in fields:
        out = wedge(out, X)
    return out


def schouten_nijenhuis(P: Multivector, Q: Multivector) -> Multivector:
    """Schouten-Nijenhuis bracket ``[P, Q]``.

    For decomposable arguments of degrees p, q >= 1::

        [X1^...^Xp, Y1^...^Yq] = (-1)^(p+1) sum_{i,j} (-1)^(i+j)
            [Xi, Yj] ^ X1..^Xi..^Xp ^ Y1..^Yj..^Yq

    extended bilinearly, each component ``c d_I`` being written as
    ``(c d_{i1}) ^ d_{i2} ^ ...``.  For a function ``f``, ``[P, f]`` is the
    contraction of ``df`` into the first slot of ``P`` (so ``[X, f] = X(f)``
    and ``[L, f] = sharp(L, f)``) and ``[f, P] = (-1)^p [P, f]``.
    """
    chart = _check_pair(P, Q)
    p, q = P.degree, Q.degree
    if p <= 0 and q <= 0:
        return Multivector(chart, max(p + q - 1, -1))
    if q == 0:
        f = Q[()]
        return _contract_df(P, f)
    if p == 0:
        return _contract_df(Q, P[()]).scale((-1) ** q)
    degree = p + q - 1
    total = Multivector(chart, degree)
    if degree > chart.dim:
        return total
    for I, f in P.components.items():
        Xs = _decompose(I, f, chart)
        for J, g in Q.components.items():
            Ys = _decompose(J, g, chart)
            for a in range(p):
                for b in range(q):
                    if a > 0 and b > 0:
                        continue  # coordinate fields commute
                    br = lie_bracket(Xs[a], Ys[b])
                    if br.is_zero_object:
                        continue
                    rest = Xs[:a] + Xs[a + 1:] + Ys[:b] + Ys[b + 1:]
                    term = _wedge_all(chart, [br] + rest)
                    sign = (-1) ** (p + 1) * (-1) ** (a + b + 2)
                    total = total + term.scale(sign)
    return total


def sharp(lam: Multivector, f: Expr) -> Multivector:
    """``Lambda^(df) = sum_{i<j} L^{ij} ((d_i f) d_j - (d_j f) d_i)``."""
    if lam.degree != 2:
        raise MultivectorError("sharp needs a bivector")
    if f.chart != lam.chart:
        raise ChartMismatchError(f"{f.chart} vs {lam.chart}")
    chart = lam.chart
    out: dict[Key, Expr] = {}
    for (i, j), c in lam.components.items():
        di = differentiate(f, chart.coords[i])
        dj = differentiate(f, chart.coords[j])
        for k, v in (((j,), c * di), ((i,), -c * dj)):
            out[k] = out[k] + v if k in out else v
    return Multivector(chart, 1, out)


def bivector_pairing(lam: Multivector, f: Expr, g: Expr) -> Expr:
    """``Lambda(df, dg)``."""
    return apply(sharp(lam, f), g)
