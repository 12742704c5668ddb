"""Lie systems: Vessiot-Guldberg algebras, Hamiltonian functions and
constants of motion."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .jacobi import (
    JacobiError,
    JacobiStructure,
    hamiltonian_vf,
    is_good,
    jacobi_bracket,
    solve_hamiltonian,
)
from .multivec import Multivector, MultivectorError, lie_bracket
from .scalar import Chart, ChartMismatchError, Expr, evaluate, is_zero, parse_expr
from .span import express_in_span, independent_subset

DEFAULT_MAX_DIM = 12
TIME = Chart("time", ("t",))


class LieSystemError(JacobiError):
    pass


class NotGoodError(LieSystemError):
    pass


class InconsistencyError(LieSystemError):
    pass


@dataclass(frozen=True)
class ExceedsBound:
    """Closure did not terminate within ``max_dim`` generators."""

    max_dim: int
    partial_basis: tuple[Multivector, ...]

    def to_json(self) -> dict:
        return {"exceeds_bound": self.max_dim, "partial_dimension": len(self.partial_basis)}


def _frac_text(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True, eq=False)
class VGAlgebra:
    """Basis ``X_1..X_r`` with ``[X_i, X_j] = sum_k c[i][j][k] X_k``.

    ``exact`` is False when span membership was decided by sampling.
    """

    chart: Chart
    basis: tuple[Multivector, ...]
    structure_constants: tuple[tuple[tuple[Fraction, ...], ...], ...]
    exact: bool = True

    @property
    def dim(self) -> int:
        return len(self.basis)

    def c(self, i: int, j: int, k: int) -> Fraction:
        return self.structure_constants[i][j][k]

    def to_json(self) -> dict:
        consts = {}
        r = self.dim
        for i in range(r):
            for j in range(r):
                for k in range(r):
                    v = self.structure_constants[i][j][k]
                    if v:
                        consts[f"{i},{j},{k}"] = _frac_text(v)
        return {
            "chart": list(self.chart.coords),
            "dimension": r,
            "exact": self.exact,
            "basis": [X.to_json() for X in self.basis],
            "structure_constants": consts,
        }


def _structure_constants(basis: Sequence[Multivector], seed: int):
    r = len(basis)
    zero = tuple(Fraction(0) for _ in range(r))
    table = [[zero] * r for _ in range(r)]
    exact = True
    for i, j in combinations(range(r), 2):
        coeffs, ex = express_in_span(basis, lie_bracket(basis[i], basis[j]), seed)
        exact &= ex
        if coeffs is None:
            return None, exact
        table[i][j] = tuple(coeffs)
        table[j][i] = tuple(-c for c in coeffs)
    return tuple(tuple(row) for row in table), exact


def lie_closure(fields: Sequence[Multivector], max_dim: int = DEFAULT_MAX_DIM, seed: int = 0) -> VGAlgebra | ExceedsBound:
    """Smallest Lie algebra containing ``fields``, or :class:`ExceedsBound`."""
    fields = list(fields)
    if any(X.degree != 1 for X in fields):
        raise MultivectorError("lie_closure needs vector fields")
    if not fields:
        raise LieSystemError("need at least one field to fix the chart")
    chart = fields[0].chart
    if any(X.chart != chart for X in fields):
        raise ChartMismatchError("fields live on different charts")
    if max_dim < len(fields):
        raise LieSystemError("max_dim must be at least the number of fields")
    keep, exact = independent_subset(fields, seed)
    basis = [fields[k] for k in keep]
    done = 0  # brackets among basis[:done] are already in the span
    while done < len(basis):
        for i in range(done + 1):
            Z = lie_bracket(basis[i], basis[done])
            if Z.is_zero_object:
                continue
            coeffs, ex = express_in_span(basis, Z, seed)
            exact &= ex
            if coeffs is None:
                basis.append(Z)
                if len(basis) > max_dim:
                    return ExceedsBound(max_dim, tuple(basis))
        done += 1
    consts, ex = _structure_constants(basis, seed)
    if consts is None:  # pragma: no cover - closure loop guarantees membership
        raise LieSystemError("closure produced a non-closed basis")
    return VGAlgebra(chart, tuple(basis), consts, exact and ex)


def vg_algebra(basis: Sequence[Multivector], seed: int = 0) -> VGAlgebra:
    """Check that ``basis`` is independent and closed and return the algebra."""
    out = lie_closure(basis, max_dim=len(basis), seed=seed)
    if isinstance(out, ExceedsBound) or out.dim != len(basis):
        raise LieSystemError("basis is not an independent closed set of vector fields")
    return out


def is_hamiltonian_algebra(J: JacobiStructure, V: VGAlgebra, max_degree: int) -> list[Expr | None]:
    """Polynomial Hamiltonian per basis element; ``None`` means inconclusive."""
    if V.basis and V.chart != J.chart:
        raise ChartMismatchError(f"{V.chart} vs {J.chart}")
    return [solve_hamiltonian(J, X, max_degree) for X in V.basis]


@dataclass(frozen=True, eq=False)
class FunctionAlgebra:
    """Span of ``generators`` closed under the Jacobi bracket.

    ``table[(i, j)]`` lists the coordinates of ``{g_i, g_j}`` in the
    generator basis, for ``i < j``.
    """

    structure: JacobiStructure
    names: tuple[str, ...]
    generators: tuple[Expr, ...]
    s_terms: dict
    table: dict
    exact: bool = True

    def bracket(self, i: int, j: int) -> tuple[Fraction, ...]:
        if i == j:
            return tuple(Fraction(0) for _ in self.generators)
        if i < j:
            return self.table[(i, j)]
        return tuple(-c for c in self.table[(j, i)])

    def to_json(self) -> dict:
        def combo(coeffs):
            return {self.names[k]: _frac_text(c) for k, c in enumerate(coeffs) if c}

        return {
            "generators": {n: str(g) for n, g in zip(self.names, self.generators)},
            "s_terms": {f"s{i + 1}{j + 1}": str(s) for (i, j), s in self.s_terms.items()},
            "brackets": {f"{self.names[i]},{self.names[j]}": combo(v) for (i, j), v in self.table.items()},
            "exact": self.exact,
        }


def build_function_algebra(J: JacobiStructure, V: VGAlgebra, hams: Sequence[Expr], seed: int = 0, names: Sequence[str] | None = None) -> FunctionAlgebra:
    """Function Lie algebra spanned by good Hamiltonians ``h_i`` and the
    central corrections ``s_ij = {h_i, h_j} - sum_k c_ijk h_k``."""
    J.require_usable()
    if len(hams) != V.dim:
        raise LieSystemError("one Hamiltonian per basis field is required")
    names = list(names) if names else [f"h{i + 1}" for i in range(V.dim)]
    for name, h, X in zip(names, hams, V.basis):
        pair = hamiltonian_vf(J, h, seed)
        if not pair.good:
            raise NotGoodError(f"{name} = {h} is not a good Hamiltonian function")
        if not (pair.field - X).zero_verdict(seed).is_zero:
            raise LieSystemError(f"{name} = {h} is not a Hamiltonian function of {X}")
    s_terms = {}
    for i, j in combinations(range(V.dim), 2):
        s = jacobi_bracket(J, hams[i], hams[j])
        for k in range(V.dim):
            if V.c(i, j, k):
                s = s - hams[k] * V.c(i, j, k)
        s = s.simplify()
        if not hamiltonian_vf(J, s, seed).field.zero_verdict(seed).is_zero:
            raise InconsistencyError(f"s_{i + 1}{j + 1} = {s} has a nonzero Hamiltonian field")
        s_terms[(i, j)] = s
    gens = list(hams)
    gen_names = list(names)
    exact = V.exact
    for (i, j), s in s_terms.items():
        if s.canonical().is_zero:
            continue
        coeffs, ex = express_in_span([Multivector.scalar(g) for g in gens], Multivector.scalar(s), seed)
        exact &= ex
        if coeffs is None:
            gens.append(s)
            gen_names.append(f"s{i + 1}{j + 1}")
    scalars = [Multivector.scalar(g) for g in gens]
    table = {}
    for i, j in combinations(range(len(gens)), 2):
        b = jacobi_bracket(J, gens[i], gens[j])
        coeffs, ex = express_in_span(scalars, Multivector.scalar(b), seed)
        exact &= ex
        if coeffs is None:
            raise InconsistencyError(f"{{{gen_names[i]}, {gen_names[j]}}} leaves the generator span")
        table[(i, j)] = tuple(coeffs)
    return FunctionAlgebra(J, tuple(gen_names), tuple(gens), s_terms, table, exact)


def check_constant_of_motion(J: JacobiStructure, f: Expr, A: FunctionAlgebra, seed: int = 0) -> bool:
    return all(is_zero(jacobi_bracket(J, f, h), seed).is_zero for h in A.generators)


@dataclass(frozen=True, eq=False)
class TDepVectorField:
    """``X_t = sum_i b_i(t) X_i`` with coefficients on the one-dimensional
    chart ``["t"]``."""

    algebra: VGAlgebra
    coefficients: tuple[Expr, ...]

    @property
    def chart(self) -> Chart:
        return self.algebra.chart

    def at(self, tau) -> Multivector:
        out = Multivector.zero(self.chart, 1)
        for b, X in zip(self.coefficients, self.algebra.basis):
            v = evaluate(b, {"t": tau})
            if isinstance(v, float):
                v = Fraction(v)
            if v:
                out = out + X.scale(v)
        return out


def assemble_tdvf(V: VGAlgebra, b: Sequence[Expr | str | int | Fraction]) -> TDepVectorField:
    if len(b) != V.dim:
        raise LieSystemError(f"expected {V.dim} coefficients, got {len(b)}")
    coeffs = []
    for c in b:
        if isinstance(c, str):
            c = parse_expr(c, TIME)
        elif not isinstance(c, Expr):
            c = TIME.const(c)
        if c.chart.coords != TIME.coords:
            raise ChartMismatchError("coefficients must be functions of t only")
        coeffs.append(c)
    return TDepVectorField(V, tuple(coeffs))
