"""Jacobi structures, Hamiltonian vector fields and the Jacobi bracket."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from .multivec import (
    Multivector,
    MultivectorError,
    apply,
    bivector_pairing,
    schouten_nijenhuis,
    sharp,
    wedge,
)
from .scalar import Chart, ChartMismatchError, Expr, ScalarError, ZeroVerdict, is_zero
from .span import solve_rational


class JacobiError(ScalarError):
    pass


class UnusableStructureError(JacobiError):
    """The (lambda, reeb) pair failed its compatibility checks."""


class NonPolynomialError(JacobiError):
    pass


@dataclass(frozen=True, eq=False)
class JacobiStructure:
    """A bivector ``bivector`` and Reeb field ``reeb`` on ``chart``.

    ``verdicts`` holds the zero verdicts of ``[L,L] - 2 R^L`` and ``[R,L]``.
    """

    chart: Chart
    bivector: Multivector
    reeb: Multivector
    verdicts: tuple[ZeroVerdict, ZeroVerdict]
    annotations: tuple[str, ...] = ()

    @property
    def usable(self) -> bool:
        return all(v.is_zero for v in self.verdicts)

    @property
    def is_poisson(self) -> bool:
        return self.reeb.is_zero_object

    @property
    def certainty(self) -> str:
        return "proven" if all(v.proven for v in self.verdicts) else "probable"

    def require_usable(self) -> None:
        if not self.usable:
            raise UnusableStructureError(
                "not a Jacobi structure: "
                f"[L,L]-2R^L is {self.verdicts[0]}, [R,L] is {self.verdicts[1]}"
            )


@dataclass(frozen=True)
class HamiltonianPair:
    field: Multivector
    function: Expr
    good: bool


def check_jacobi(bivector: Multivector, reeb: Multivector, seed: int = 0, annotations=()) -> JacobiStructure:
    if bivector.degree != 2 or reeb.degree != 1:
        raise MultivectorError("expected a bivector and a vector field")
    if bivector.chart != reeb.chart:
        raise ChartMismatchError(f"{bivector.chart} vs {reeb.chart}")
    first = schouten_nijenhuis(bivector, bivector) - wedge(reeb, bivector).scale(2)
    second = schouten_nijenhuis(reeb, bivector)
    verdicts = (first.zero_verdict(seed), second.zero_verdict(seed))
    return JacobiStructure(bivector.chart, bivector, reeb, verdicts, tuple(annotations))


def poisson_structure(bivector: Multivector, seed: int = 0) -> JacobiStructure:
    return check_jacobi(bivector, Multivector.zero(bivector.chart, 1), seed)


def _field_of(J: JacobiStructure, f: Expr) -> Multivector:
    if f.chart != J.chart:
        raise ChartMismatchError(f"{f.chart} vs {J.chart}")
    return sharp(J.bivector, f) + J.reeb.scale(f)


def hamiltonian_vf(J: JacobiStructure, f: Expr, seed: int = 0) -> HamiltonianPair:
    """``X_f = sharp(L, f) + f R`` together with the good flag ``R f == 0``."""
    J.require_usable()
    field = _field_of(J, f)
    return HamiltonianPair(field, f, is_zero(apply(J.reeb, f), seed).is_zero)


def jacobi_bracket(J: JacobiStructure, f: Expr, g: Expr) -> Expr:
    """``{f, g} = L(df, dg) + f R(g) - g R(f)``."""
    J.require_usable()
    if f.chart != J.chart or g.chart != J.chart:
        raise ChartMismatchError("bracket arguments must live on the structure's chart")
    out = bivector_pairing(J.bivector, f, g)
    if not J.reeb.is_zero_object:
        out = out + f * apply(J.reeb, g) - g * apply(J.reeb, f)
    return out.simplify()


def is_good(J: JacobiStructure, f: Expr, seed: int = 0) -> bool:
    J.require_usable()
    return is_zero(apply(J.reeb, f), seed).is_zero


def monomials(chart: Chart, max_degree: int) -> list[Expr]:
    out = []
    for d in range(max_degree + 1):
        for combo in combinations_with_replacement(range(chart.dim), d):
            m = chart.const(1)
            for i in combo:
                m = m * chart.coord(chart.coords[i])
            out.append(m.simplify())
    return out


def _poly_coefficients(f: Expr) -> dict:
    return {mono: c for mono, c in f.canonical().numer}


def solve_hamiltonian(J: JacobiStructure, X: Multivector, max_degree: int) -> Expr | None:
    """Polynomial ``f`` of degree <= ``max_degree`` with ``X_f == X``, or None.

    Monomial coefficients of ``X_f - X`` are equated to zero and the exact
    linear system solved; free unknowns (the kernel of ``f -> X_f``) are
    set to zero.
    """
    J.require_usable()
    if X.degree != 1:
        raise MultivectorError("solve_hamiltonian needs a vector field")
    if X.chart != J.chart:
        raise ChartMismatchError(f"{X.chart} vs {J.chart}")
    if max_degree < 0:
        raise JacobiError("max_degree must be non-negative")
    for mv in (J.bivector, J.reeb, X):
        for c in mv.components.values():
            if not c.is_polynomial():
                raise NonPolynomialError(f"non-polynomial coefficient {c}")
    chart = J.chart
    basis = monomials(chart, max_degree)
    columns = [_field_of(J, m) for m in basis]
    equations: dict = {}
    for n, col in enumerate(columns):
        for (i,), c in col.components.items():
            for mono, coef in _poly_coefficients(c).items():
                equations.setdefault((i, mono), {})[n] = coef
    target = {}
    for (i,), c in X.components.items():
        for mono, coef in _poly_coefficients(c).items():
            target[(i, mono)] = coef
            equations.setdefault((i, mono), {})
    keys = sorted(equations)
    rows = [[equations[k].get(n, Fraction(0)) for n in range(len(basis))] for k in keys]
    rhs = [target.get(k, Fraction(0)) for k in keys]
    sol = solve_rational(rows, rhs, len(basis))
    if sol is None:
        return None
    f = chart.const(0)
    for c, m in zip(sol, basis):
        if c:
            f = f + m * c
    return f.simplify()
