"""Linear algebra over the reals for multivectors with function coefficients.

Membership of a multivector in the real span of others is decided exactly
for exp-free coefficients (clear a common denominator, compare monomial
coefficients) and by seeded sampling plus a symbolic residual check
otherwise.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

import mpmath
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .multivec import Multivector
from .scalar import SAMPLE_PRECISION, _eval_tree, sample_point, to_fractions


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def solve_rational(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], ncols: int) -> list[Fraction] | None:
    """One exact solution of ``A c = b`` (free variables set to 0), or None."""
    if not rows:
        return [Fraction(0)] * ncols
    aug = [[QQ(v.numerator, v.denominator) for v in row] + [QQ(b.numerator, b.denominator)]
           for row, b in zip(rows, rhs)]
    M = DomainMatrix(aug, (len(aug), ncols + 1), QQ)
    R, pivots = M.rref()
    if ncols in pivots:
        return None
    R = R.to_list()
    sol = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        sol[col] = _to_fraction(R[r][ncols])
    return sol


def rational_rank(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    if not rows or not ncols:
        return 0
    M = DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in rows], (len(rows), ncols), QQ)
    return M.rank()


def _exact_columns(items: Sequence[Multivector]) -> list[dict]:
    exprs = []
    index = []
    for n, mv in enumerate(items):
        for key, c in mv.components.items():
            exprs.append(c)
            index.append((n, key))
    cols: list[dict] = [{} for _ in items]
    if not exprs:
        return cols
    _, elems = to_fractions(exprs)
    common = elems[0].denom
    for e in elems[1:]:
        common = common.lcm(e.denom)
    for (n, key), e in zip(index, elems):
        poly = e.numer * common.exquo(e.denom)
        for mono, c in poly.terms():
            cols[n][(key, mono)] = _to_fraction(c)
    return cols


def express_in_span(basis: Sequence[Multivector], target: Multivector, seed: int = 0) -> tuple[list[Fraction] | None, bool]:
    """Real coefficients ``c`` with ``target = sum c_k basis_k``.

    Returns ``(coefficients or None, exact)``; ``exact`` is False when the
    sampled path was used.
    """
    items = list(basis) + [target]
    if not any(c.has_exp for mv in items for c in mv.components.values()):
        cols = _exact_columns(items)
        rows_keys = sorted(set().union(*cols), key=repr)
        rows = [[cols[k].get(rk, Fraction(0)) for k in range(len(basis))] for rk in rows_keys]
        rhs = [cols[-1].get(rk, Fraction(0)) for rk in rows_keys]
        return solve_rational(rows, rhs, len(basis)), True
    return _sampled_express(basis, target, seed), False


def _mp(v) -> mpmath.mpf:
    # exp-free subtrees evaluate to Fraction, which mpmath matrices do not coerce
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _sampled_express(basis: Sequence[Multivector], target: Multivector, seed: int) -> list[Fraction] | None:
    chart = target.chart
    if not basis:
        return [] if target.zero_verdict(seed).is_zero else None
    keys = sorted(set().union(*(mv.components for mv in basis), target.components))
    n_points = max(20, 2 * len(basis))
    rng = random.Random(seed)
    rows, rhs = [], []
    with mpmath.workprec(SAMPLE_PRECISION):
        attempts = 0
        while len(rows) < n_points * len(keys) and attempts < 50 * n_points:
            attempts += 1
            point = sample_point(chart, rng)
            vals = [mpmath.mpf(v.numerator) / v.denominator for v in point.values()]
            try:
                block = [[_mp(_eval_tree(mv[k], vals, mpmath.exp, {})) for mv in basis] for k in keys]
                rblock = [_mp(_eval_tree(target[k], vals, mpmath.exp, {})) for k in keys]
            except (ZeroDivisionError, ArithmeticError):
                continue
            rows.extend(block)
            rhs.extend(rblock)
        A = mpmath.matrix(rows)
        b = mpmath.matrix(rhs)
        # least squares via normal equations; mpmath's Householder QR divides
        # by zero when a pivot is exactly 0. The residual is re-checked below.
        try:
            x = mpmath.lu_solve(A, b)
        except (ZeroDivisionError, ValueError):
            return None
    coeffs = [Fraction(str(mpmath.nstr(v, 30))).limit_denominator(10**6) for v in x]
    residual = target
    for c, mv in zip(coeffs, basis):
        residual = residual - mv.scale(c)
    return coeffs if residual.zero_verdict(seed).is_zero else None


def independent_subset(items: Sequence[Multivector], seed: int = 0) -> tuple[list[int], bool]:
    """Indices of a maximal independent prefix-greedy subset."""
    kept: list[int] = []
    exact = True
    for n, mv in enumerate(items):
        if mv.is_zero_object:
            continue
        coeffs, ex = express_in_span([items[k] for k in kept], mv, seed)
        exact &= ex
        if coeffs is None:
            kept.append(n)
    return kept, exact

