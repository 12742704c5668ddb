"""Fixed-step integration of t-dependent Lie systems, constant-of-motion
drift and the Riccati superposition check."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .liesys import TDepVectorField
from .scalar import Expr, ScalarError, compile_expr

RESIDUAL_TOL = 1e-4
CROSS_RATIO_TOL = 1e-6
MIN_GAP = 1e-6


class IntegrationError(ScalarError):
    """Evaluation failed or the state stopped being finite; ``time`` says where."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t = {time:.17g}")
        self.time = time


class SuperpositionError(ScalarError):
    pass


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[tuple[float, ...], ...]
    system: TDepVectorField | None
    coords: tuple[str, ...]

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    @property
    def final(self) -> tuple[float, ...]:
        return self.states[-1]

    def column(self, coord: str | int = 0) -> list[float]:
        i = self.coords.index(coord) if isinstance(coord, str) else coord
        return [s[i] for s in self.states]

    def to_csv(self, target: str | Path | io.TextIOBase | None = None) -> str:
        """CSV with header ``t,<coords>`` at 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.coords])
        for t, s in zip(self.times, self.states):
            w.writerow([f"{t:.17g}", *(f"{v:.17g}" for v in s)])
        text = buf.getvalue()
        if isinstance(target, (str, Path)):
            Path(target).write_text(text)
        elif target is not None:
            target.write(text)
        return text


def _rhs(X: TDepVectorField) -> Callable[[float, Sequence[float]], list[float]]:
    coeffs = [compile_expr(b) for b in X.coefficients]
    n = X.chart.dim
    comps = [[compile_expr(F[(k,)]) if (k,) in F.components else None for k in range(n)] for F in X.algebra.basis]

    def f(t: float, x: Sequence[float]) -> list[float]:
        out = [0.0] * n
        for b, row in zip(coeffs, comps):
            bt = b(t)
            if bt == 0.0:
                continue
            for k, c in enumerate(row):
                if c is not None:
                    out[k] += bt * c(*x)
        return out

    return f


def _safe(f, t, x):
    try:
        v = f(t, x)
    except ZeroDivisionError:
        raise IntegrationError("pole encountered", t) from None
    except (OverflowError, ValueError):
        raise IntegrationError("non-finite state", t) from None
    if not all(math.isfinite(c) for c in v):
        raise IntegrationError("non-finite state", t)
    return v


def integrate(X: TDepVectorField, x0: Sequence[float], t0: float, t1: float, step: float) -> Trajectory:
    """Classical RK4 with fixed ``step``; the last step is shortened to land on ``t1``."""
    if not step > 0:
        raise ValueError("step must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    n = X.chart.dim
    x = [float(v) for v in x0]
    if len(x) != n:
        raise ValueError(f"initial point needs {n} coordinates, got {len(x)}")
    f = _rhs(X)
    nsteps = max(1, math.ceil((t1 - t0) / step - 1e-9))
    times = [t0]
    states = [tuple(x)]
    t = t0
    for i in range(1, nsteps + 1):
        t_next = t1 if i == nsteps else t0 + i * step
        h = t_next - t
        k1 = _safe(f, t, x)
        k2 = _safe(f, t + h / 2, [a + h / 2 * b for a, b in zip(x, k1)])
        k3 = _safe(f, t + h / 2, [a + h / 2 * b for a, b in zip(x, k2)])
        k4 = _safe(f, t_next, [a + h * b for a, b in zip(x, k3)])
        x = [a + h / 6 * (p + 2 * q + 2 * r + s) for a, p, q, r, s in zip(x, k1, k2, k3, k4)]
        if not all(math.isfinite(v) for v in x):
            raise IntegrationError("non-finite state", t_next)
        t = t_next
        times.append(t)
        states.append(tuple(x))
    return Trajectory(tuple(times), tuple(states), X, X.chart.coords)


def com_drift(traj: Trajectory, f: Expr) -> float:
    """``max |f(x(t)) - f(x(t0))| / max(1, |f(x(t0))|)`` over the samples."""
    if f.chart.coords != traj.coords:
        raise ValueError(f"function lives on {f.chart.coords}, trajectory on {traj.coords}")
    g = compile_expr(f)
    vals = []
    for t, s in zip(traj.times, traj.states):
        try:
            v = g(*s)
        except ZeroDivisionError:
            raise IntegrationError("pole of f along the trajectory", t) from None
        if not math.isfinite(v):
            raise IntegrationError("non-finite value of f", t)
        vals.append(v)
    f0 = vals[0]
    return max(abs(v - f0) for v in vals) / max(1.0, abs(f0))


def superpose(x1: float, x2: float, x3: float, k: float) -> float:
    den = (x3 - x2) + k * (x1 - x3)
    return (x1 * (x3 - x2) + k * x2 * (x1 - x3)) / den


def cross_ratio(x1: float, x2: float, x3: float, x: float) -> float:
    return (x1 - x) * (x3 - x2) / ((x - x2) * (x1 - x3))


@dataclass(frozen=True)
class SuperpositionReport:
    k: float
    residual: float
    cross_ratio_drift: float
    solution: Trajectory
    residual_tol: float = RESIDUAL_TOL
    cross_ratio_tol: float = CROSS_RATIO_TOL

    @property
    def passed(self) -> bool:
        return self.residual < self.residual_tol and self.cross_ratio_drift < self.cross_ratio_tol

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "residual": self.residual,
            "residual_tol": self.residual_tol,
            "cross_ratio_drift": self.cross_ratio_drift,
            "cross_ratio_tol": self.cross_ratio_tol,
            "final": self.solution.final[0],
            "passed": self.passed,
        }


def riccati_superposition_check(solutions: Sequence[Trajectory], k: float) -> SuperpositionReport:
    """Build ``x`` from three particular solutions and ``k``, then check the
    ODE residual (central differences) and constancy of the cross-ratio.

    The cross-ratio is only defined away from ``x = x2``; when the built
    solution meets ``x2`` (e.g. ``k = 0`` makes ``x = x1``) the samples where it
    is undefined are skipped.
    """
    if len(solutions) != 3:
        raise SuperpositionError("three particular solutions are required")
    a, b, c = solutions
    if not (a.times == b.times == c.times):
        raise SuperpositionError("solutions must share their time grid")
    if any(len(s.coords) != 1 for s in solutions):
        raise SuperpositionError("solutions must be scalar")
    system = a.system
    if system is None:
        raise SuperpositionError("the solutions carry no system to check against")
    times = a.times
    if len(times) < 3:
        raise SuperpositionError("need at least three samples")
    xs1, xs2, xs3 = (s.column(0) for s in solutions)
    gap = min(min(abs(p - q), abs(q - r), abs(p - r)) for p, q, r in zip(xs1, xs2, xs3))
    if gap <= MIN_GAP:
        raise SuperpositionError(f"solutions are not pairwise distinct (min gap {gap:.3g})")
    xs = []
    for t, p, q, r in zip(times, xs1, xs2, xs3):
        den = (r - q) + k * (p - r)
        if abs(den) <= 1e-12 * max(1.0, abs(r - q), abs(k * (p - r))):
            raise SuperpositionError(f"denominator vanishes at t = {t:.17g}")
        xs.append(superpose(p, q, r, k))
    f = _rhs(system)
    residual = 0.0
    for i in range(1, len(times) - 1):
        h0, h1 = times[i] - times[i - 1], times[i + 1] - times[i]
        # nonuniform central difference, exact for quadratics
        d = (xs[i + 1] * h0 * h0 - xs[i - 1] * h1 * h1 + xs[i] * (h1 * h1 - h0 * h0)) / (h0 * h1 * (h0 + h1))
        residual = max(residual, abs(d - _safe(f, times[i], [xs[i]])[0]))
    crs = []
    for p, q, r, x in zip(xs1, xs2, xs3, xs):
        if abs(x - q) > MIN_GAP:
            crs.append(cross_ratio(p, q, r, x))
    drift = max(crs) - min(crs) if crs else 0.0
    sol = Trajectory(times, tuple((x,) for x in xs), system, a.coords)
    return SuperpositionReport(float(k), residual, drift, sol)
