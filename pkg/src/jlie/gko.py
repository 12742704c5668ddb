"""Registry of planar Vessiot-Guldberg algebras (classes P1-P8, I1-I20) and
the two obstruction detectors for Jacobi structures with both the bivector
and the Reeb field nonzero."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import permutations
from typing import Any, Mapping, Sequence

from .jacobi import NonPolynomialError, check_jacobi, hamiltonian_vf, poisson_structure
from .liesys import ExceedsBound, VGAlgebra, is_hamiltonian_algebra, lie_closure
from .multivec import Multivector, lie_bracket, wedge
from .scalar import Chart, Expr, ScalarError, ZeroVerdict, is_zero, parse_expr
from .span import express_in_span, independent_subset

PLANE = Chart("plane", ("x", "y"))
SCOPE = "no Jacobi structure with Lambda != 0 and R != 0 makes V Hamiltonian"
SEARCH_SCALES = tuple(
    sorted({s * Fraction(p, q) for p in (1, 2, 3) for q in (1, 2, 3) for s in (1, -1)})
)


class GKOError(ScalarError):
    pass


class UnknownClassError(GKOError):
    pass


class ParameterError(GKOError):
    pass


class WitnessError(GKOError):
    pass


class Verdict(str, Enum):
    POISSON = "Poisson"
    REEB_ONLY = "ReebOnly"
    NO = "No"
    NO_ASSERTED = "NoAsserted"


class ObstructionStatus(str, Enum):
    PROP1_FIRES = "Prop1Fires"
    PROP2_FIRES = "Prop2Fires"
    INCONCLUSIVE = "Inconclusive"


# -- detectors ----------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """One symbolic condition: ``expression`` must be zero (or nonzero)."""

    name: str
    expression: Multivector
    expect_zero: bool
    verdict: ZeroVerdict

    @property
    def holds(self) -> bool:
        return self.verdict.is_zero == self.expect_zero

    @property
    def proven(self) -> bool:
        return self.holds and self.verdict.proven

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "expression": str(self.expression),
            "expected": "zero" if self.expect_zero else "nonzero",
            "verdict": str(self.verdict),
            "certainty": self.verdict.certainty,
            "holds": self.holds,
        }


def _certify(name: str, mv: Multivector, expect_zero: bool, seed: int) -> Certificate:
    verdict = mv.zero_verdict(seed) if expect_zero else mv.nonzero_verdict(seed)
    return Certificate(name, mv, expect_zero, verdict)


@dataclass(frozen=True)
class ObstructionVerdict:
    status: ObstructionStatus
    certificates: tuple[Certificate, ...] = ()
    witness: tuple[tuple[Fraction, ...], ...] | None = None
    alpha: Fraction | None = None
    note: str = ""

    @property
    def fires(self) -> bool:
        return self.status is not ObstructionStatus.INCONCLUSIVE

    @property
    def certainty(self) -> str:
        return "proven" if all(c.verdict.proven for c in self.certificates) else "probable"

    def to_json(self) -> dict:
        out: dict[str, Any] = {"status": self.status.value}
        if self.witness is not None:
            out["witness"] = [[_ftext(c) for c in w] for w in self.witness]
        if self.alpha is not None:
            out["alpha"] = _ftext(self.alpha)
        if self.fires:
            out["scope"] = SCOPE
        if self.note:
            out["note"] = self.note
        out["certificates"] = [c.to_json() for c in self.certificates]
        return out


def _ftext(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _to_fraction(v) -> Fraction:
    if isinstance(v, Expr):
        e = v.simplify()
        if not e.is_number:
            raise WitnessError(f"coefficient {v} is not a rational constant")
        return e.value
    if isinstance(v, str):
        return _to_fraction(parse_expr(v, PLANE))
    if isinstance(v, float):
        raise WitnessError("witness coefficients must be exact rationals, not floats")
    try:
        return Fraction(v)
    except (TypeError, ValueError):
        raise WitnessError(f"bad coefficient {v!r}") from None


def _coeff_vector(V: VGAlgebra, w) -> tuple[Fraction, ...]:
    """Accepts a full-length sequence or a sparse ``{index: coefficient}`` map."""
    if isinstance(w, Mapping):
        out = [Fraction(0)] * V.dim
        for k, c in w.items():
            try:
                i = int(k)
            except (TypeError, ValueError):
                raise WitnessError(f"bad basis index {k!r}") from None
            if not 0 <= i < V.dim:
                raise WitnessError(f"basis index {i} out of range 0..{V.dim - 1}")
            out[i] = _to_fraction(c)
        return tuple(out)
    if isinstance(w, (str, bytes)) or not isinstance(w, Sequence):
        raise WitnessError("witness entries must be coefficient lists or index maps")
    if len(w) != V.dim:
        raise WitnessError(f"coefficient vector has length {len(w)}, expected {V.dim}")
    return tuple(_to_fraction(c) for c in w)


def _combine(V: VGAlgebra, coeffs: Sequence[Fraction]) -> Multivector:
    out = Multivector.zero(V.chart, 1)
    for c, X in zip(coeffs, V.basis):
        if c:
            out = out + X.scale(c)
    return out


def _check_planar(V: VGAlgebra) -> None:
    if V.chart.dim != 2:
        raise GKOError("the detectors need a 2-dimensional chart")


def _prop1_certificates(X1: Multivector, X2: Multivector, seed: int) -> tuple[Certificate, ...]:
    return (
        _certify("X1 != 0", X1, False, seed),
        _certify("X2 != 0", X2, False, seed),
        _certify("[X1,X2] - X1 == 0", lie_bracket(X1, X2) - X1, True, seed),
        _certify("X1^X2 == 0", wedge(X1, X2), True, seed),
    )


def _fire_or_reject(status, certs, witness, alpha=None) -> ObstructionVerdict:
    if all(c.proven for c in certs):
        return ObstructionVerdict(status, certs, witness, alpha)
    failed = [c.name for c in certs if not c.proven]
    note = "witness rejected: " + ", ".join(failed)
    return ObstructionVerdict(ObstructionStatus.INCONCLUSIVE, certs, witness, alpha, note)


def prop1_check(V: VGAlgebra, witness=None, seed: int = 0) -> ObstructionVerdict:
    """Look for nonzero ``X1, X2`` in ``V`` with ``[X1,X2] = X1`` and
    ``X1^X2 = 0``.

    Without a witness, ordered basis pairs ``(e_i, c e_j)`` are tried with
    ``c = +-p/q``, ``1 <= p, q <= 3``. A firing verdict needs every
    certificate proven; probable ones leave the verdict inconclusive.
    """
    _check_planar(V)
    if witness is not None:
        if isinstance(witness, (str, bytes)) or len(witness) != 2:
            raise WitnessError("a Prop-1 witness is a pair of coefficient vectors")
        w = (_coeff_vector(V, witness[0]), _coeff_vector(V, witness[1]))
        certs = _prop1_certificates(_combine(V, w[0]), _combine(V, w[1]), seed)
        return _fire_or_reject(ObstructionStatus.PROP1_FIRES, certs, w)
    for i, j in permutations(range(V.dim), 2):
        X1, Xj = V.basis[i], V.basis[j]
        if not wedge(X1, Xj).zero_verdict(seed).is_zero:
            continue
        B = lie_bracket(X1, Xj)
        if B.is_zero_object:
            continue
        coeffs, _ = express_in_span([X1], B, seed)
        if coeffs is None or coeffs[0] == 0 or 1 / coeffs[0] not in SEARCH_SCALES:
            continue
        w = [Fraction(0)] * V.dim, [Fraction(0)] * V.dim
        w[0][i] = Fraction(1)
        w[1][j] = 1 / coeffs[0]
        w = (tuple(w[0]), tuple(w[1]))
        certs = _prop1_certificates(X1, Xj.scale(w[1][j]), seed)
        verdict = _fire_or_reject(ObstructionStatus.PROP1_FIRES, certs, w)
        if verdict.fires:
            return verdict
    return ObstructionVerdict(ObstructionStatus.INCONCLUSIVE, note="bounded search found no pair")


def prop2_check(V: VGAlgebra, witness, alpha, seed: int = 0) -> ObstructionVerdict:
    """Check ``[Y1,Y2] = 0``, ``[Y1,Y3] = Y1``, ``[Y2,Y3] = alpha Y2`` and
    ``Y1^Y2 != 0`` for a triple in ``V``; ``alpha`` must avoid 0 and -1."""
    _check_planar(V)
    a = _to_fraction(alpha)
    if a in (0, -1):
        raise WitnessError(f"alpha = {_ftext(a)} is excluded (must avoid 0 and -1)")
    if witness is None or isinstance(witness, (str, bytes)) or len(witness) != 3:
        raise WitnessError("a Prop-2 witness is a triple of coefficient vectors")
    w = tuple(_coeff_vector(V, x) for x in witness)
    Y1, Y2, Y3 = (_combine(V, c) for c in w)
    certs = (
        _certify("[Y1,Y2] == 0", lie_bracket(Y1, Y2), True, seed),
        _certify("[Y1,Y3] - Y1 == 0", lie_bracket(Y1, Y3) - Y1, True, seed),
        _certify("[Y2,Y3] - alpha*Y2 == 0", lie_bracket(Y2, Y3) - Y2.scale(a), True, seed),
        _certify("Y1^Y2 != 0", wedge(Y1, Y2), False, seed),
    )
    return _fire_or_reject(ObstructionStatus.PROP2_FIRES, certs, w, a)


# -- registry -----------------------------------------------------------------


@dataclass(frozen=True)
class GKOEntry:
    id: str
    lie_algebra: str
    params: Mapping[str, Mapping]
    basis: tuple
    dimension: str
    table_column: str
    verdict: Mapping
    witness: Mapping | None = None
    reeb: str | None = None

    @property
    def has_r(self) -> bool:
        return "r" in self.params

    def expected_verdict(self, params: Mapping | None = None) -> str:
        """Stored verdict; conditional classes resolve against ``params``
        when given, otherwise render as ``PoissonConditional(...)``."""
        if params is None and self.verdict.get("cases"):
            cond = self.verdict["cases"][0]["when"]
            return "PoissonConditional(" + ", ".join(f"{k}={v}" for k, v in cond.items()) + ")"
        if params is None:
            return self.verdict["otherwise"]
        return self.resolve(params)[0]

    def resolve(self, params: Mapping) -> tuple[str, Mapping | None]:
        """Verdict and witness template for concrete ``params``."""
        for case in self.verdict.get("cases", ()):
            if all(params.get(k) == _to_fraction(v) for k, v in case["when"].items()):
                return case["verdict"], case.get("witness")
        kind = self.verdict["otherwise"]
        return kind, self.witness if kind == Verdict.NO.value else None


@lru_cache(maxsize=1)
def _raw_table() -> dict:
    return json.loads(resources.files("jlie.data").joinpath("gko_table.json").read_text())


def registry() -> dict[str, GKOEntry]:
    """The registry, with every stored witness re-verified on first use."""
    _validated()
    return _registry()


@lru_cache(maxsize=1)
def _registry() -> dict[str, GKOEntry]:
    out = {}
    for row in _raw_table()["classes"]:
        out[row["id"]] = GKOEntry(
            id=row["id"],
            lie_algebra=row["lie_algebra"],
            params=row.get("params", {}),
            basis=tuple(row["basis"]),
            dimension=row["dimension"],
            table_column=row["table_column"],
            verdict=row["verdict"],
            witness=row.get("witness"),
            reeb=row.get("reeb"),
        )
    return out


def class_ids() -> list[str]:
    return list(_registry())


def get_entry(class_id: str) -> GKOEntry:
    try:
        return _registry()[class_id]
    except KeyError:
        raise UnknownClassError(f"unknown class {class_id!r}") from None


def _x_only(text: str, what: str) -> Expr:
    try:
        f = parse_expr(str(text), PLANE)
    except ScalarError as exc:
        raise ParameterError(f"{what}: {exc}") from None
    if not is_zero(f.diff("y")).is_zero:
        raise ParameterError(f"{what} = {text} must depend on x only")
    return f


def normalize_params(entry: GKOEntry, params: Mapping | None) -> dict:
    """Fill defaults and enforce the admissible ranges of ``entry``."""
    params = dict(params or {})
    spec = entry.params
    extra = set(params) - set(spec) - {"bivector"}
    if extra:
        raise ParameterError(f"{entry.id} takes no parameter(s) {sorted(extra)}")
    out: dict[str, Any] = {}
    if "r" in spec:
        r = params.get("r", spec["r"].get("default", 1))
        if isinstance(r, str):
            r = r.strip()
            if not r.lstrip("-").isdigit():
                raise ParameterError(f"r must be an integer, got {r!r}")
        if isinstance(r, (bool, float)) or int(r) != r or int(r) < 1:
            raise ParameterError(f"r must be an integer >= 1, got {r!r}")
        out["r"] = int(r)
    if "alpha" in spec:
        try:
            a = _to_fraction(params.get("alpha", spec["alpha"]["default"]))
        except WitnessError as exc:
            raise ParameterError(f"alpha: {exc}") from None
        lo = spec["alpha"].get("min")
        if lo is not None and a < _to_fraction(lo):
            raise ParameterError(f"{entry.id} needs alpha >= {lo}")
        rng = spec["alpha"].get("abs_range")
        if rng is not None and not (_to_fraction(rng[0]) < abs(a) <= _to_fraction(rng[1])):
            raise ParameterError(f"{entry.id} needs {rng[0]} < |alpha| <= {rng[1]}")
        out["alpha"] = a
    for slot, default in (("xi", lambda i: f"x^{i}"), ("eta", lambda i: f"x^{i - 1}")):
        if slot not in spec:
            continue
        r = out["r"]
        given = params.get(slot)
        if given is None:
            funcs = [default(i) for i in range(1, r + 1)]
        else:
            funcs = [given] if isinstance(given, str) else list(given)
            if len(funcs) != r:
                raise ParameterError(f"{slot} needs {r} functions, got {len(funcs)}")
        exprs = [_x_only(f, f"{slot}_{i + 1}") for i, f in enumerate(funcs)]
        check = exprs if slot == "eta" else [PLANE.const(1)] + exprs
        keep, _ = independent_subset([Multivector.scalar(e) for e in check])
        if len(keep) != len(check):
            need = "linearly independent" if slot == "eta" else "independent together with 1"
            raise ParameterError(f"{slot} functions must be {need}")
        out[slot] = [str(e) for e in exprs]
    if "bivector" in params:
        out["bivector"] = _bivector(params["bivector"])
    return out


def _bivector(value) -> Multivector:
    if isinstance(value, Multivector):
        if value.degree != 2 or value.chart.coords != PLANE.coords:
            raise ParameterError("bivector must be a bivector on (x, y)")
        return Multivector(PLANE, 2, dict(value.components))
    try:
        coef = parse_expr(str(value), PLANE)
    except ScalarError as exc:
        raise ParameterError(f"bivector: {exc}") from None
    return Multivector(PLANE, 2, {(0, 1): coef})


def _fill(template: str, params: Mapping, i: int | None = None, slot_value: str | None = None) -> str:
    text = str(template)
    if "alpha" in params:
        text = text.replace("{alpha}", f"({_ftext(params['alpha'])})")
    if "r" in params:
        text = text.replace("{r}", str(params["r"]))
    if i is not None:
        text = text.replace("{i}", str(i))
        for slot in ("xi", "eta"):
            if f"{{{slot}}}" in text:
                text = text.replace(f"{{{slot}}}", f"({params[slot][i - 1]})")
    if "{" in text:
        raise GKOError(f"unfilled placeholder in {template!r}")
    return text


def _field(pair: Sequence[str]) -> Multivector:
    return Multivector.vector(PLANE, [parse_expr(c, PLANE) for c in pair])


def basis_fields(entry: GKOEntry, params: Mapping) -> list[Multivector]:
    fields = []
    for item in entry.basis:
        if isinstance(item, Mapping):
            lo, hi = (_int_expr(b, params) for b in item["repeat"])
            for i in range(lo, hi + 1):
                fields.append(_field([_fill(c, params, i) for c in item["field"]]))
        else:
            fields.append(_field([_fill(c, params) for c in item]))
    return fields


def _int_expr(text, params: Mapping) -> int:
    """Integer value of ``text`` such as ``"r+2"``."""
    text = str(text).replace("r", "{r}")
    return int(parse_expr(_fill(text, params), PLANE).simplify().value)


def documented_dimension(entry: GKOEntry, params: Mapping) -> int:
    return _int_expr(entry.dimension, params)


def instantiate_class(class_id: str, params: Mapping | None = None, seed: int = 0) -> VGAlgebra:
    """Basis of ``class_id`` on chart ``(x, y)``, closure verified."""
    entry = get_entry(class_id)
    p = normalize_params(entry, params)
    return _instantiate(entry, p, seed)


def _instantiate(entry: GKOEntry, p: Mapping, seed: int) -> VGAlgebra:
    fields = basis_fields(entry, p)
    dim = documented_dimension(entry, p)
    out = lie_closure(fields, max_dim=max(dim, len(fields)), seed=seed)
    if isinstance(out, ExceedsBound) or out.dim != dim or len(fields) != dim:
        got = "unbounded" if isinstance(out, ExceedsBound) else out.dim
        raise GKOError(f"{entry.id}: basis closes at dimension {got}, documented {dim}")
    return out


def _witness_args(template: Mapping, p: Mapping):
    fields = [{k: _fill(v, p) for k, v in f.items()} for f in template["fields"]]
    alpha = _to_fraction(_fill(template["alpha"], p)) if "alpha" in template else None
    return fields, alpha


def run_witness(V: VGAlgebra, template: Mapping, p: Mapping, seed: int = 0) -> ObstructionVerdict:
    fields, alpha = _witness_args(template, p)
    if template["prop"] == 1:
        return prop1_check(V, fields, seed)
    return prop2_check(V, fields, alpha, seed)


def validate_registry(seed: int = 0) -> dict[str, ObstructionVerdict]:
    """Re-verify every stored witness at default parameters."""
    out = {}
    for entry in _registry().values():
        p = normalize_params(entry, {})
        kind, template = entry.resolve(p)
        if kind == Verdict.NO.value:
            verdict = run_witness(_instantiate(entry, p, seed), template, p, seed)
            if not verdict.fires:
                raise GKOError(f"{entry.id}: stored witness does not fire ({verdict.note})")
            out[entry.id] = verdict
    return out


@lru_cache(maxsize=1)
def _validated() -> bool:
    validate_registry()
    return True


# -- table verification -------------------------------------------------------


@dataclass
class Check:
    name: str
    verdict: str
    certainty: str
    passed: bool
    certificates: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "certainty": self.certainty,
            "passed": self.passed,
            "certificates": self.certificates,
        }


def _hamiltonian_checks(J, V: VGAlgebra, max_degree: int, seed: int) -> list[Check]:
    checks = []
    try:
        hams = is_hamiltonian_algebra(J, V, max_degree)
    except NonPolynomialError as exc:
        return [Check("hamiltonian", f"inconclusive: {exc}", "n/a", False)]
    for n, (h, X) in enumerate(zip(hams, V.basis)):
        name = f"hamiltonian[X{n + 1}]"
        if h is None:
            checks.append(Check(name, f"no polynomial Hamiltonian of degree <= {max_degree} (inconclusive)", "n/a", False))
            continue
        cert = _certify(f"X_h - X{n + 1} == 0", hamiltonian_vf(J, h, seed).field - X, True, seed)
        checks.append(Check(name, f"h = {h}", cert.verdict.certainty, cert.proven, [cert.to_json()]))
    return checks


def _transverse_pair(V: VGAlgebra, seed: int) -> Check:
    """Two basis fields with ``X^Y != 0`` rule out the ``Lambda = 0`` case,
    where every Hamiltonian field is a multiple of ``R``."""
    for i in range(V.dim):
        for j in range(i + 1, V.dim):
            cert = _certify(f"X{i + 1}^X{j + 1} != 0", wedge(V.basis[i], V.basis[j]), False, seed)
            if cert.proven:
                return Check("lambda_zero_case", "excluded: V is not pointwise rank one", "proven", True, [cert.to_json()])
    return Check("lambda_zero_case", "not excluded", "n/a", False)


def _poisson_checks(bivector: Multivector, V: VGAlgebra, max_degree: int, seed: int) -> list[Check]:
    J = poisson_structure(bivector, seed)
    verdicts = [{"name": n, "verdict": str(v)} for n, v in zip(("[L,L]", "[R,L]"), J.verdicts)]
    checks = [Check("poisson_structure", "usable" if J.usable else "not a Poisson bivector", J.certainty, J.usable, verdicts)]
    if not J.usable:
        return checks
    if bivector.is_zero_object:
        return checks + [Check("nonzero_bivector", "bivector is zero", "proven", False)]
    return checks + _hamiltonian_checks(J, V, max_degree, seed)


def _overall_certainty(checks: Sequence[Check]) -> str:
    """Weakest level among the deciding checks; the informational
    ``reeb_zero_case`` row does not count."""
    levels = {c.certainty for c in checks if c.name != "reeb_zero_case"}
    for level in ("n/a", "asserted", "probable"):
        if level in levels:
            return level
    return "proven"


def _params_json(p: Mapping) -> dict:
    out = {}
    for k, v in p.items():
        if isinstance(v, Fraction):
            out[k] = _ftext(v)
        elif isinstance(v, Multivector):
            out[k] = str(v)
        else:
            out[k] = v
    return out


def verify_table(class_id: str, params: Mapping | None = None, max_degree: int | None = None, seed: int = 0) -> dict:
    """Cross-check the stored verdict of one class; returns a JSON report."""
    _validated()
    entry = get_entry(class_id)
    p = normalize_params(entry, params)
    kind, template = entry.resolve(p)
    if max_degree is None:
        max_degree = p.get("r", 1) + 2
    V = _instantiate(entry, p, seed)
    checks = [Check("closure", f"closed at dimension {V.dim}", "proven" if V.exact else "probable", True)]
    if kind == Verdict.REEB_ONLY.value:
        R = Multivector.basis(PLANE, entry.reeb)
        J = check_jacobi(Multivector.zero(PLANE, 2), R, seed)
        checks += _hamiltonian_checks(J, V, max_degree, seed)
        ok = all(c.passed for c in checks)
        conclusion = f"ReebOnly(d{entry.reeb}) " + ("verified" if ok else "not verified")
        if "bivector" in p:
            extra = _poisson_checks(p["bivector"], V, max_degree, seed)
            checks += extra
            good = all(c.passed for c in extra)
            ok &= good
            conclusion += "; Poisson " + ("verified" if good else "not verified") + " against supplied bivector"
    elif kind == Verdict.NO.value:
        verdict = run_witness(V, template, p, seed)
        certs = [c.to_json() for c in verdict.certificates]
        checks.append(Check(f"prop{template['prop']}_witness", verdict.status.value, verdict.certainty, verdict.fires, certs))
        checks.append(_transverse_pair(V, seed))
        checks.append(Check("reeb_zero_case", "excluded by the Poisson classification (asserted)", "asserted", True))
        ok = all(c.passed for c in checks)
        how = f"Prop-{template['prop']} witness"
        conclusion = f"No verified via {how}" if ok else f"No not verified ({how} did not fire)"
    elif kind == Verdict.NO_ASSERTED.value:
        checks.append(Check("asserted", "asserted by the classification, not machine-proved", "asserted", True))
        ok = True
        conclusion = "NoAsserted"
    elif "bivector" in p:
        checks += _poisson_checks(p["bivector"], V, max_degree, seed)
        ok = all(c.passed for c in checks)
        conclusion = "Poisson " + ("verified" if ok else "not verified") + " against supplied bivector"
    else:
        checks.append(Check("asserted", "Poisson status asserted (bivector not supplied)", "asserted", True))
        ok = True
        conclusion = "Poisson asserted"
    return {
        "id": entry.id,
        "certainty": _overall_certainty(checks),
        "lie_algebra": entry.lie_algebra,
        "params": _params_json(p),
        "dimension": V.dim,
        "table_column": entry.table_column,
        "expected_verdict": kind,
        "checks": [c.to_json() for c in checks],
        "conclusion": conclusion,
        "passed": ok,
    }


def verify_all(seed: int = 0) -> list[dict]:
    return [verify_table(cid, None, None, seed) for cid in class_ids()]
