import itertools
from fractions import Fraction

import pytest

from jlie.gko import (
    PLANE,
    SCOPE,
    GKOError,
    ObstructionStatus,
    ParameterError,
    UnknownClassError,
    WitnessError,
    class_ids,
    documented_dimension,
    get_entry,
    instantiate_class,
    normalize_params,
    prop1_check,
    prop2_check,
    registry,
    validate_registry,
    verify_all,
    verify_table,
)
from jlie.liesys import lie_closure
from jlie.multivec import Multivector
from jlie.scalar import ZeroStatus, parse_expr

NO_PROP2 = {"P4", "P6", "P7", "P8", "I19"}
NO_PROP1 = {"I6", "I7", "I9", "I10", "I11", "I15", "I18", "I20"}
REEB_ONLY = {"I1": "x", "I2": "x", "I3": "x", "I12": "y", "I13": "y"}


def vf(*comps):
    return Multivector.vector(PLANE, [parse_expr(c, PLANE) for c in comps])


def sample_params(cid):
    entry = get_entry(cid)
    alphas = [Fraction(1, 2), Fraction(1)] if "alpha" in entry.params else [None]
    rs = [1, 2, 3] if entry.has_r else [None]
    for a, r in itertools.product(alphas, rs):
        p = {}
        if a is not None:
            p["alpha"] = a
        if r is not None:
            p["r"] = r
        yield p


# -- registry ------------------------------------------------------------------


def test_registry_has_all_28_classes():
    ids = class_ids()
    assert len(ids) == 28
    assert ids[:8] == [f"P{i}" for i in range(1, 9)]
    assert ids[8:] == [f"I{i}" for i in range(1, 21)]
    assert set(registry()) == set(ids)


def test_verdict_column_partition():
    verdicts = {cid: get_entry(cid).verdict["otherwise"] for cid in class_ids()}
    no = {c for c, v in verdicts.items() if v == "No"}
    assert no == NO_PROP1 | NO_PROP2 | {"I8", "I16"}
    assert {c for c, v in verdicts.items() if v == "ReebOnly"} == set(REEB_ONLY)
    assert {c for c, v in verdicts.items() if v == "NoAsserted"} == {"P1", "I17"}
    for cid in NO_PROP1:
        assert get_entry(cid).witness["prop"] == 1
    for cid in NO_PROP2 | {"I8", "I16"}:
        assert get_entry(cid).witness["prop"] == 2


def test_conditional_verdicts():
    assert get_entry("P1").expected_verdict() == "PoissonConditional(alpha=0)"
    assert get_entry("P1").expected_verdict(normalize_params(get_entry("P1"), {"alpha": 0})) == "Poisson"
    assert get_entry("P1").expected_verdict(normalize_params(get_entry("P1"), {"alpha": 2})) == "NoAsserted"
    assert get_entry("I8").expected_verdict(normalize_params(get_entry("I8"), {"alpha": -1})) == "Poisson"
    assert get_entry("I8").expected_verdict(normalize_params(get_entry("I8"), {"alpha": "1/2"})) == "No"


def test_stored_witnesses_fire():
    # I8 and I16 default to their Poisson value alpha = -1
    verdicts = validate_registry()
    assert set(verdicts) == NO_PROP1 | NO_PROP2
    for v in verdicts.values():
        assert v.fires
        assert all(c.verdict.proven for c in v.certificates)


# -- instantiate ---------------------------------------------------------------


def test_instantiate_examples():
    V = instantiate_class("P2")
    assert V.dim == 3
    assert list(V.basis) == [vf("1", "0"), vf("x", "y"), vf("x^2 - y^2", "2*x*y")]
    assert list(instantiate_class("I1").basis) == [vf("1", "0")]
    V = instantiate_class("I16", {"alpha": -1, "r": 1})
    assert list(V.basis) == [vf("1", "0"), vf("0", "1"), vf("x", "-y"), vf("0", "x")]


@pytest.mark.parametrize("cid", [f"P{i}" for i in range(1, 9)] + [f"I{i}" for i in range(1, 21)])
def test_every_class_closes_at_documented_dimension(cid):
    entry = get_entry(cid)
    for p in sample_params(cid):
        V = instantiate_class(cid, p)
        assert V.dim == documented_dimension(entry, normalize_params(entry, p))
        again = lie_closure(list(V.basis), max_dim=V.dim)
        assert again.dim == V.dim


def test_function_slots_override():
    V = instantiate_class("I14", {"r": 2, "eta": ["1", "exp(x)"]})
    assert V.dim == 3 and not V.exact
    with pytest.raises(ParameterError):
        instantiate_class("I14", {"r": 2, "eta": ["x", "2*x"]})
    with pytest.raises(ParameterError):
        instantiate_class("I14", {"r": 2, "eta": ["y", "1"]})
    with pytest.raises(ParameterError):
        instantiate_class("I14", {"r": 2, "eta": ["1"]})


def test_parameter_errors():
    with pytest.raises(UnknownClassError):
        instantiate_class("I99")
    with pytest.raises(ParameterError):
        instantiate_class("I8", {"alpha": 2})
    with pytest.raises(ParameterError):
        instantiate_class("I8", {"alpha": 0})
    with pytest.raises(ParameterError):
        instantiate_class("P1", {"alpha": -1})
    with pytest.raises(ParameterError):
        instantiate_class("I12", {"r": 0})
    with pytest.raises(ParameterError):
        instantiate_class("P2", {"alpha": 1})
    assert issubclass(UnknownClassError, GKOError)


# -- detectors -----------------------------------------------------------------


def test_prop1_fires_on_i9_witness():
    V = instantiate_class("I9")
    i_dx = list(V.basis).index(vf("1", "0"))
    i_xdx = list(V.basis).index(vf("x", "0"))
    w = ({i_dx: 1}, {i_xdx: 1})
    v = prop1_check(V, w)
    assert v.status is ObstructionStatus.PROP1_FIRES and v.fires
    assert all(c.verdict.status in (ZeroStatus.PROVEN_ZERO, ZeroStatus.PROVEN_NONZERO) for c in v.certificates)
    assert v.to_json()["scope"] == SCOPE


def test_prop1_search_finds_i9_pair():
    v = prop1_check(instantiate_class("I9"))
    assert v.fires


def test_prop1_search_inconclusive_on_p2():
    v = prop1_check(instantiate_class("P2"))
    assert v.status is ObstructionStatus.INCONCLUSIVE
    assert "bounded search" in v.note


def test_prop1_rejects_transverse_witness():
    V = instantiate_class("P4")
    v = prop1_check(V, ([1, 0, 0, 0], [0, 0, 1, 0]))
    assert V.basis[2] == vf("x", "y")
    assert v.status is ObstructionStatus.INCONCLUSIVE
    assert "X1^X2 == 0" in v.note


def test_prop1_rejects_zero_field():
    V = instantiate_class("I9")
    v = prop1_check(V, ([0] * V.dim, [1] + [0] * (V.dim - 1)))
    assert not v.fires


def test_prop2_fires_on_p4():
    V = instantiate_class("P4")
    v = prop2_check(V, ({0: 1}, {1: 1}, {2: 1}), 1)
    assert v.status is ObstructionStatus.PROP2_FIRES
    assert all(c.proven for c in v.certificates)


def test_prop2_excluded_alpha():
    V = instantiate_class("I8", {"alpha": "1/2"})
    for a in (-1, 0):
        with pytest.raises(WitnessError):
            prop2_check(V, ({0: 1}, {1: 1}, {2: 1}), a)


def test_prop2_i19_r2():
    V = instantiate_class("I19", {"r": 2})
    Y3 = vf("x", "y")
    coeffs = None
    for k, X in enumerate(V.basis):
        if X == vf("2*x", "2*y"):
            coeffs = {k: "1/2"}
        elif X == Y3:
            coeffs = {k: 1}
    assert coeffs is not None
    v = prop2_check(V, ({0: 1}, {1: 1}, coeffs), 1)
    assert v.fires


def test_prop2_wrong_alpha_inconclusive():
    V = instantiate_class("P4")
    v = prop2_check(V, ({0: 1}, {1: 1}, {2: 1}), 2)
    assert v.status is ObstructionStatus.INCONCLUSIVE


def test_malformed_witnesses():
    V = instantiate_class("P4")
    with pytest.raises(WitnessError):
        prop1_check(V, ([1, 0],))
    with pytest.raises(WitnessError):
        prop1_check(V, ([1, 0], [0, 1]))
    with pytest.raises(WitnessError):
        prop1_check(V, ({9: 1}, {0: 1}))
    with pytest.raises(WitnessError):
        prop1_check(V, ({0: 0.5}, {1: 1}))
    with pytest.raises(WitnessError):
        prop2_check(V, ({0: 1}, {1: 1}), 1)


def test_detectors_need_plane():
    from conftest import XYZ

    V = lie_closure([Multivector.basis(XYZ, "x")])
    with pytest.raises(GKOError):
        prop1_check(V)


# -- verify_table --------------------------------------------------------------


def test_verify_i1():
    rep = verify_table("I1")
    assert rep["passed"] and rep["expected_verdict"] == "ReebOnly"
    assert rep["conclusion"] == "ReebOnly(dx) verified"
    ham = [c for c in rep["checks"] if c["name"].startswith("hamiltonian")]
    assert ham and all(c["passed"] for c in ham)
    assert rep["certainty"] == "proven"


def test_verify_i9():
    rep = verify_table("I9")
    assert rep["passed"] and rep["conclusion"] == "No verified via Prop-1 witness"
    w = next(c for c in rep["checks"] if c["name"] == "prop1_witness")
    assert w["verdict"] == "Prop1Fires" and w["certainty"] == "proven"


def test_verify_i17():
    rep = verify_table("I17")
    assert rep["passed"] and rep["expected_verdict"] == "NoAsserted"
    assert rep["certainty"] == "asserted"
    assert "not machine-proved" in rep["checks"][-1]["verdict"]


def test_verify_poisson_asserted_and_supplied():
    rep = verify_table("P2")
    assert rep["passed"] and rep["certainty"] == "asserted"
    rep = verify_table("I12", {"r": 2, "bivector": "1"})
    assert rep["passed"]
    assert "Poisson verified" in rep["conclusion"]


@pytest.mark.parametrize("cid", sorted(REEB_ONLY))
@pytest.mark.parametrize("r", [1, 2, 3])
def test_reeb_only_classes_verified(cid, r):
    params = {"r": r} if get_entry(cid).has_r else {}
    rep = verify_table(cid, params)
    assert rep["passed"] and rep["certainty"] == "proven"
    assert rep["conclusion"] == f"ReebOnly(d{REEB_ONLY[cid]}) verified"


@pytest.mark.parametrize("cid", sorted(NO_PROP1 | NO_PROP2))
def test_no_classes_fire_with_proven_certificates(cid):
    for p in sample_params(cid):
        rep = verify_table(cid, p)
        assert rep["passed"], rep["conclusion"]
        w = next(c for c in rep["checks"] if c["name"].endswith("_witness"))
        assert w["verdict"] in ("Prop1Fires", "Prop2Fires")
        assert all(cert["certainty"] == "proven" for cert in w["certificates"])


def test_parametric_no_classes():
    assert verify_table("I8", {"alpha": "1/2"})["conclusion"] == "No verified via Prop-2 witness"
    assert verify_table("I16", {"alpha": 0})["conclusion"] == "No verified via Prop-1 witness"
    assert verify_table("I16", {"alpha": 1, "r": 2})["passed"]
    assert verify_table("I16", {})["expected_verdict"] == "Poisson"


def test_verify_all_passes():
    reports = verify_all()
    assert [r["id"] for r in reports] == class_ids()
    assert all(r["passed"] for r in reports)
    by_kind = {}
    for r in reports:
        by_kind.setdefault(r["expected_verdict"], []).append(r["id"])
    assert len(by_kind["ReebOnly"]) == 5
    assert len(by_kind["No"]) == 13
    assert sorted(by_kind["NoAsserted"]) == ["I17", "P1"]


def test_verify_table_errors():
    with pytest.raises(UnknownClassError):
        verify_table("X1")
    with pytest.raises(ParameterError):
        verify_table("I8", {"alpha": 5})
