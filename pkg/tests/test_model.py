import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from seqcontract import (
    Contract,
    INF,
    Instance,
    LinearContract,
    ValidationError,
    contract_from_doc,
    contract_to_doc,
    format_rational,
    induced_payments,
    instance_digest,
    instance_from_doc,
    instance_to_doc,
    parse_rational,
    validate_instance,
)

rationals = st.fractions(max_denominator=50)


def test_parse_rational_forms():
    assert parse_rational(3) == F(3)
    assert parse_rational("1/10") == F(1, 10)
    assert parse_rational("-7/2") == F(-7, 2)
    assert parse_rational("4") == F(4)


@pytest.mark.parametrize("bad", [0.5, "0.5", "1/0", "a/b", None, True, "1 / 2"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ValidationError):
        parse_rational(bad)


def test_format_round_trips():
    for q in (F(0), F(3), F(-1, 10), F(7, 3)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(INF) == "inf"


def test_inf_ordering():
    assert INF > F(10**9)
    assert not (INF < F(0))
    assert F(1, 2) < INF
    assert INF >= INF and INF <= INF and INF == INF
    assert sorted([INF, F(2), F(-1)]) == [F(-1), F(2), INF]


def test_inf_arithmetic_is_blocked():
    with pytest.raises(TypeError):
        INF + F(1)  # type: ignore[operator]


def test_validate_accepts_i1():
    doc = {"rewards": ["0", "1"], "costs": ["1/10"], "probs": [["1/2", "1/2"]]}
    inst, order = validate_instance(doc)
    assert inst.rewards == (F(0), F(1))
    assert inst.costs == (F(1, 10),)
    assert inst.probs == ((F(1, 2), F(1, 2)),)
    assert order == (0, 1)


def test_validate_relabels_outcomes():
    doc = {"rewards": ["1", "0"], "costs": ["1/10"], "probs": [["1/2", "1/2"]]}
    inst, order = validate_instance(doc)
    assert inst.rewards == (F(0), F(1))
    assert order == (1, 0)
    assert inst.probs == ((F(1, 2), F(1, 2)),)


def test_validate_rejects_bad_row_sum():
    doc = {"rewards": ["0", "1"], "costs": ["1/10"], "probs": [["1/2", "1/3"]]}
    with pytest.raises(ValidationError, match="row sum"):
        validate_instance(doc)


@pytest.mark.parametrize(
    "doc",
    [
        {"rewards": [], "costs": ["1"], "probs": []},
        {"rewards": ["0"], "costs": [], "probs": []},
        {"rewards": ["0", "1"], "costs": ["-1"], "probs": [["1/2", "1/2"]]},
        {"rewards": ["0", "-1"], "costs": ["1"], "probs": [["1/2", "1/2"]]},
        {"rewards": ["0", "1"], "costs": ["1"], "probs": [["3/4", "-1/4"]]},
        {"rewards": ["1", "2"], "costs": ["1"], "probs": [["1/2", "1/2"]]},
    ],
)
def test_validate_rejects(doc):
    with pytest.raises(ValidationError):
        validate_instance(doc)


def test_induced_payments(i1):
    assert induced_payments(LinearContract(F(0)), i1).payments == (F(0), F(0))
    assert induced_payments(LinearContract(F(1)), i1).payments == (F(0), F(1))
    assert induced_payments(LinearContract(F(1, 5)), i1).payments == (F(0), F(1, 5))


def test_linear_contract_bounds():
    with pytest.raises(ValidationError):
        LinearContract(F(3, 2))
    with pytest.raises(ValidationError):
        LinearContract(F(-1, 2))


def test_contract_rejects_negative():
    with pytest.raises(ValidationError):
        Contract((F(-1, 2),))


def test_instance_round_trip(i1):
    doc = instance_to_doc(i1)
    again = instance_from_doc(json.loads(json.dumps(doc)))
    assert again == i1
    assert instance_digest(again) == instance_digest(i1)


def test_validation_idempotent(i1):
    once, _ = validate_instance(instance_to_doc(i1))
    twice, _ = validate_instance(instance_to_doc(once))
    assert once == twice == i1


def test_contract_round_trip():
    c = Contract((F(0), F(7, 3), F(2)))
    assert contract_from_doc(contract_to_doc(c)) == c


@given(a=rationals, b=rationals)
def test_rational_arithmetic_exact(a, b):
    assert (a + b) - b == a
    assert (a * b) == (b * a)


def test_degenerate_single_outcome_instance():
    inst = Instance((F(0),), (F(1, 2),), ((F(1),),))
    assert inst.n == 1 and inst.m == 1
