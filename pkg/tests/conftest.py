from fractions import Fraction as F

import pytest

from seqcontract import Contract, Instance


@pytest.fixture
def i1() -> Instance:
    """Two outcomes (rewards 0, 1), one action costing 1/10 with a fair coin."""
    return Instance((F(0), F(1)), (F(1, 10),), ((F(1, 2), F(1, 2)),))


@pytest.fixture
def i1_contract() -> Contract:
    return Contract((F(0), F(2, 5)))
