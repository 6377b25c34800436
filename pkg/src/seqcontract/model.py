"""Exact-rational domain model for sequential-action contract problems.

Every numeric quantity (cost, reward, probability, payment, share) is a
``fractions.Fraction``.  All computations in this package are exact; floats
never enter the pipeline except for optional display formatting in the CLI.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "CapacityError",
    "Contract",
    "ExtendedRational",
    "INF",
    "Instance",
    "LinearContract",
    "ValidationError",
    "contract_from_doc",
    "contract_to_doc",
    "format_rational",
    "induced_payments",
    "instance_digest",
    "instance_from_doc",
    "instance_to_doc",
    "is_finite",
    "parse_rational",
    "validate_instance",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class ValidationError(ValueError):
    """A document or value violates the model invariants."""


class CapacityError(RuntimeError):
    """An enumeration would exceed its configured budget."""


class _PositiveInfinity:
    """Order-only positive infinity.

    Compares strictly greater than every Fraction/int; arithmetic is
    deliberately unsupported so an infinite reservation value can never leak
    into an exact computation unnoticed.
    """

    __slots__ = ()

    def __repr__(self) -> str:
        return "INF"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _PositiveInfinity)

    def __hash__(self) -> int:
        return hash("seqcontract.INF")

    def __lt__(self, other: object):
        if isinstance(other, (_PositiveInfinity, Fraction, int)):
            return False
        return NotImplemented

    def __le__(self, other: object):
        if isinstance(other, _PositiveInfinity):
            return True
        if isinstance(other, (Fraction, int)):
            return False
        return NotImplemented

    def __gt__(self, other: object):
        if isinstance(other, _PositiveInfinity):
            return False
        if isinstance(other, (Fraction, int)):
            return True
        return NotImplemented

    def __ge__(self, other: object):
        if isinstance(other, (_PositiveInfinity, Fraction, int)):
            return True
        return NotImplemented


INF = _PositiveInfinity()

ExtendedRational = Union[Fraction, _PositiveInfinity]


def is_finite(value: ExtendedRational) -> bool:
    return not isinstance(value, _PositiveInfinity)


_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


def parse_rational(value: object) -> Fraction:
    """Parse a rational from a JSON scalar: an integer or a ``"num/den"`` string.

    Floats are rejected; ingestion is exact by construction.
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_RE.match(text):
            raise ValidationError(f"not a rational: {value!r}")
        return Fraction(text)
    raise ValidationError(f"not a rational: {value!r} (floats are not accepted)")


def format_rational(value: ExtendedRational) -> str:
    """Canonical string form: ``"3"``, ``"-1/10"``, or ``"inf"``."""
    if not is_finite(value):
        return "inf"
    return str(value)


def _as_fraction_tuple(values: Iterable[object]) -> tuple[Fraction, ...]:
    return tuple(parse_rational(v) for v in values)


@dataclass(frozen=True)
class Instance:
    """A sequential-action problem: rewards per outcome, costs and outcome
    distributions per action.

    Invariants: rewards are sorted non-decreasing with the zero outcome first
    (``rewards[0] == 0``), every probability row sums to exactly 1, and all
    entries are non-negative.
    """

    rewards: tuple[Fraction, ...]
    costs: tuple[Fraction, ...]
    probs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rewards = _as_fraction_tuple(self.rewards)
        costs = _as_fraction_tuple(self.costs)
        probs = tuple(_as_fraction_tuple(row) for row in self.probs)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "probs", probs)
        if not costs:
            raise ValidationError("instance must have at least one action (n = 0)")
        if not rewards:
            raise ValidationError("instance must have at least one outcome (m = 0)")
        if len(probs) != len(costs):
            raise ValidationError("probability matrix must have one row per action")
        m = len(rewards)
        for j, r in enumerate(rewards):
            if r < 0:
                raise ValidationError(f"negative reward at outcome {j + 1}")
        if rewards[0] != 0:
            raise ValidationError("minimum reward must be 0")
        for j in range(1, m):
            if rewards[j] < rewards[j - 1]:
                raise ValidationError("rewards must be sorted non-decreasing")
        for i, c in enumerate(costs):
            if c < 0:
                raise ValidationError(f"negative cost at action {i + 1}")
        for i, row in enumerate(probs):
            if len(row) != m:
                raise ValidationError(f"probability row {i + 1} has wrong length")
            total = ZERO
            for j, p in enumerate(row):
                if p < 0:
                    raise ValidationError(
                        f"negative probability at action {i + 1}, outcome {j + 1}"
                    )
                total += p
            if total != 1:
                raise ValidationError(
                    f"row sum != 1 for action {i + 1} (got {format_rational(total)})"
                )

    @property
    def n(self) -> int:
        return len(self.costs)

    @property
    def m(self) -> int:
        return len(self.rewards)


@dataclass(frozen=True)
class Contract:
    """A payment per outcome, all non-negative."""

    payments: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        payments = _as_fraction_tuple(self.payments)
        object.__setattr__(self, "payments", payments)
        for j, t in enumerate(payments):
            if t < 0:
                raise ValidationError(f"negative payment at outcome {j + 1}")

    @property
    def m(self) -> int:
        return len(self.payments)


@dataclass(frozen=True)
class LinearContract:
    """The scalar contract paying a fixed share alpha of the reward."""

    alpha: Fraction

    def __post_init__(self) -> None:
        alpha = parse_rational(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if not (0 <= alpha <= 1):
            raise ValidationError("alpha must lie in [0, 1]")


def induced_payments(lin: LinearContract, inst: Instance) -> Contract:
    """Payments of the linear contract: alpha times each reward, exactly."""
    return Contract(tuple(lin.alpha * r for r in inst.rewards))


def validate_instance(doc: Mapping[str, object]) -> tuple[Instance, tuple[int, ...]]:
    """Check a raw instance document and normalize outcome order.

    Outcomes are relabeled into non-decreasing reward order (probability
    columns permuted accordingly).  Returns the normalized instance together
    with the applied permutation: entry ``k`` is the original 0-based outcome
    index now living at position ``k``.
    """
    if not isinstance(doc, Mapping):
        raise ValidationError("instance document must be a JSON object")
    for key in ("rewards", "costs", "probs"):
        if key not in doc:
            raise ValidationError(f"instance document is missing {key!r}")
    rewards = [parse_rational(v) for v in _as_sequence(doc["rewards"], "rewards")]
    costs = [parse_rational(v) for v in _as_sequence(doc["costs"], "costs")]
    raw_probs = _as_sequence(doc["probs"], "probs")
    probs = [
        [parse_rational(v) for v in _as_sequence(row, "probability row")]
        for row in raw_probs
    ]
    if not costs:
        raise ValidationError("instance must have at least one action (n = 0)")
    if not rewards:
        raise ValidationError("instance must have at least one outcome (m = 0)")
    m = len(rewards)
    if any(r < 0 for r in rewards):
        raise ValidationError("negative reward")
    if min(rewards) != 0:
        raise ValidationError("minimum reward must be 0")
    order = tuple(sorted(range(m), key=lambda j: (rewards[j], j)))
    sorted_rewards = tuple(rewards[j] for j in order)
    sorted_probs = tuple(tuple(row[j] for j in order) for row in probs)
    instance = Instance(sorted_rewards, tuple(costs), sorted_probs)
    return instance, order


def _as_sequence(value: object, what: str) -> Sequence[object]:
    if isinstance(value, (str, bytes)) or not isinstance(value, Sequence):
        raise ValidationError(f"{what} must be an array")
    return value


def instance_to_doc(inst: Instance) -> dict[str, object]:
    return {
        "rewards": [format_rational(r) for r in inst.rewards],
        "costs": [format_rational(c) for c in inst.costs],
        "probs": [[format_rational(p) for p in row] for row in inst.probs],
    }


def instance_from_doc(doc: Mapping[str, object]) -> Instance:
    """Parse an already-normalized instance document (no reordering)."""
    instance, order = validate_instance(doc)
    if order != tuple(range(instance.m)):
        raise ValidationError("instance document is not in normalized outcome order")
    return instance


def contract_to_doc(contract: Contract) -> dict[str, object]:
    return {"payments": [format_rational(t) for t in contract.payments]}


def contract_from_doc(doc: Mapping[str, object]) -> Contract:
    if not isinstance(doc, Mapping) or "payments" not in doc:
        raise ValidationError("contract document must be an object with 'payments'")
    return Contract(
        tuple(parse_rational(v) for v in _as_sequence(doc["payments"], "payments"))
    )


def instance_digest(inst: Instance) -> str:
    """Stable hex digest of the normalized instance, for report provenance."""
    blob = json.dumps(instance_to_doc(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
