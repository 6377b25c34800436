"""Constructors for the named hard-instance families, used as fixtures and
acceptance drivers."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import Contract, Instance, ONE, ValidationError, ZERO, parse_rational

__all__ = [
    "PartitionParams",
    "SuperpolyFamily",
    "equal_spread_contract",
    "equal_spread_utility",
    "equal_spread_utility_derivative",
    "gap_general_contract",
    "gen_critpoints_instance",
    "gen_gap_instance",
    "gen_partition_reduction",
    "gen_random_contract",
    "gen_random_instance",
    "gen_superpoly_instance",
    "partition_params",
]

QUADRATIC_TOLERANCE = Fraction(1, 10**18)


@dataclass(frozen=True)
class PartitionParams:
    """Calibration constants of the subset-sum reduction instance.

    ``q`` is the positive root of
    q^2 (eps - 10) + q (-2 - 0.8 eps) + 0.9 - 0.99 eps = 0
    (irrational; stored as a rational approximation whose residual certifies
    it), and ``c = eps * q / 10`` prices the only costly action.
    """

    a: tuple[Fraction, ...]
    epsilon: Fraction
    q: Fraction
    c: Fraction
    residual: Fraction

    @property
    def k(self) -> int:
        return len(self.a)


def _partition_quadratic(epsilon: Fraction, q: Fraction) -> Fraction:
    return (
        q * q * (epsilon - 10)
        + q * (-2 - Fraction(4, 5) * epsilon)
        + Fraction(9, 10)
        - Fraction(99, 100) * epsilon
    )


def partition_params(a: Sequence[Fraction]) -> PartitionParams:
    a = tuple(parse_rational(x) for x in a)
    if not a:
        raise ValidationError("the multiset must be non-empty")
    for x in a:
        if not (0 < x < 1):
            raise ValidationError("multiset entries must lie strictly in (0, 1)")
    if sum(a) != Fraction(1, 5):
        raise ValidationError("multiset entries must sum to exactly 1/5")
    epsilon = min(a) / 100
    # Bisect for the positive root; the quadratic is positive at 0 and
    # negative at 4/5, and its slope there keeps the bracket simple.
    lo, hi = ZERO, Fraction(4, 5)
    q = (lo + hi) / 2
    residual = _partition_quadratic(epsilon, q)
    while abs(residual) > QUADRATIC_TOLERANCE:
        if residual > 0:
            lo = q
        else:
            hi = q
        q = (lo + hi) / 2
        residual = _partition_quadratic(epsilon, q)
    return PartitionParams(a, epsilon, q, epsilon * q / 10, residual)


def gen_partition_reduction(
    a: Sequence[Fraction], params: Optional[PartitionParams] = None
) -> tuple[Instance, PartitionParams]:
    """The 3-action, (k+2)-outcome instance whose optimal contract encodes a
    subset-sum query over ``a``.

    Outcome 0 is the zero outcome, outcomes 1..k mirror the multiset entries
    (reward 0), and outcome k+1 carries reward 1.
    """
    if params is None:
        params = partition_params(a)
    k = params.k
    a_row = params.a
    eps, q, c = params.epsilon, params.q, params.c
    rewards = tuple([ZERO] * (k + 1) + [ONE])
    costs = (ZERO, ZERO, c)
    row1 = tuple([eps] + [ZERO] * k + [1 - eps])
    row2 = tuple([Fraction(4, 5)] + list(a_row) + [ZERO])
    row3 = tuple([Fraction(4, 5) - q] + list(a_row) + [q])
    return Instance(rewards, costs, (row1, row2, row3)), params


def equal_spread_contract(params: PartitionParams, subset: Iterable[int]) -> Contract:
    """Pays c / (q + sum_{i in subset} a_i) on the chosen middle outcomes and
    on the top outcome, zero elsewhere."""
    chosen = sorted(set(subset))
    for i in chosen:
        if not (0 <= i < params.k):
            raise ValidationError("subset indices must point into the multiset")
    x = ZERO
    for i in chosen:
        x += params.a[i]
    level = params.c / (params.q + x)
    payments = [ZERO] * (params.k + 2)
    for i in chosen:
        payments[i + 1] = level
    payments[-1] = level
    return Contract(tuple(payments))


def equal_spread_utility(params: PartitionParams, x: Fraction) -> Fraction:
    """Closed-form principal utility of the equal-spread contract whose chosen
    middle outcomes have total mass x."""
    x = parse_rational(x)
    eps, q, c = params.epsilon, params.q, params.c
    return (
        1
        - eps
        + eps * (1 - x) * q
        - (1 - eps * (1 - x) * (1 - x - q)) * c / (x + q)
    )


def equal_spread_utility_derivative(params: PartitionParams, x: Fraction) -> Fraction:
    """d/dx of the closed-form utility; used for sign checks around x = 1/10."""
    x = parse_rational(x)
    eps, q, c = params.epsilon, params.q, params.c
    g = eps * (1 - x) * (1 - x - q)
    g_prime = eps * (2 * x + q - 2)
    return -eps * q + c * ((1 - g) + g_prime * (x + q)) / ((x + q) ** 2)


def gen_gap_instance(n: int) -> Instance:
    """The 3-outcome family separating general from linear contracts.

    Action i costs (2^i - i) / 2^(n+1) and succeeds (reward 1) with
    probability 2^(i-n-1), split between a high-payment-friendly outcome and a
    cheap one.
    """
    if n < 1:
        raise ValidationError("n must be at least 1")
    scale = 2 ** (n + 1)
    rewards = (ZERO, ONE, ONE)
    costs = []
    rows = []
    for i in range(1, n + 1):
        cost = Fraction(2**i - i, scale)
        succ = Fraction(2**i, scale)  # == 2^(i-n-1)
        costs.append(cost)
        rows.append((1 - succ, cost, succ - cost))
    return Instance(rewards, tuple(costs), tuple(rows))


def gap_general_contract(n: int, eps: Fraction) -> Contract:
    """The companion general contract: full payment on outcome 2, a sliver on
    outcome 3."""
    eps = parse_rational(eps)
    if not (0 < eps < 1):
        raise ValidationError("eps must lie strictly between 0 and 1")
    return Contract((ZERO, ONE, eps))


def gen_critpoints_instance(m: int) -> Instance:
    """Two uniform actions over m graded rewards; the costly one crosses a
    payment line once per outcome, forcing about m best-response switches."""
    if m < 2:
        raise ValidationError("m must be at least 2")
    rewards = tuple(Fraction(j) for j in range(m))
    uniform = tuple(Fraction(1, m) for _ in range(m))
    return Instance(rewards, (ZERO, Fraction(1, 2 * m)), (uniform, uniform))


@dataclass(frozen=True)
class SuperpolyFamily:
    """An instance whose monotone contracts induce super-polynomially many
    best responses, together with the two witness contract families.

    Real actions are labeled (j, i): outcome j in 2..m, copy i in 1..ell; the
    action succeeds into outcome j with probability 1/2 and costs i * r(j).
    Padding actions (when m-1 does not divide n) are never worth taking.
    """

    instance: Instance
    ell: int
    labels: tuple[Optional[tuple[int, int]], ...]

    def profile_contract(self, v: Sequence[int]) -> Contract:
        """t_v pays (2 + 1/(2 ell)) r(j) v[j-2] on outcome j; the copies of
        outcome j worth taking are exactly 1..v[j-2]."""
        m = self.instance.m
        if len(v) != m - 1:
            raise ValidationError("the profile must pick one level per nonzero outcome")
        for level in v:
            if not (1 <= level <= self.ell):
                raise ValidationError("profile levels must lie in 1..ell")
        factor = 2 + Fraction(1, 2 * self.ell)
        payments = [ZERO]
        for j in range(2, m + 1):
            payments.append(factor * self.instance.rewards[j - 1] * v[j - 2])
        return Contract(tuple(payments))

    def order_contract(self, order: Sequence[int]) -> Contract:
        """t_order pays position(j) + 2 r(j) on outcome j, where ``order``
        lists the 1-based nonzero outcomes in their intended rank order."""
        m = self.instance.m
        if sorted(order) != list(range(2, m + 1)):
            raise ValidationError("order must permute the nonzero outcomes 2..m")
        position = {j: pos + 1 for pos, j in enumerate(order)}
        payments = [ZERO]
        for j in range(2, m + 1):
            payments.append(position[j] + 2 * self.instance.rewards[j - 1])
        return Contract(tuple(payments))


def gen_superpoly_instance(n: int, m: int) -> SuperpolyFamily:
    if m < 2:
        raise ValidationError("m must be at least 2")
    if n < m - 1:
        raise ValidationError("n must be at least m - 1")
    ell = n // (m - 1)
    # rewards: (0, ell^2, ..., ell^m)
    rewards = (ZERO,) + tuple(Fraction(ell**j) for j in range(2, m + 1))
    costs: list[Fraction] = []
    rows: list[tuple[Fraction, ...]] = []
    labels: list[Optional[tuple[int, int]]] = []
    half = Fraction(1, 2)
    for j in range(2, m + 1):
        for i in range(1, ell + 1):
            costs.append(i * rewards[j - 1])
            row = [ZERO] * m
            row[0] = half
            row[j - 1] = half
            rows.append(tuple(row))
            labels.append((j, i))
    for _ in range(n - ell * (m - 1)):
        # Padding: full mass on the zero outcome at positive cost, so the
        # reservation value is negative under every contract.
        costs.append(ONE)
        row = [ZERO] * m
        row[0] = ONE
        rows.append(tuple(row))
        labels.append(None)
    return SuperpolyFamily(
        Instance(rewards, tuple(costs), tuple(rows)), ell, tuple(labels)
    )


def gen_random_instance(n: int, m: int, seed: int) -> Instance:
    """Deterministic fixture source: grid probabilities (twelfths), graded
    rewards (halves), and grid costs (eighths), all exact."""
    if n < 1 or m < 1:
        raise ValidationError("n and m must be at least 1")
    rng = random.Random(("instance", seed, n, m).__repr__())
    rewards = [ZERO]
    for _ in range(m - 1):
        rewards.append(rewards[-1] + Fraction(rng.randint(0, 4), 2))
    rows = []
    for _ in range(n):
        units = [0] * m
        for _ in range(12):
            units[rng.randrange(m)] += 1
        rows.append(tuple(Fraction(u, 12) for u in units))
    costs = tuple(Fraction(rng.randint(0, 8), 8) for _ in range(n))
    return Instance(tuple(rewards), costs, tuple(rows))


def gen_random_contract(inst: Instance, seed: int) -> Contract:
    """Deterministic grid contract scaled to the instance's reward range."""
    rng = random.Random(("contract", seed, inst.n, inst.m).__repr__())
    top = inst.rewards[-1]
    scale = top if top > 0 else ONE
    return Contract(
        tuple(Fraction(rng.randint(0, 10), 8) * scale for _ in range(inst.m))
    )
