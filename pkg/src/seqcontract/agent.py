"""Agent best response in the independent-action model.

The agent faces an optimal-search problem: each action is a costly box whose
prize is the payment for its realized outcome.  Best responses are governed by
reservation values; ties are broken in the principal's favor by evaluating the
agent under a slightly reward-tilted contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .model import (
    INF,
    Contract,
    ExtendedRational,
    Instance,
    ValidationError,
    ZERO,
    is_finite,
)

__all__ = [
    "NonAdaptiveStrategy",
    "OutcomeDistribution",
    "StrategyEvaluation",
    "agent_utility",
    "best_response",
    "evaluate_strategy",
    "outcome_distribution",
    "principal_utility",
    "principal_utility_for",
    "reservation_value",
    "reservation_values",
    "strategy_from_doc",
    "strategy_to_doc",
    "tiebreak_contract",
    "tiebreak_epsilon",
    "validate_strategy",
    "weitzman_strategy",
]


@dataclass(frozen=True)
class NonAdaptiveStrategy:
    """A fixed action order, outcome preference, and halting thresholds.

    * ``sigma``: the action-taking order (0-based action indices).
    * ``rho``: ``rho[j]`` is the preference rank of outcome ``j`` (1..m,
      higher rank preferred).  Upon halting the agent keeps the revealed
      outcome of highest rank; the zero outcome is always revealed.
    * ``tau``: per action, an outcome index or ``None``.  Before taking
      action ``i`` the agent halts iff the currently preferred revealed
      outcome ``j`` satisfies ``rho[j] >= rho[tau[i]]``; ``None`` means the
      agent never halts ahead of action ``i``.
    """

    sigma: tuple[int, ...]
    rho: tuple[int, ...]
    tau: tuple[Optional[int], ...]


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact distribution of the final outcome under a strategy."""

    mass: tuple[Fraction, ...]


@dataclass(frozen=True)
class StrategyEvaluation:
    distribution: OutcomeDistribution
    take_probability: tuple[Fraction, ...]
    agent_utility: Fraction
    principal_utility: Fraction


def validate_strategy(inst: Instance, strategy: NonAdaptiveStrategy) -> None:
    n, m = inst.n, inst.m
    if sorted(strategy.sigma) != list(range(n)):
        raise ValidationError("sigma must be a permutation of the actions")
    if sorted(strategy.rho) != list(range(1, m + 1)):
        raise ValidationError("rho must assign each outcome a distinct rank 1..m")
    if len(strategy.tau) != n:
        raise ValidationError("tau must assign one threshold per action")
    for th in strategy.tau:
        if th is not None and not (0 <= th < m):
            raise ValidationError("tau entries must be outcome indices or null")


def reservation_value(
    inst: Instance, contract: Contract, action: int
) -> ExtendedRational:
    """The indifference value z solving E[(t(X_i) - z)^+] = c_i, exactly.

    Free actions (zero cost) get an infinite reservation value.  The value may
    be negative; callers read z < 0 as "never worth taking".
    """
    cost = inst.costs[action]
    if cost == 0:
        return INF
    pay = contract.payments
    row = inst.probs[action]
    m = inst.m
    order = sorted(range(m), key=lambda j: pay[j], reverse=True)
    mass = ZERO
    weighted = ZERO
    idx = 0
    while idx < m:
        level = pay[order[idx]]
        while idx < m and pay[order[idx]] == level:
            j = order[idx]
            mass += row[j]
            weighted += row[j] * pay[j]
            idx += 1
        if mass == 0:
            continue
        z = (weighted - cost) / mass
        if level > z and (idx == m or z >= pay[order[idx]]):
            return z
    raise AssertionError("reservation-value scan found no consistent prefix")


def reservation_values(inst: Instance, contract: Contract) -> tuple[ExtendedRational, ...]:
    return tuple(reservation_value(inst, contract, i) for i in range(inst.n))


def _preference_ranks(payments: tuple[Fraction, ...]) -> tuple[int, ...]:
    # Rank outcomes by payment ascending, ties by index: a consistent total
    # order whose top element always maximizes the payment.
    order = sorted(range(len(payments)), key=lambda j: (payments[j], j))
    rho = [0] * len(payments)
    for rank, j in enumerate(order, start=1):
        rho[j] = rank
    return tuple(rho)


def _weitzman_from(
    inst: Instance,
    payments: tuple[Fraction, ...],
    zs: tuple[ExtendedRational, ...],
) -> NonAdaptiveStrategy:
    n, m = inst.n, inst.m

    def sigma_key(i: int):
        z = zs[i]
        if not is_finite(z):
            return (0, ZERO, i)
        return (1, -z, i)

    sigma = tuple(sorted(range(n), key=sigma_key))
    rho = _preference_ranks(payments)
    tau: list[Optional[int]] = []
    for i in range(n):
        z = zs[i]
        if not is_finite(z):
            tau.append(None)
            continue
        halt = [j for j in range(m) if payments[j] > z]
        if halt:
            tau.append(min(halt, key=lambda j: rho[j]))
        else:
            tau.append(None)
    return NonAdaptiveStrategy(sigma, rho, tuple(tau))


def weitzman_strategy(inst: Instance, contract: Contract) -> NonAdaptiveStrategy:
    """An agent-optimal non-adaptive strategy for the given contract.

    Actions are ordered by non-increasing reservation value, outcomes are
    preferred by payment, and the halting threshold of each action is the
    least-preferred outcome whose payment strictly exceeds its reservation
    value.  On the boundary t(j) = z_i the strategy continues; definitive
    tie-breaking happens by evaluating under the tilted contract instead.
    """
    return _weitzman_from(inst, contract.payments, reservation_values(inst, contract))


def outcome_distribution(
    inst: Instance, strategy: NonAdaptiveStrategy
) -> tuple[OutcomeDistribution, tuple[Fraction, ...]]:
    """Final-outcome distribution plus per-action take probabilities.

    Walks the action order while maintaining the distribution of the currently
    preferred revealed outcome; runs in O(n * m^2) exact operations.
    """
    n, m = inst.n, inst.m
    rho = strategy.rho
    current = [ZERO] * m
    current[0] = Fraction(1)
    final = [ZERO] * m
    taken = [ZERO] * n
    for a in strategy.sigma:
        threshold = strategy.tau[a]
        if threshold is not None:
            cut = rho[threshold]
            for j in range(m):
                mass = current[j]
                if mass and rho[j] >= cut:
                    final[j] += mass
                    current[j] = ZERO
        remaining = ZERO
        for mass in current:
            remaining += mass
        if remaining == 0:
            break
        taken[a] = remaining
        row = inst.probs[a]
        nxt = [ZERO] * m
        for j in range(m):
            mass = current[j]
            if not mass:
                continue
            rank_j = rho[j]
            for x in range(m):
                p = row[x]
                if not p:
                    continue
                if rho[x] > rank_j:
                    nxt[x] += mass * p
                else:
                    nxt[j] += mass * p
        current = nxt
    for j in range(m):
        if current[j]:
            final[j] += current[j]
    return OutcomeDistribution(tuple(final)), tuple(taken)


def evaluate_strategy(
    inst: Instance, contract: Contract, strategy: NonAdaptiveStrategy
) -> StrategyEvaluation:
    dist, taken = outcome_distribution(inst, strategy)
    pay = contract.payments
    u_agent = ZERO
    u_principal = ZERO
    for j, mass in enumerate(dist.mass):
        if mass:
            u_agent += mass * pay[j]
            u_principal += mass * (inst.rewards[j] - pay[j])
    for i, p in enumerate(taken):
        if p:
            u_agent -= p * inst.costs[i]
    return StrategyEvaluation(dist, taken, u_agent, u_principal)


def agent_utility(
    inst: Instance, contract: Contract, strategy: NonAdaptiveStrategy
) -> Fraction:
    """Expected payment minus expected total cost."""
    return evaluate_strategy(inst, contract, strategy).agent_utility


def principal_utility_for(
    inst: Instance, contract: Contract, strategy: NonAdaptiveStrategy
) -> Fraction:
    """Expected reward minus expected payment under a fixed strategy."""
    return evaluate_strategy(inst, contract, strategy).principal_utility


def tiebreak_epsilon(inst: Instance, contract: Contract) -> Fraction:
    """A certified tilt size for the reward-tilted contract.

    Let delta be one third of the minimum positive gap among all pairwise
    differences of {finite reservation values} union {payments}.  Tilting by
    eps = delta / (1 + max_j |r(j) - t(j)|) moves every payment, and hence
    every reservation value, by strictly less than delta, so every strict
    comparison the agent's optimality conditions rest on survives the tilt.
    """
    pay = contract.payments
    zs = reservation_values(inst, contract)
    values = sorted({z for z in zs if is_finite(z)} | set(pay))
    min_gap: Optional[Fraction] = None
    for lo, hi in zip(values, values[1:]):
        gap = hi - lo
        if min_gap is None or gap < min_gap:
            min_gap = gap
    if min_gap is None:
        # Fully degenerate: every comparison is a tie, any valid tilt works.
        return Fraction(1, 2)
    delta = min_gap / 3
    spread = max(abs(r - t) for r, t in zip(inst.rewards, pay))
    eps = delta / (1 + spread)
    # Cap keeps the tilted payments a strict convex combination of t and r.
    return min(eps, Fraction(1, 2))


def tiebreak_contract(inst: Instance, contract: Contract) -> Contract:
    """The contract t + eps * (r - t) for a certified small eps.

    Under it the agent's indifferences resolve toward outcomes and actions the
    principal prefers, while every strict preference under t is preserved.
    """
    eps = tiebreak_epsilon(inst, contract)
    pay = contract.payments
    return Contract(
        tuple(t + eps * (r - t) for r, t in zip(inst.rewards, pay))
    )


def _all_comparisons_strict(
    inst: Instance, contract: Contract, zs: tuple[ExtendedRational, ...]
) -> bool:
    finite = [z for z in zs if is_finite(z)]
    if len(set(finite)) != len(finite):
        return False
    pay = contract.payments
    if len(set(pay)) != len(pay):
        return False
    return not (set(finite) & set(pay))


def best_response(inst: Instance, contract: Contract) -> NonAdaptiveStrategy:
    """The agent's best response with ties broken in the principal's favor."""
    zs = reservation_values(inst, contract)
    if _all_comparisons_strict(inst, contract, zs):
        # No ties anywhere: the tilted contract would order everything the
        # same way, so skip computing it.
        return _weitzman_from(inst, contract.payments, zs)
    tilted = tiebreak_contract(inst, contract)
    return weitzman_strategy(inst, tilted)


def principal_utility(
    inst: Instance, contract: Contract
) -> tuple[Fraction, NonAdaptiveStrategy]:
    """Principal's utility under the agent's principal-favored best response."""
    strategy = best_response(inst, contract)
    return evaluate_strategy(inst, contract, strategy).principal_utility, strategy


def strategy_to_doc(strategy: NonAdaptiveStrategy) -> dict[str, object]:
    """JSON form with 1-based action/outcome indices; the never-halt
    threshold is encoded as null."""
    return {
        "sigma": [i + 1 for i in strategy.sigma],
        "rho": list(strategy.rho),
        "tau": [None if th is None else th + 1 for th in strategy.tau],
    }


def strategy_from_doc(doc: Mapping[str, object]) -> NonAdaptiveStrategy:
    for key in ("sigma", "rho", "tau"):
        if key not in doc:
            raise ValidationError(f"strategy document is missing {key!r}")
    sigma = tuple(int(v) - 1 for v in doc["sigma"])  # type: ignore[union-attr]
    rho = tuple(int(v) for v in doc["rho"])  # type: ignore[union-attr]
    tau = tuple(
        None if v is None else int(v) - 1 for v in doc["tau"]  # type: ignore[union-attr]
    )
    return NonAdaptiveStrategy(sigma, rho, tau)
