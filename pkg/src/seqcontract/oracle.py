"""Brute-force ground truth for small instances.

Enumerates every non-adaptive strategy tuple (sigma, rho, tau) exactly once
and evaluates it with exact arithmetic.  The search shares work across
strategies with a common prefix and runs on scaled integers, but the recurrence
it evaluates is the same one the generic strategy evaluator uses; a test pins
the two against each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial, lcm
from typing import Iterator, Optional

from .agent import NonAdaptiveStrategy
from .general import payment_bound
from .model import (
    CapacityError,
    Contract,
    Instance,
    ONE,
    ValidationError,
    ZERO,
    parse_rational,
)

__all__ = [
    "DEFAULT_ORACLE_BUDGET",
    "OracleReport",
    "enumerate_nonadaptive",
    "grid_search_general",
    "oracle_best_linear",
    "oracle_best_response",
    "strategy_count",
]

DEFAULT_ORACLE_BUDGET = 400_000
DEFAULT_MATERIALIZED = 20_000
DEFAULT_POINT_BUDGET = 1_000_000


def strategy_count(inst: Instance) -> int:
    return factorial(inst.n) * factorial(inst.m) * (inst.m + 1) ** inst.n


def _check_budget(inst: Instance, budget: int) -> None:
    count = strategy_count(inst)
    if count > budget:
        raise CapacityError(
            f"{count} non-adaptive strategies exceed the oracle budget {budget}"
        )


def enumerate_nonadaptive(
    inst: Instance, budget: int = DEFAULT_ORACLE_BUDGET
) -> Iterator[NonAdaptiveStrategy]:
    """Every well-formed (sigma, rho, tau) exactly once."""
    _check_budget(inst, budget)
    n, m = inst.n, inst.m
    thresholds = (None, *range(m))
    for sigma in permutations(range(n)):
        for rho in permutations(range(1, m + 1)):
            for tau in product(thresholds, repeat=n):
                yield NonAdaptiveStrategy(sigma, rho, tau)


@dataclass(frozen=True)
class OracleReport:
    """Exhaustive best-response summary for one contract."""

    best_agent_utility: Fraction
    principal_value: Fraction
    principal_strategy: NonAdaptiveStrategy
    maximizer_count: int
    maximizers: tuple[NonAdaptiveStrategy, ...]
    maximizers_truncated: bool


class _Scaled:
    """Instance data over common integer denominators."""

    def __init__(self, inst: Instance, contract: Optional[Contract]) -> None:
        self.n = inst.n
        self.m = inst.m
        self.prob_denom = lcm(*(p.denominator for row in inst.probs for p in row))
        self.rows = [
            [int(p * self.prob_denom) for p in row] for row in inst.probs
        ]
        self.rew_denom = lcm(*(r.denominator for r in inst.rewards))
        self.rews = [int(r * self.rew_denom) for r in inst.rewards]
        self.cost_denom = lcm(*(c.denominator for c in inst.costs))
        self.costs = [int(c * self.cost_denom) for c in inst.costs]
        if contract is not None:
            self.pay_denom = lcm(*(t.denominator for t in contract.payments))
            self.pays = [int(t * self.pay_denom) for t in contract.payments]
        else:
            self.pay_denom = 1
            self.pays = [0] * self.m
        self.scale = [self.prob_denom ** (self.n - k) for k in range(self.n + 1)]

    def transition_tables(self, rho: tuple[int, ...]) -> list[list[tuple[int, ...]]]:
        # trans[a][j][x]: scaled probability that the preferred outcome
        # becomes x when action a is taken while holding j.
        tables = []
        for a in range(self.n):
            row = self.rows[a]
            per_holding = []
            for j in range(self.m):
                out = [0] * self.m
                rank_j = rho[j]
                for x in range(self.m):
                    w = row[x]
                    if not w:
                        continue
                    if rho[x] > rank_j:
                        out[x] += w
                    else:
                        out[j] += w
                per_holding.append(tuple(out))
            tables.append(per_holding)
        return tables


def _search(
    ctx: _Scaled,
    rho: tuple[int, ...],
    rank_to_outcome: tuple[int, ...],
    on_value,
) -> None:
    """Shared-prefix walk over all (sigma, tau) for one rho.

    ``on_value(pay, rew, cost, sigma, tau_by_pos, remaining)`` fires once per
    completed tuple (remaining == ()) or once per collapsed subtree whose
    surviving probability mass is zero (every completion has the same value).
    """
    n, m = ctx.n, ctx.m
    trans = ctx.transition_tables(rho)
    pays, rews, costs = ctx.pays, ctx.rews, ctx.costs
    scale = ctx.scale
    sigma_stack: list[int] = []
    tau_stack: list[Optional[int]] = []

    def rec(v: list[int], depth: int, remaining: tuple[int, ...],
            pay: int, rew: int, cost: int) -> None:
        if not remaining:
            for j in range(m):
                mu = v[j]
                if mu:
                    pay += mu * pays[j]
                    rew += mu * rews[j]
            on_value(pay, rew, cost, tuple(sigma_stack), tuple(tau_stack), ())
            return
        sc = scale[depth]
        pay_all = 0
        rew_all = 0
        for j in range(m):
            mu = v[j]
            if mu:
                pay_all += mu * pays[j]
                rew_all += mu * rews[j]
        for a in remaining:
            rest = tuple(x for x in remaining if x != a)
            table = trans[a]
            sigma_stack.append(a)
            cont = [0] * m
            cont_mass = 0
            cont_pay = 0
            cont_rew = 0
            for b in range(m + 1):
                if b > 0:
                    j_star = rank_to_outcome[b - 1]
                    mu = v[j_star]
                    if mu:
                        cont_mass += mu
                        cont_pay += mu * pays[j_star]
                        cont_rew += mu * rews[j_star]
                        row = table[j_star]
                        for x in range(m):
                            w = row[x]
                            if w:
                                cont[x] += mu * w
                threshold = rank_to_outcome[b] if b < m else None
                tau_stack.append(threshold)
                new_pay = pay + (pay_all - cont_pay) * sc
                new_rew = rew + (rew_all - cont_rew) * sc
                if cont_mass:
                    rec(
                        cont.copy(),
                        depth + 1,
                        rest,
                        new_pay,
                        new_rew,
                        cost + cont_mass * costs[a] * sc,
                    )
                else:
                    on_value(
                        new_pay, new_rew, cost,
                        tuple(sigma_stack), tuple(tau_stack), rest,
                    )
                tau_stack.pop()
            sigma_stack.pop()

    start = [0] * m
    start[0] = 1
    rec(start, 0, tuple(range(n)), 0, 0, 0)


def _strategy_sort_key(strategy: NonAdaptiveStrategy, m: int):
    tau_encoded = tuple(m if th is None else th for th in strategy.tau)
    return (strategy.sigma, tau_encoded, strategy.rho)


def oracle_best_response(
    inst: Instance,
    contract: Contract,
    budget: int = DEFAULT_ORACLE_BUDGET,
    max_materialized: int = DEFAULT_MATERIALIZED,
) -> OracleReport:
    """Evaluate every strategy tuple; report the agent optimum, all its
    attainers, and the best principal utility among them."""
    _check_budget(inst, budget)
    ctx = _Scaled(inst, contract)
    n, m = ctx.n, ctx.m
    total_scale = ctx.prob_denom ** n
    agent_denom = total_scale * ctx.pay_denom * ctx.cost_denom
    principal_denom = total_scale * ctx.rew_denom * ctx.pay_denom

    best_agent: Optional[int] = None
    # Records: (uP scaled, sigma-so-far, tau-by-position, remaining, rho).
    records: list[tuple[int, tuple[int, ...], tuple[Optional[int], ...],
                        tuple[int, ...], tuple[int, ...]]] = []

    for rho in permutations(range(1, m + 1)):
        rank_to_outcome = tuple(sorted(range(m), key=lambda j: rho[j]))

        def on_value(pay, rew, cost, sigma, tau_by_pos, remaining, _rho=rho):
            nonlocal best_agent
            u_agent = pay * ctx.cost_denom - cost * ctx.pay_denom
            if best_agent is not None and u_agent < best_agent:
                return
            u_principal = rew * ctx.pay_denom - pay * ctx.rew_denom
            if best_agent is None or u_agent > best_agent:
                best_agent = u_agent
                records.clear()
            records.append((u_principal, sigma, tau_by_pos, remaining, _rho))

        _search(ctx, rho, rank_to_outcome, on_value)

    best_principal = max(rec[0] for rec in records)

    def completions(record) -> Iterator[NonAdaptiveStrategy]:
        _, sigma, tau_by_pos, remaining, rho = record
        if not remaining:
            tau_by_action: list[Optional[int]] = [None] * n
            for pos, action in enumerate(sigma):
                tau_by_action[action] = tau_by_pos[pos]
            yield NonAdaptiveStrategy(sigma, rho, tuple(tau_by_action))
            return
        thresholds = (None, *range(m))
        for perm in permutations(remaining):
            for extra in product(thresholds, repeat=len(remaining)):
                tau_by_action = [None] * n
                for pos, action in enumerate(sigma):
                    tau_by_action[action] = tau_by_pos[pos]
                for action, th in zip(perm, extra):
                    tau_by_action[action] = th
                yield NonAdaptiveStrategy(sigma + perm, rho, tuple(tau_by_action))

    def multiplicity(record) -> int:
        remaining = record[3]
        return factorial(len(remaining)) * (m + 1) ** len(remaining)

    count = sum(multiplicity(rec) for rec in records)
    materialized: list[NonAdaptiveStrategy] = []
    truncated = False
    for rec in records:
        for strategy in completions(rec):
            if len(materialized) >= max_materialized:
                truncated = True
                break
            materialized.append(strategy)
        if truncated:
            break

    favored: Optional[NonAdaptiveStrategy] = None
    favored_key = None
    for rec in records:
        if rec[0] != best_principal:
            continue
        _, sigma, tau_by_pos, remaining, rho = rec
        tau_by_action = [None] * n
        for pos, action in enumerate(sigma):
            tau_by_action[action] = tau_by_pos[pos]
        for action in remaining:
            tau_by_action[action] = 0  # the minimal completion under the tie order
        candidate = NonAdaptiveStrategy(
            sigma + tuple(sorted(remaining)), rho, tuple(tau_by_action)
        )
        key = _strategy_sort_key(candidate, m)
        if favored_key is None or key < favored_key:
            favored, favored_key = candidate, key

    return OracleReport(
        best_agent_utility=Fraction(best_agent, agent_denom),
        principal_value=Fraction(best_principal, principal_denom),
        principal_strategy=favored,
        maximizer_count=count,
        maximizers=tuple(materialized),
        maximizers_truncated=truncated,
    )


def _upper_envelope(lines: list[tuple[Fraction, Fraction]]):
    """Upper envelope of lines alpha -> R * alpha - c given as (R, c) pairs.

    Returns (hull, breakpoints): hull lines in increasing slope order and the
    alpha where each consecutive pair swaps.
    """
    best_c: dict[Fraction, Fraction] = {}
    for slope, offset in lines:
        held = best_c.get(slope)
        if held is None or offset < held:
            best_c[slope] = offset
    hull: list[tuple[Fraction, Fraction]] = []
    for slope in sorted(best_c):
        offset = best_c[slope]
        while hull:
            s1, c1 = hull[-1]
            x_new = (offset - c1) / (slope - s1)
            if len(hull) >= 2:
                s0, c0 = hull[-2]
                x_prev = (c1 - c0) / (s1 - s0)
                if x_new <= x_prev:
                    hull.pop()
                    continue
            break
        hull.append((slope, offset))
    breakpoints = [
        (c2 - c1) / (s2 - s1)
        for (s1, c1), (s2, c2) in zip(hull, hull[1:])
    ]
    return hull, breakpoints


def oracle_best_linear(
    inst: Instance, budget: int = DEFAULT_ORACLE_BUDGET
) -> tuple[Fraction, Fraction]:
    """Exhaustive optimal linear contract: (alpha, principal utility).

    Every strategy tuple induces a line alpha -> alpha * R - c in the agent's
    utility; the candidate alphas are exactly the breakpoints of the upper
    envelope of those lines (the agent's indifference ratios between
    reward-distinct profiles), plus the endpoints.
    """
    _check_budget(inst, budget)
    ctx = _Scaled(inst, None)
    m = ctx.m
    profiles: set[tuple[int, int]] = set()
    for rho in permutations(range(1, m + 1)):
        rank_to_outcome = tuple(sorted(range(m), key=lambda j: rho[j]))

        def on_value(pay, rew, cost, sigma, tau_by_pos, remaining):
            profiles.add((rew, cost))

        _search(ctx, rho, rank_to_outcome, on_value)
    reward_denom = ctx.prob_denom ** ctx.n * ctx.rew_denom
    cost_denom = ctx.prob_denom ** ctx.n * ctx.cost_denom
    lines = [
        (Fraction(rew, reward_denom), Fraction(cost, cost_denom))
        for rew, cost in profiles
    ]
    hull, breakpoints = _upper_envelope(lines)
    candidates = {ZERO, ONE}
    candidates.update(b for b in breakpoints if ZERO <= b <= ONE)
    best: Optional[tuple[Fraction, Fraction]] = None
    for alpha in sorted(candidates):
        idx = 0
        while idx < len(breakpoints) and breakpoints[idx] <= alpha:
            idx += 1
        reward = hull[idx][0]
        utility = (1 - alpha) * reward
        if best is None or utility > best[1]:
            best = (alpha, utility)
    return best


def grid_search_general(
    inst: Instance,
    step: Optional[Fraction] = None,
    point_budget: int = DEFAULT_POINT_BUDGET,
) -> tuple[Contract, Fraction]:
    """Best contract over the payment grid {0, step, 2 step, ..., L}^m.

    A lower-bound witness for the vertex solver; exact but exponential in m,
    so the point budget keeps it to small outcome counts.
    """
    from ._fast import FastEvaluator

    bound = payment_bound(inst)
    if bound == 0:
        values = [ZERO]
    else:
        if step is None:
            step = bound / 50
        step = parse_rational(step)
        if step <= 0:
            raise ValidationError("grid step must be positive")
        values = []
        k = 0
        while k * step < bound:
            values.append(k * step)
            k += 1
        values.append(bound)
    total = len(values) ** inst.m
    if total > point_budget:
        raise CapacityError(
            f"{total} grid points exceed the budget {point_budget}"
        )
    evaluator = FastEvaluator(inst)
    best_point: Optional[tuple[Fraction, ...]] = None
    best_utility: Optional[Fraction] = None
    for point in product(values, repeat=inst.m):
        utility = evaluator.utility(Contract(point))
        if (
            best_utility is None
            or utility > best_utility
            or (utility == best_utility and point < best_point)
        ):
            best_point = point
            best_utility = utility
    return Contract(best_point), best_utility
