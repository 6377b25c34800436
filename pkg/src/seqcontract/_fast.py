"""Shared-precompute evaluator for the principal-favored best response.

Semantically identical to ``agent.principal_utility`` but built for tight
loops (payment grids, arrangement vertices): instance data is scaled to
integers once, and agent indifferences are resolved by carrying first-order
perturbations toward the rewards.  A perturbed quantity is a pair
(value, drift): the exact value under the contract t and the derivative of
that value along t + eps * (r - t) at eps = 0.  Ordering pairs
lexicographically reproduces the strict orderings of the tilted contract for
every sufficiently small eps, which is exactly what the certified tilt
construction produces; the tests pin the two evaluators against each other.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from math import lcm
from typing import Optional

from .agent import NonAdaptiveStrategy
from .model import Contract, Instance

__all__ = ["FastEvaluator"]


class FastEvaluator:
    def __init__(self, inst: Instance) -> None:
        self.inst = inst
        self.n = inst.n
        self.m = inst.m
        self.prob_denom = lcm(*(p.denominator for row in inst.probs for p in row))
        self.rows = [[int(p * self.prob_denom) for p in row] for row in inst.probs]
        self.rew_denom = lcm(*(r.denominator for r in inst.rewards))
        self.rews = [int(r * self.rew_denom) for r in inst.rewards]
        self.cost_denom = lcm(*(c.denominator for c in inst.costs))
        self.costs = [int(c * self.cost_denom) for c in inst.costs]
        self.scale = [self.prob_denom ** (self.n - k) for k in range(self.n + 1)]

    def _reservation_triples(self, pay_a: list[int], pay_b: list[int], denom: int):
        """Per costly action the perturbed reservation value as an integer
        triple (value numerator, drift numerator, positive denominator);
        None for free actions (infinite)."""
        m = self.m
        cost_denom = self.cost_denom
        order = sorted(
            range(m), key=lambda j: (pay_a[j], pay_b[j]), reverse=True
        )
        triples: list[Optional[tuple[int, int, int]]] = []
        for i in range(self.n):
            cost = self.costs[i]
            if cost == 0:
                triples.append(None)
                continue
            row = self.rows[i]
            cost_term = cost * self.prob_denom * denom
            mass = 0
            acc_a = 0
            acc_b = 0
            idx = 0
            found = None
            while idx < m:
                j = order[idx]
                level_a, level_b = pay_a[j], pay_b[j]
                while idx < m:
                    j = order[idx]
                    if pay_a[j] != level_a or pay_b[j] != level_b:
                        break
                    mass += row[j]
                    acc_a += row[j] * pay_a[j]
                    acc_b += row[j] * pay_b[j]
                    idx += 1
                if mass == 0:
                    continue
                va = acc_a * cost_denom - cost_term
                vb = acc_b * cost_denom
                zden = mass * denom * cost_denom
                # level > z, and z >= next level, both in the perturbed order
                diff = level_a * zden - va * denom
                if diff < 0 or (diff == 0 and level_b * zden <= vb * denom):
                    continue
                if idx < m:
                    nj = order[idx]
                    diff = va * denom - pay_a[nj] * zden
                    if diff < 0 or (diff == 0 and vb * denom < pay_b[nj] * zden):
                        continue
                found = (va, vb, zden)
                break
            if found is None:
                raise AssertionError("no consistent reservation prefix")
            triples.append(found)
        return triples

    def best_response(self, contract: Contract) -> NonAdaptiveStrategy:
        m = self.m
        pay_denom = lcm(*(t.denominator for t in contract.payments))
        denom = lcm(pay_denom, self.rew_denom)
        pay_a = [int(t * denom) for t in contract.payments]
        rew_scale = denom // self.rew_denom
        pay_b = [self.rews[j] * rew_scale - pay_a[j] for j in range(m)]
        triples = self._reservation_triples(pay_a, pay_b, denom)

        def action_cmp(i: int, k: int) -> int:
            ti, tk = triples[i], triples[k]
            if ti is None or tk is None:
                if ti is None and tk is None:
                    return -1 if i < k else 1
                return -1 if ti is None else 1
            va_i, vb_i, d_i = ti
            va_k, vb_k, d_k = tk
            diff = va_k * d_i - va_i * d_k  # descending by value
            if diff:
                return -1 if diff < 0 else 1
            diff = vb_k * d_i - vb_i * d_k
            if diff:
                return -1 if diff < 0 else 1
            return -1 if i < k else 1

        sigma = tuple(sorted(range(self.n), key=cmp_to_key(action_cmp)))
        outcome_order = sorted(range(m), key=lambda j: (pay_a[j], pay_b[j], j))
        rho = [0] * m
        for rank, j in enumerate(outcome_order, start=1):
            rho[j] = rank
        tau: list[Optional[int]] = []
        for i in range(self.n):
            triple = triples[i]
            if triple is None:
                tau.append(None)
                continue
            va, vb, zden = triple
            pick = None
            pick_rank = None
            for j in range(m):
                diff = pay_a[j] * zden - va * denom
                if diff < 0 or (diff == 0 and pay_b[j] * zden <= vb * denom):
                    continue
                if pick_rank is None or rho[j] < pick_rank:
                    pick, pick_rank = j, rho[j]
            tau.append(pick)
        return NonAdaptiveStrategy(sigma, tuple(rho), tuple(tau))

    def utility_and_strategy(
        self, contract: Contract
    ) -> tuple[Fraction, NonAdaptiveStrategy]:
        """Principal utility under the principal-favored best response."""
        strategy = self.best_response(contract)
        m = self.m
        pay_denom = lcm(*(t.denominator for t in contract.payments))
        pays = [int(t * pay_denom) for t in contract.payments]
        rho = strategy.rho
        rews = self.rews
        current = [0] * m
        current[0] = 1
        pay_acc = 0
        rew_acc = 0
        for depth, a in enumerate(strategy.sigma):
            sc = self.scale[depth]
            threshold = strategy.tau[a]
            if threshold is not None:
                cut = rho[threshold]
                for j in range(m):
                    mu = current[j]
                    if mu and rho[j] >= cut:
                        pay_acc += mu * pays[j] * sc
                        rew_acc += mu * rews[j] * sc
                        current[j] = 0
            if not any(current):
                break
            row = self.rows[a]
            nxt = [0] * m
            for j in range(m):
                mu = current[j]
                if not mu:
                    continue
                rank_j = rho[j]
                for x in range(m):
                    w = row[x]
                    if not w:
                        continue
                    if rho[x] > rank_j:
                        nxt[x] += mu * w
                    else:
                        nxt[j] += mu * w
            current = nxt
        for j in range(m):
            mu = current[j]
            if mu:
                pay_acc += mu * pays[j]
                rew_acc += mu * rews[j]
        total = self.prob_denom ** self.n
        utility = Fraction(
            rew_acc * pay_denom - pay_acc * self.rew_denom,
            total * self.rew_denom * pay_denom,
        )
        return utility, strategy

    def utility(self, contract: Contract) -> Fraction:
        return self.utility_and_strategy(contract)[0]
