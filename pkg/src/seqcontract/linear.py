"""Optimal linear contract via piecewise-linear reservation functions.

Under a linear contract the reservation value of each action is a convex
piecewise-linear function of the share alpha.  The agent's best response can
only change where two such functions cross, or where one crosses a payment
line alpha * r(j); sweeping those candidate alphas and evaluating exactly
yields the optimum.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .agent import NonAdaptiveStrategy, principal_utility
from .model import (
    INF,
    ExtendedRational,
    Instance,
    LinearContract,
    ONE,
    ZERO,
    induced_payments,
    is_finite,
)

__all__ = [
    "CandidateEvaluation",
    "CriticalValueReport",
    "PiecewiseLinearFn",
    "candidate_alphas",
    "reservation_pwl",
    "scan_linear",
    "solve_linear",
]


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """A continuous convex piecewise-linear function on [0, infinity).

    ``breakpoints[k]`` is where segment ``k`` starts (``breakpoints[0] == 0``);
    segment ``k`` is ``slope * alpha + intercept`` for the pair
    ``segments[k]``.  ``infinite`` marks the constant +inf function used for
    free actions.
    """

    breakpoints: tuple[Fraction, ...]
    segments: tuple[tuple[Fraction, Fraction], ...]
    infinite: bool = False

    def value_at(self, alpha: Fraction) -> ExtendedRational:
        if self.infinite:
            return INF
        if alpha < 0:
            raise ValueError("piecewise-linear reservation functions live on [0, inf)")
        k = bisect_right(self.breakpoints, alpha) - 1
        slope, intercept = self.segments[k]
        return slope * alpha + intercept


def reservation_pwl(inst: Instance, action: int) -> PiecewiseLinearFn:
    """The reservation value of one action as a function of alpha.

    Segment j covers shares where the agent, holding outcome j in hand, still
    prefers to act; its closed form follows from the fixed-point equation
    restricted to the suffix of outcomes paying more than r(j).  Breakpoints
    with an empty interval (tied rewards) are skipped; a non-positive
    denominator makes the segment stretch to infinity.
    """
    cost = inst.costs[action]
    if cost == 0:
        return PiecewiseLinearFn((), (), infinite=True)
    m = inst.m
    rewards = inst.rewards
    row = inst.probs[action]
    # Suffix sums over outcomes j..m-1.
    suffix_mass = [ZERO] * (m + 1)
    suffix_reward = [ZERO] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffix_mass[j] = suffix_mass[j + 1] + row[j]
        suffix_reward[j] = suffix_reward[j + 1] + row[j] * rewards[j]
    starts: list[ExtendedRational] = [ZERO]
    for j in range(m):
        denom = suffix_reward[j] - rewards[j] * suffix_mass[j]
        starts.append(cost / denom if denom > 0 else INF)
    breakpoints: list[Fraction] = []
    segments: list[tuple[Fraction, Fraction]] = []
    for j in range(m):
        lo, hi = starts[j], starts[j + 1]
        if not is_finite(lo) or lo == hi:
            continue
        mass = suffix_mass[j]
        segments.append((suffix_reward[j] / mass, -cost / mass))
        breakpoints.append(lo)  # type: ignore[arg-type]
    return PiecewiseLinearFn(tuple(breakpoints), tuple(segments))


def _spans(
    pwl: PiecewiseLinearFn,
) -> Iterable[tuple[Fraction, Optional[Fraction], Fraction, Fraction]]:
    """Segments as (start, end-or-None, slope, intercept); None means unbounded."""
    count = len(pwl.segments)
    for k in range(count):
        lo = pwl.breakpoints[k]
        hi = pwl.breakpoints[k + 1] if k + 1 < count else None
        slope, intercept = pwl.segments[k]
        yield lo, hi, slope, intercept


def _add_segment_intersections(
    spans_a,
    spans_b,
    found: set[Fraction],
) -> None:
    for lo1, hi1, s1, b1 in spans_a:
        for lo2, hi2, s2, b2 in spans_b:
            lo = max(lo1, lo2)
            if hi1 is None:
                hi = hi2
            elif hi2 is None:
                hi = hi1
            else:
                hi = min(hi1, hi2)
            if hi is not None and hi < lo:
                continue
            if s1 == s2:
                if b1 == b2:
                    # Coincident on the whole overlap: its endpoints are the
                    # only alphas where the crossing structure can move.
                    found.add(lo)
                    if hi is not None:
                        found.add(hi)
                continue
            alpha = (b2 - b1) / (s1 - s2)
            if alpha >= lo and (hi is None or alpha <= hi):
                found.add(alpha)


def candidate_alphas(inst: Instance) -> tuple[Fraction, ...]:
    """All alphas in [0, 1] at which the best response could change.

    Covers every crossing of two reservation functions and every crossing of a
    reservation function with a payment line alpha * r(j), plus the endpoints
    0 and 1.  Convexity caps the per-pair crossing counts, so the set has
    O(n^2 m) members.
    """
    found: set[Fraction] = {ZERO, ONE}
    pwls = [reservation_pwl(inst, i) for i in range(inst.n)]
    finite = [p for p in pwls if not p.infinite]
    spans = [list(_spans(p)) for p in finite]
    for a in range(len(finite)):
        for b in range(a + 1, len(finite)):
            _add_segment_intersections(spans[a], spans[b], found)
    reward_lines = [[(ZERO, None, r, ZERO)] for r in sorted(set(inst.rewards))]
    for a in range(len(finite)):
        for line in reward_lines:
            _add_segment_intersections(spans[a], line, found)
    return tuple(sorted(alpha for alpha in found if ZERO <= alpha <= ONE))


@dataclass(frozen=True)
class CandidateEvaluation:
    alpha: Fraction
    utility: Fraction
    strategy: NonAdaptiveStrategy


@dataclass(frozen=True)
class CriticalValueReport:
    """Every candidate alpha with its exact utility and best response."""

    evaluations: tuple[CandidateEvaluation, ...]

    def best(self) -> CandidateEvaluation:
        best = self.evaluations[0]
        for ev in self.evaluations[1:]:
            if ev.utility > best.utility:
                best = ev
        return best  # evaluations are sorted by alpha, so ties keep min alpha

    def best_response_change_count(self) -> int:
        changes = 0
        for prev, cur in zip(self.evaluations, self.evaluations[1:]):
            if prev.strategy != cur.strategy:
                changes += 1
        return changes


def scan_linear(inst: Instance) -> CriticalValueReport:
    evaluations = []
    for alpha in candidate_alphas(inst):
        contract = induced_payments(LinearContract(alpha), inst)
        utility, strategy = principal_utility(inst, contract)
        evaluations.append(CandidateEvaluation(alpha, utility, strategy))
    return CriticalValueReport(tuple(evaluations))


def solve_linear(inst: Instance) -> tuple[Fraction, Fraction, NonAdaptiveStrategy]:
    """The optimal linear contract: (alpha, utility, incentivized strategy).

    Among utility maximizers the smallest alpha wins.
    """
    best = scan_linear(inst).best()
    return best.alpha, best.utility, best.strategy
