"""Correlated binary-outcome model: coverage functions and tuple strategies.

With two outcomes (fail/succeed) and correlated actions, everything the
contract problem needs is the success probability of each action subset.
That set function is exactly a weighted coverage function, which also encodes
correlated Bernoulli trials and, more generally, expected maxima of correlated
non-negative variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    CapacityError,
    ONE,
    ValidationError,
    ZERO,
    format_rational,
    parse_rational,
)

__all__ = [
    "BernoulliJoint",
    "CorrelatedInstance",
    "CoverageFunction",
    "TupleStrategy",
    "ValueJoint",
    "bernoulli_to_coverage",
    "brute_force_best_linear",
    "coverage_eval",
    "coverage_from_doc",
    "coverage_to_bernoulli",
    "coverage_to_corrmax",
    "coverage_to_doc",
    "corrmax_to_coverage",
    "correlated_instance_from_doc",
    "correlated_instance_to_doc",
    "enumerate_tuple_strategies",
    "hardness_reduction",
    "sequence_cost",
    "sequence_utilities",
]

DEFAULT_ACTION_BOUND = 7

TupleStrategy = tuple[int, ...]
"""An ordered sequence of distinct action indices; the agent opens them in
order and halts at the first success.  Valid representations never append an
action once success is already certain."""


@dataclass(frozen=True)
class CoverageFunction:
    """f(S) = total weight of universe elements covered by some action in S."""

    universe: tuple[str, ...]
    weights: tuple[Fraction, ...]
    actions: tuple[str, ...]
    cover: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        weights = tuple(parse_rational(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(weights) != len(self.universe):
            raise ValidationError("one weight per universe element required")
        if len(set(self.universe)) != len(self.universe):
            raise ValidationError("universe element ids must be distinct")
        if len(set(self.actions)) != len(self.actions):
            raise ValidationError("action names must be distinct")
        if len(self.cover) != len(self.actions):
            raise ValidationError("one covered subset per action required")
        for w in weights:
            if w < 0:
                raise ValidationError("universe weights must be non-negative")
        size = len(self.universe)
        for covered in self.cover:
            for u in covered:
                if not (0 <= u < size):
                    raise ValidationError("covered element out of range")

    @property
    def n(self) -> int:
        return len(self.actions)


def coverage_eval(f: CoverageFunction, subset: Iterable[int]) -> Fraction:
    """Exact weighted coverage of an action subset."""
    covered: set[int] = set()
    for i in subset:
        covered |= f.cover[i]
    total = ZERO
    for u in covered:
        total += f.weights[u]
    return total


@dataclass(frozen=True)
class BernoulliJoint:
    """A joint distribution of correlated 0/1 variables, one per action.

    Support points carry positive probability; mass not listed sits on the
    all-zero vector.
    """

    actions: tuple[str, ...]
    support: tuple[tuple[int, ...], ...]
    pdf: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        pdf = tuple(parse_rational(p) for p in self.pdf)
        object.__setattr__(self, "pdf", pdf)
        if len(self.support) != len(pdf):
            raise ValidationError("one probability per support point required")
        if len(set(self.support)) != len(self.support):
            raise ValidationError("support points must be distinct")
        total = ZERO
        for p in pdf:
            if p < 0:
                raise ValidationError("probabilities must be non-negative")
            total += p
        if total > 1:
            raise ValidationError("support probabilities exceed 1")
        width = len(self.actions)
        for vector in self.support:
            if len(vector) != width:
                raise ValidationError("support vector has wrong length")
            if any(v not in (0, 1) for v in vector):
                raise ValidationError("support vectors must be 0/1")

    def success_probability(self, subset: Iterable[int]) -> Fraction:
        idx = set(subset)
        total = ZERO
        for vector, p in zip(self.support, self.pdf):
            if any(vector[i] for i in idx):
                total += p
        return total


@dataclass(frozen=True)
class ValueJoint:
    """A joint distribution of correlated non-negative variables."""

    actions: tuple[str, ...]
    support: tuple[tuple[Fraction, ...], ...]
    pdf: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        support = tuple(
            tuple(parse_rational(v) for v in vector) for vector in self.support
        )
        pdf = tuple(parse_rational(p) for p in self.pdf)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "pdf", pdf)
        if len(support) != len(pdf):
            raise ValidationError("one probability per support point required")
        if len(set(support)) != len(support):
            raise ValidationError("support points must be distinct")
        total = ZERO
        for p in pdf:
            if p < 0:
                raise ValidationError("probabilities must be non-negative")
            total += p
        if total != 1:
            raise ValidationError("value-joint probabilities must sum to 1")
        width = len(self.actions)
        for vector in support:
            if len(vector) != width:
                raise ValidationError("support vector has wrong length")
            if any(v < 0 for v in vector):
                raise ValidationError("values must be non-negative")

    def expected_max(self, subset: Iterable[int]) -> Fraction:
        idx = list(set(subset))
        total = ZERO
        for vector, p in zip(self.support, self.pdf):
            if idx:
                total += p * max(vector[i] for i in idx)
        return total


def bernoulli_to_coverage(joint: BernoulliJoint) -> CoverageFunction:
    """One universe element per support point, weighted by its probability;
    an action covers the points where its variable fires.  |U| <= |support|.
    """
    ids = tuple(f"v{k}" for k in range(len(joint.support)))
    cover = tuple(
        frozenset(k for k, vector in enumerate(joint.support) if vector[i])
        for i in range(len(joint.actions))
    )
    return CoverageFunction(ids, joint.pdf, joint.actions, cover)


def coverage_to_bernoulli(f: CoverageFunction) -> BernoulliJoint:
    """One support point per covered universe element; mass left over goes to
    the all-zero vector.  |support| <= |U| + 1.

    Elements covered by no action are pruned first; the remaining weight must
    fit in a probability.
    """
    n = f.n
    merged: dict[tuple[int, ...], Fraction] = {}
    covered_weight = ZERO
    for u, weight in enumerate(f.weights):
        vector = tuple(1 if u in f.cover[i] else 0 for i in range(n))
        if weight == 0 or not any(vector):
            continue
        covered_weight += weight
        merged[vector] = merged.get(vector, ZERO) + weight
    if covered_weight > 1:
        raise ValidationError("covered weight exceeds 1; not a correlated-OR")
    residual = 1 - covered_weight
    if residual > 0 or not merged:
        zero = (0,) * n
        merged[zero] = merged.get(zero, ZERO) + residual
    support = tuple(sorted(merged))
    return BernoulliJoint(f.actions, support, tuple(merged[v] for v in support))


def corrmax_to_coverage(joint: ValueJoint) -> CoverageFunction:
    """Encode expected maxima as coverage: elements are (support point, value
    level) pairs weighted by probability times the level increment; an action
    covers the levels its realization reaches."""
    levels = sorted({v for vector in joint.support for v in vector if v > 0})
    ids = []
    weights = []
    members: list[tuple[int, Fraction]] = []
    previous: dict[Fraction, Fraction] = {}
    prev = ZERO
    for level in levels:
        previous[level] = prev
        prev = level
    for k, (vector, p) in enumerate(zip(joint.support, joint.pdf)):
        reach = max(vector) if vector else ZERO
        for level in levels:
            if level > reach:
                break  # never covered by any action at this support point
            weight = p * (level - previous[level])
            if weight == 0:
                continue
            ids.append(f"v{k}@{format_rational(level)}")
            weights.append(weight)
            members.append((k, level))
    cover = tuple(
        frozenset(
            e
            for e, (k, level) in enumerate(members)
            if joint.support[k][i] >= level
        )
        for i in range(len(joint.actions))
    )
    return CoverageFunction(tuple(ids), tuple(weights), joint.actions, cover)


def coverage_to_corrmax(f: CoverageFunction) -> ValueJoint:
    """Two-valued correlated variables realizing a coverage function as an
    expected maximum: draw a universe element with odds proportional to its
    weight; actions covering it take the value L = total weight.
    |support| <= |U|."""
    total = ZERO
    for w in f.weights:
        total += w
    n = f.n
    if total == 0:
        return ValueJoint(f.actions, ((ZERO,) * n,), (ONE,))
    merged: dict[tuple[Fraction, ...], Fraction] = {}
    for u, weight in enumerate(f.weights):
        if weight == 0:
            continue
        vector = tuple(total if u in f.cover[i] else ZERO for i in range(n))
        merged[vector] = merged.get(vector, ZERO) + weight / total
    support = tuple(sorted(merged))
    return ValueJoint(f.actions, support, tuple(merged[v] for v in support))


@dataclass(frozen=True)
class CorrelatedInstance:
    """Actions with costs plus the correlated-OR success function."""

    costs: tuple[Fraction, ...]
    coverage: CoverageFunction

    def __post_init__(self) -> None:
        costs = tuple(parse_rational(c) for c in self.costs)
        object.__setattr__(self, "costs", costs)
        if len(costs) != self.coverage.n:
            raise ValidationError("one cost per action required")
        for c in costs:
            if c < 0:
                raise ValidationError("costs must be non-negative")
        if coverage_eval(self.coverage, range(self.coverage.n)) > 1:
            raise ValidationError("success probabilities must stay within [0, 1]")

    @property
    def actions(self) -> tuple[str, ...]:
        return self.coverage.actions

    @property
    def n(self) -> int:
        return self.coverage.n


def sequence_cost(ci: CorrelatedInstance, strategy: TupleStrategy) -> Fraction:
    """Expected cost of opening the tuple in order, halting on first success:
    each action is paid for only when every earlier action failed."""
    total = ZERO
    covered: set[int] = set()
    mass = ZERO
    for k, action in enumerate(strategy):
        if k:
            prev = strategy[k - 1]
            for u in ci.coverage.cover[prev]:
                if u not in covered:
                    covered.add(u)
                    mass += ci.coverage.weights[u]
        total += (1 - mass) * ci.costs[action]
    return total


def sequence_utilities(
    ci: CorrelatedInstance, alpha: Fraction, strategy: TupleStrategy
) -> tuple[Fraction, Fraction]:
    """(agent utility, principal utility) under the linear contract alpha."""
    alpha = parse_rational(alpha)
    if not (0 <= alpha <= 1):
        raise ValidationError("alpha must lie in [0, 1]")
    success = coverage_eval(ci.coverage, strategy)
    return alpha * success - sequence_cost(ci, strategy), (1 - alpha) * success


def enumerate_tuple_strategies(
    ci: CorrelatedInstance, max_actions: int = DEFAULT_ACTION_BOUND
) -> list[TupleStrategy]:
    """All valid tuples, including the empty one.  An action may be appended
    only while failure is still possible, which keeps the representation's
    last action taken with positive probability."""
    if ci.n > max_actions:
        raise CapacityError(
            f"{ci.n} actions exceed the tuple-enumeration bound {max_actions}"
        )
    results: list[TupleStrategy] = [()]

    def extend(prefix: TupleStrategy, covered: frozenset[int], mass: Fraction) -> None:
        if mass >= 1:
            return
        for a in range(ci.n):
            if a in prefix:
                continue
            seq = prefix + (a,)
            results.append(seq)
            extra = ci.coverage.cover[a] - covered
            gained = ZERO
            for u in extra:
                gained += ci.coverage.weights[u]
            extend(seq, covered | extra, mass + gained)

    extend((), frozenset(), ZERO)
    return results


def brute_force_best_linear(
    ci: CorrelatedInstance, max_actions: int = DEFAULT_ACTION_BOUND
) -> tuple[Fraction, Fraction, TupleStrategy]:
    """Exhaustive optimal linear contract for small correlated instances.

    Candidate shares are 0, 1, and every indifference ratio between two
    strategy profiles with different success probabilities; at each candidate
    the agent's best response breaks ties in the principal's favor.
    Returns (alpha, principal utility, incentivized tuple), smallest alpha
    among utility maximizers.
    """
    strategies = enumerate_tuple_strategies(ci, max_actions)
    profiles: dict[tuple[Fraction, Fraction], TupleStrategy] = {}
    for s in strategies:
        key = (coverage_eval(ci.coverage, s), sequence_cost(ci, s))
        held = profiles.get(key)
        if held is None or (len(s), s) < (len(held), held):
            profiles[key] = s
    pairs = sorted(profiles)
    candidates = {ZERO, ONE}
    for (f1, c1), (f2, c2) in combinations(pairs, 2):
        if f1 == f2:
            continue
        alpha = (c1 - c2) / (f1 - f2)
        if ZERO <= alpha <= ONE:
            candidates.add(alpha)
    best: Optional[tuple[Fraction, Fraction, TupleStrategy]] = None
    for alpha in sorted(candidates):
        top_agent: Optional[Fraction] = None
        pick: Optional[tuple[Fraction, Fraction]] = None
        for f_s, c_s in pairs:
            u_agent = alpha * f_s - c_s
            if top_agent is None or u_agent > top_agent:
                top_agent = u_agent
                pick = (f_s, c_s)
            elif u_agent == top_agent and f_s > pick[0]:
                pick = (f_s, c_s)
        utility = (1 - alpha) * pick[0]
        if best is None or utility > best[1]:
            best = (alpha, utility, profiles[pick])
    return best


def hardness_reduction(
    fprime: CoverageFunction, k: int, gamma: Fraction
) -> CorrelatedInstance:
    """Attach a catch-all action to a coverage function whose singletons all
    succeed with probability 1/k.

    The new action "0" covers the whole universe and costs 1 - gamma/8; the
    original actions cost 3/(2(k+1)).  The resulting instance separates
    perfect covers from spread-out ones through its optimal linear contract.
    """
    gamma = parse_rational(gamma)
    if k < 1:
        raise ValidationError("k must be a positive integer")
    if not (0 < gamma < 1):
        raise ValidationError("gamma must lie strictly between 0 and 1")
    target = Fraction(1, k)
    for i in range(fprime.n):
        if coverage_eval(fprime, (i,)) != target:
            raise ValidationError(
                f"singleton coverage of action {fprime.actions[i]!r} must be 1/{k}"
            )
    if coverage_eval(fprime, range(fprime.n)) > 1:
        raise ValidationError("coverage values must stay within [0, 1]")
    if "0" in fprime.actions:
        raise ValidationError("action name '0' is reserved for the reduction")
    actions = fprime.actions + ("0",)
    cover = fprime.cover + (frozenset(range(len(fprime.universe))),)
    f = CoverageFunction(fprime.universe, fprime.weights, actions, cover)
    base_cost = Fraction(3, 2 * (k + 1))
    costs = tuple([base_cost] * fprime.n + [1 - gamma / 8])
    return CorrelatedInstance(costs, f)


def coverage_to_doc(
    f: CoverageFunction, costs: Optional[Sequence[Fraction]] = None
) -> dict[str, object]:
    doc: dict[str, object] = {
        "universe": [
            {"id": u, "weight": format_rational(w)}
            for u, w in zip(f.universe, f.weights)
        ],
        "actions": {
            name: sorted(f.universe[e] for e in covered)
            for name, covered in zip(f.actions, f.cover)
        },
    }
    if costs is not None:
        doc["costs"] = {
            name: format_rational(c) for name, c in zip(f.actions, costs)
        }
    return doc


def coverage_from_doc(
    doc: Mapping[str, object],
) -> tuple[CoverageFunction, Optional[tuple[Fraction, ...]]]:
    """Parse a coverage document; returns the function and costs if present."""
    if not isinstance(doc, Mapping):
        raise ValidationError("coverage document must be a JSON object")
    for key in ("universe", "actions"):
        if key not in doc:
            raise ValidationError(f"coverage document is missing {key!r}")
    universe_entries = doc["universe"]
    if not isinstance(universe_entries, Sequence) or isinstance(
        universe_entries, (str, bytes)
    ):
        raise ValidationError("universe must be an array")
    ids: list[str] = []
    weights: list[Fraction] = []
    for entry in universe_entries:
        if not isinstance(entry, Mapping) or "id" not in entry or "weight" not in entry:
            raise ValidationError("universe entries need 'id' and 'weight'")
        ids.append(str(entry["id"]))
        weights.append(parse_rational(entry["weight"]))
    index = {u: e for e, u in enumerate(ids)}
    if len(index) != len(ids):
        raise ValidationError("universe element ids must be distinct")
    actions_obj = doc["actions"]
    if not isinstance(actions_obj, Mapping):
        raise ValidationError("actions must map names to element id arrays")
    names = tuple(str(name) for name in actions_obj)
    cover = []
    for name in names:
        members = actions_obj[name]
        if not isinstance(members, Sequence) or isinstance(members, (str, bytes)):
            raise ValidationError(f"covered elements of {name!r} must be an array")
        try:
            cover.append(frozenset(index[str(u)] for u in members))
        except KeyError as exc:
            raise ValidationError(f"unknown universe element {exc.args[0]!r}") from exc
    f = CoverageFunction(tuple(ids), tuple(weights), names, tuple(cover))
    costs: Optional[tuple[Fraction, ...]] = None
    if "costs" in doc:
        costs_obj = doc["costs"]
        if not isinstance(costs_obj, Mapping):
            raise ValidationError("costs must map action names to rationals")
        missing = [name for name in names if name not in costs_obj]
        if missing:
            raise ValidationError(f"costs missing for actions: {missing}")
        costs = tuple(parse_rational(costs_obj[name]) for name in names)
    return f, costs


def correlated_instance_to_doc(ci: CorrelatedInstance) -> dict[str, object]:
    return coverage_to_doc(ci.coverage, ci.costs)


def correlated_instance_from_doc(doc: Mapping[str, object]) -> CorrelatedInstance:
    f, costs = coverage_from_doc(doc)
    if costs is None:
        raise ValidationError("correlated instance document needs 'costs'")
    return CorrelatedInstance(costs, f)
