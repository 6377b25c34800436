"""Optimal general contract for a small outcome count.

Contracts live in the box [0, L]^m.  A four-family hyperplane arrangement
captures every place where the agent's comparison structure (outcome
preference, halting sets, reservation-value order) can change, so some
intersection point of m hyperplanes maximizes the principal's utility.  The
solver enumerates those vertices exactly and evaluates each one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Iterable, Iterator, Optional, Sequence

from .agent import NonAdaptiveStrategy
from .model import (
    CapacityError,
    Contract,
    Instance,
    ONE,
    ValidationError,
    ZERO,
)

__all__ = [
    "GeneralSolution",
    "Hyperplane",
    "HyperplaneSet",
    "Vertex",
    "enumerate_vertices",
    "hyperplanes",
    "linz",
    "payment_bound",
    "solve_general",
]

logger = logging.getLogger(__name__)

DEFAULT_VERTEX_BUDGET = 3_000_000


def payment_bound(inst: Instance) -> Fraction:
    """The box bound L: no optimal payment ever exceeds r(m)/p for the
    smallest positive probability p."""
    top = inst.rewards[-1]
    smallest: Optional[Fraction] = None
    for row in inst.probs:
        for p in row:
            if p > 0 and (smallest is None or p < smallest):
                smallest = p
    if smallest is None:
        raise ValidationError("instance has no positive probability")
    return top / smallest


def linz(
    inst: Instance, action: int, subset: Iterable[int], payments: Sequence[Fraction]
) -> Fraction:
    """The linear form whose value equals the reservation value whenever
    ``subset`` is exactly the set of outcomes paying more than it."""
    mass = ZERO
    weighted = ZERO
    for j in subset:
        mass += inst.probs[action][j]
        weighted += inst.probs[action][j] * payments[j]
    if mass == 0:
        raise ValidationError("linz is undefined on zero-probability subsets")
    return (weighted - inst.costs[action]) / mass


@dataclass(frozen=True)
class Hyperplane:
    """An affine equation sum_j coefficients[j] * t(j) = offset.

    ``family`` records which structural transition the plane captures:
    A1 box walls, A2 payment ties, A3 halting-set changes, A4 reservation
    order changes.  ``params`` holds the family's defining parameters.
    """

    coefficients: tuple[Fraction, ...]
    offset: Fraction
    family: str
    params: tuple

    def canonical(self) -> tuple[tuple[int, ...], int]:
        """Integer-scaled, sign-normalized form used for deduplication and
        for the exact vertex kernels."""
        denoms = [c.denominator for c in self.coefficients]
        denoms.append(self.offset.denominator)
        scale = 1
        for d in denoms:
            scale = scale * d // gcd(scale, d)
        ints = [int(c * scale) for c in self.coefficients]
        rhs = int(self.offset * scale)
        g = 0
        for v in ints:
            g = gcd(g, v)
        g = gcd(g, rhs)
        if g:
            ints = [v // g for v in ints]
            rhs //= g
        lead = next((v for v in ints if v), 0)
        if lead < 0 or (lead == 0 and rhs < 0):
            ints = [-v for v in ints]
            rhs = -rhs
        return tuple(ints), rhs


@dataclass(frozen=True)
class HyperplaneSet:
    planes: tuple[Hyperplane, ...]
    family_counts: tuple[tuple[str, int], ...]

    @property
    def counts(self) -> dict[str, int]:
        return dict(self.family_counts)


def _box_walls(m: int, bound: Fraction) -> Iterator[Hyperplane]:
    for j in range(m):
        coeffs = tuple(ONE if k == j else ZERO for k in range(m))
        yield Hyperplane(coeffs, ZERO, "A1", (j, 0))
        yield Hyperplane(coeffs, bound, "A1", (j, 1))


def _payment_ties(m: int) -> Iterator[Hyperplane]:
    for j1 in range(m):
        for j2 in range(j1 + 1, m):
            coeffs = [ZERO] * m
            coeffs[j1] = ONE
            coeffs[j2] = -ONE
            yield Hyperplane(tuple(coeffs), ZERO, "A2", (j1, j2))


def _halting_transitions(inst: Instance) -> Iterator[Hyperplane]:
    # For a pivot outcome and any payment-upper-set containing it, the plane
    # where the suffix surplus equals the cost.  Parameterizing by (pivot,
    # upper set) produces exactly the planes of the per-permutation family.
    m = inst.m
    outcomes = range(m)
    for i in range(inst.n):
        cost = inst.costs[i]
        if cost == 0:
            continue  # free actions never stop being worth taking
        row = inst.probs[i]
        for pivot in outcomes:
            others = [j for j in outcomes if j != pivot]
            for r in range(len(others) + 1):
                for extra in combinations(others, r):
                    subset = (pivot, *extra)
                    coeffs = [ZERO] * m
                    mass = ZERO
                    for j in subset:
                        coeffs[j] += row[j]
                        mass += row[j]
                    coeffs[pivot] -= mass
                    if all(c == 0 for c in coeffs):
                        logger.debug(
                            "dropping degenerate halting plane: action %d, pivot %d,"
                            " subset %s",
                            i + 1,
                            pivot + 1,
                            subset,
                        )
                        continue
                    yield Hyperplane(
                        tuple(coeffs), cost, "A3", (i, pivot, frozenset(subset))
                    )


def _order_transitions(inst: Instance) -> Iterator[Hyperplane]:
    m = inst.m
    costly = [i for i in range(inst.n) if inst.costs[i] > 0]
    subsets: dict[int, list[tuple[tuple[int, ...], Fraction]]] = {}
    for i in costly:
        rows = []
        for r in range(1, m + 1):
            for subset in combinations(range(m), r):
                mass = ZERO
                for j in subset:
                    mass += inst.probs[i][j]
                if mass > 0:
                    rows.append((subset, mass))
        subsets[i] = rows
    for a in range(len(costly)):
        for b in range(a + 1, len(costly)):
            i1, i2 = costly[a], costly[b]
            for s1, mass1 in subsets[i1]:
                for s2, mass2 in subsets[i2]:
                    coeffs = [ZERO] * m
                    for j in s1:
                        coeffs[j] += inst.probs[i1][j] * mass2
                    for j in s2:
                        coeffs[j] -= inst.probs[i2][j] * mass1
                    offset = inst.costs[i1] * mass2 - inst.costs[i2] * mass1
                    if all(c == 0 for c in coeffs):
                        logger.debug(
                            "dropping degenerate order plane: actions %d/%d,"
                            " subsets %s/%s",
                            i1 + 1,
                            i2 + 1,
                            s1,
                            s2,
                        )
                        continue
                    yield Hyperplane(
                        tuple(coeffs),
                        offset,
                        "A4",
                        (i1, i2, frozenset(s1), frozenset(s2)),
                    )


def hyperplanes(inst: Instance, bound: Optional[Fraction] = None) -> HyperplaneSet:
    """The full arrangement, deduplicated by canonical affine form.

    Free actions are skipped in A3/A4: their reservation value is infinite
    under every contract, so they sit first in the order and never transition.
    """
    if bound is None:
        bound = payment_bound(inst)
    kept: list[Hyperplane] = []
    seen: dict[tuple[tuple[int, ...], int], int] = {}
    counts = {"A1": 0, "A2": 0, "A3": 0, "A4": 0}
    generators = (
        _box_walls(inst.m, bound),
        _payment_ties(inst.m),
        _halting_transitions(inst),
        _order_transitions(inst),
    )
    for gen in generators:
        for plane in gen:
            key = plane.canonical()
            if key in seen:
                continue
            seen[key] = len(kept)
            kept.append(plane)
            counts[plane.family] += 1
    return HyperplaneSet(tuple(kept), tuple(sorted(counts.items())))


@dataclass(frozen=True)
class Vertex:
    """A 0-face: the unique solution of m of the arrangement's equations,
    lying inside the payment box."""

    point: tuple[Fraction, ...]
    defining: tuple[int, ...]


def _vertices_dim1(data, lnum, lden, emit):
    for idx, (a, b) in enumerate(data):
        if not a:
            continue
        if a < 0:
            a, b = -a, -b
        if b < 0 or b * lden > lnum * a:
            continue
        emit((Fraction(b, a),), (idx,))


def _vertices_dim2(data, lnum, lden, emit):
    for (i, j) in combinations(range(len(data)), 2):
        a1, b1, d1 = data[i]
        a2, b2, d2 = data[j]
        det = a1 * b2 - a2 * b1
        if not det:
            continue
        n1 = d1 * b2 - d2 * b1
        if det > 0:
            if n1 < 0 or n1 * lden > lnum * det:
                continue
        else:
            if n1 > 0 or n1 * lden < lnum * det:
                continue
        n2 = a1 * d2 - a2 * d1
        if det > 0:
            if n2 < 0 or n2 * lden > lnum * det:
                continue
        else:
            if n2 > 0 or n2 * lden < lnum * det:
                continue
        emit((Fraction(n1, det), Fraction(n2, det)), (i, j))


def _vertices_dim3(data, lnum, lden, emit):
    # Integer Cramer with early out-of-box rejection; this loop dominates the
    # solver's runtime, hence the inlined minors.
    for (i, j, k) in combinations(range(len(data)), 3):
        a1, b1, c1, d1 = data[i]
        a2, b2, c2, d2 = data[j]
        a3, b3, c3, d3 = data[k]
        m1 = b2 * c3 - b3 * c2
        m2 = a2 * c3 - a3 * c2
        m3 = a2 * b3 - a3 * b2
        det = a1 * m1 - b1 * m2 + c1 * m3
        if not det:
            continue
        dc1 = d2 * c3 - d3 * c2
        n1 = d1 * m1 - b1 * dc1 + c1 * (d2 * b3 - d3 * b2)
        if det > 0:
            if n1 < 0 or n1 * lden > lnum * det:
                continue
        else:
            if n1 > 0 or n1 * lden < lnum * det:
                continue
        ad1 = a2 * d3 - a3 * d2
        n2 = a1 * dc1 - d1 * m2 + c1 * ad1
        if det > 0:
            if n2 < 0 or n2 * lden > lnum * det:
                continue
        else:
            if n2 > 0 or n2 * lden < lnum * det:
                continue
        n3 = a1 * (b2 * d3 - b3 * d2) - b1 * ad1 + d1 * m3
        if det > 0:
            if n3 < 0 or n3 * lden > lnum * det:
                continue
        else:
            if n3 > 0 or n3 * lden < lnum * det:
                continue
        emit(
            (Fraction(n1, det), Fraction(n2, det), Fraction(n3, det)),
            (i, j, k),
        )


def _solve_square(rows: list[tuple[tuple[Fraction, ...], Fraction]]):
    """Exact Gaussian elimination; returns None for singular systems."""
    m = len(rows)
    mat = [list(coeffs) + [rhs] for coeffs, rhs in rows]
    for col in range(m):
        pivot = next((r for r in range(col, m) if mat[r][col] != 0), None)
        if pivot is None:
            return None
        mat[col], mat[pivot] = mat[pivot], mat[col]
        head = mat[col][col]
        for r in range(m):
            if r == col or mat[r][col] == 0:
                continue
            factor = mat[r][col] / head
            for c in range(col, m + 1):
                mat[r][c] -= factor * mat[col][c]
    return tuple(mat[r][m] / mat[r][r] for r in range(m))


def enumerate_vertices(
    hs: HyperplaneSet,
    bound: Fraction,
    budget: int = DEFAULT_VERTEX_BUDGET,
) -> Iterator[Vertex]:
    """Every intersection point of m hyperplanes inside [0, bound]^m.

    Points are deduplicated; singular subsets are skipped silently.  Raises
    CapacityError when the number of m-subsets to scan exceeds the budget.
    """
    if not hs.planes:
        return
    m = len(hs.planes[0].coefficients)
    total = comb(len(hs.planes), m)
    if total > budget:
        raise CapacityError(
            f"projected vertex count {total} exceeds budget {budget}"
        )
    lnum, lden = bound.numerator, bound.denominator
    seen: set[tuple[Fraction, ...]] = set()
    results: list[Vertex] = []

    def emit(point: tuple[Fraction, ...], defining: tuple[int, ...]) -> None:
        if point not in seen:
            seen.add(point)
            results.append(Vertex(point, defining))

    canon = [plane.canonical() for plane in hs.planes]
    data = [(*coeffs, rhs) for coeffs, rhs in canon]
    if m == 1:
        _vertices_dim1(data, lnum, lden, emit)
    elif m == 2:
        _vertices_dim2(data, lnum, lden, emit)
    elif m == 3:
        _vertices_dim3(data, lnum, lden, emit)
    else:
        planes = [
            (plane.coefficients, plane.offset) for plane in hs.planes
        ]
        for subset in combinations(range(len(planes)), m):
            solution = _solve_square([planes[idx] for idx in subset])
            if solution is None:
                continue
            if all(ZERO <= t <= bound for t in solution):
                emit(solution, subset)
    yield from results


@dataclass(frozen=True)
class GeneralSolution:
    contract: Contract
    utility: Fraction
    strategy: NonAdaptiveStrategy
    vertex_count: int
    hyperplane_counts: tuple[tuple[str, int], ...]


def solve_general(
    inst: Instance, vertex_budget: int = DEFAULT_VERTEX_BUDGET
) -> GeneralSolution:
    """The optimal general contract over [0, L]^m.

    Evaluates the principal's utility at every arrangement vertex; among
    maximizers the lexicographically smallest payment vector wins.  The subset
    scan grows as C(|A|, m), so the practical bound is m <= 4 (and few costly
    actions at m = 4); past that the ``vertex_budget`` guard raises a capacity
    error instead of silently blowing up.
    """
    from ._fast import FastEvaluator

    bound = payment_bound(inst)
    hs = hyperplanes(inst, bound)
    evaluator = FastEvaluator(inst)
    best_point: Optional[tuple[Fraction, ...]] = None
    best_utility: Optional[Fraction] = None
    best_strategy: Optional[NonAdaptiveStrategy] = None
    count = 0
    for vertex in enumerate_vertices(hs, bound, vertex_budget):
        count += 1
        utility, strategy = evaluator.utility_and_strategy(Contract(vertex.point))
        if (
            best_utility is None
            or utility > best_utility
            or (utility == best_utility and vertex.point < best_point)
        ):
            best_point = vertex.point
            best_utility = utility
            best_strategy = strategy
    if best_point is None:
        raise AssertionError("the arrangement always contains the box corners")
    return GeneralSolution(
        Contract(best_point),
        best_utility,
        best_strategy,
        count,
        hs.family_counts,
    )
