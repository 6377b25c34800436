from fractions import Fraction as F

import pytest

from seqcontract import (
    CapacityError,
    Contract,
    Instance,
    enumerate_vertices,
    evaluate_strategy,
    gen_critpoints_instance,
    gen_gap_instance,
    gen_random_contract,
    gen_random_instance,
    hyperplanes,
    is_finite,
    linz,
    payment_bound,
    reservation_values,
    solve_general,
    solve_linear,
)


class TestPaymentBound:
    def test_i1(self, i1):
        assert payment_bound(i1) == F(2)

    def test_uniform(self):
        inst = Instance(
            (F(0), F(5)), (F(1),), ((F(1, 2), F(1, 2)),)
        )
        assert payment_bound(inst) == F(10)

    def test_critpoints_m3(self):
        assert payment_bound(gen_critpoints_instance(3)) == F(6)


class TestHyperplanes:
    def test_single_pair_tie_plane(self, i1):
        hs = hyperplanes(i1)
        assert hs.counts["A2"] == 1

    def test_box_walls(self, i1):
        hs = hyperplanes(i1)
        walls = [p for p in hs.planes if p.family == "A1"]
        normalized = {(p.coefficients, p.offset) for p in walls}
        assert ((F(1), F(0)), F(0)) in normalized
        assert ((F(1), F(0)), F(2)) in normalized
        assert ((F(0), F(1)), F(0)) in normalized
        assert ((F(0), F(1)), F(2)) in normalized

    def test_i1_halting_plane(self, i1):
        hs = hyperplanes(i1)
        # (1/2)(t2 - t1) = 1/10 must appear among the halting transitions.
        target = None
        for p in hs.planes:
            if p.family != "A3":
                continue
            if p.coefficients == (F(-1, 2), F(1, 2)) and p.offset == F(1, 10):
                target = p
        assert target is not None

    def test_equations_match_family_forms(self):
        inst = gen_random_instance(3, 3, 5)
        hs = hyperplanes(inst)
        for p in hs.planes:
            if p.family == "A3":
                i, pivot, subset = p.params
                coeffs = [F(0)] * inst.m
                mass = F(0)
                for j in subset:
                    coeffs[j] += inst.probs[i][j]
                    mass += inst.probs[i][j]
                coeffs[pivot] -= mass
                assert tuple(coeffs) == p.coefficients
                assert p.offset == inst.costs[i]
            if p.family == "A4":
                i1_, i2_, s1, s2 = p.params
                m1 = sum((inst.probs[i1_][j] for j in s1), F(0))
                m2 = sum((inst.probs[i2_][j] for j in s2), F(0))
                coeffs = [F(0)] * inst.m
                for j in s1:
                    coeffs[j] += inst.probs[i1_][j] * m2
                for j in s2:
                    coeffs[j] -= inst.probs[i2_][j] * m1
                assert tuple(coeffs) == p.coefficients
                assert p.offset == inst.costs[i1_] * m2 - inst.costs[i2_] * m1

    def test_free_actions_excluded(self):
        inst = Instance(
            (F(0), F(1)),
            (F(0), F(1, 4)),
            ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2))),
        )
        hs = hyperplanes(inst)
        assert hs.counts["A4"] == 0  # only one costly action
        for p in hs.planes:
            if p.family in ("A3", "A4"):
                assert 0 not in {p.params[0]}


class TestEnumerateVertices:
    def test_i1_contains_optimum_and_corners(self, i1):
        hs = hyperplanes(i1)
        bound = payment_bound(i1)
        points = {v.point for v in enumerate_vertices(hs, bound)}
        assert (F(0), F(1, 5)) in points
        for corner in [(F(0), F(0)), (F(0), F(2)), (F(2), F(0)), (F(2), F(2))]:
            assert corner in points

    def test_vertices_solve_their_equations(self):
        inst = gen_random_instance(2, 3, 9)
        hs = hyperplanes(inst)
        bound = payment_bound(inst)
        count = 0
        for v in enumerate_vertices(hs, bound):
            count += 1
            assert all(F(0) <= t <= bound for t in v.point)
            for idx in v.defining:
                plane = hs.planes[idx]
                lhs = sum(
                    (c * t for c, t in zip(plane.coefficients, v.point)), F(0)
                )
                assert lhs == plane.offset
        assert count > 0

    def test_budget_guard(self, i1):
        hs = hyperplanes(i1)
        with pytest.raises(CapacityError):
            list(enumerate_vertices(hs, payment_bound(i1), budget=3))

    def test_parallel_planes_skipped(self, i1):
        hs = hyperplanes(i1)
        bound = payment_bound(i1)
        # No vertex is defined by the two parallel walls t1 = 0, t1 = 2.
        wall_idx = [
            k
            for k, p in enumerate(hs.planes)
            if p.family == "A1" and p.coefficients == (F(1), F(0))
        ]
        for v in enumerate_vertices(hs, bound):
            assert not set(wall_idx) <= set(v.defining)


class TestSolveGeneral:
    def test_i1(self, i1):
        sol = solve_general(i1)
        assert sol.contract.payments == (F(0), F(1, 5))
        assert sol.utility == F(2, 5)

    def test_all_costs_zero(self):
        inst = Instance(
            (F(0), F(1), F(3)),
            (F(0), F(0)),
            ((F(1, 2), F(1, 2), F(0)), (F(1, 3), F(1, 3), F(1, 3))),
        )
        sol = solve_general(inst)
        assert sol.contract.payments == (F(0), F(0), F(0))
        welfare = evaluate_strategy(
            inst, Contract((F(0), F(0), F(0))), sol.strategy
        ).principal_utility
        assert sol.utility == welfare

    def test_gap_instance_beats_linear(self):
        inst = gen_gap_instance(3)
        sol = solve_general(inst)
        _, linear_utility, _ = solve_linear(inst)
        assert sol.utility > linear_utility

    @pytest.mark.parametrize("seed", range(6))
    def test_dominates_linear(self, seed):
        inst = gen_random_instance(2, 3, seed)
        sol = solve_general(inst)
        _, linear_utility, _ = solve_linear(inst)
        assert sol.utility >= linear_utility

    def test_single_outcome_degenerate(self):
        inst = Instance((F(0),), (F(1, 2),), ((F(1),),))
        sol = solve_general(inst)
        assert sol.utility == F(0)
        assert sol.contract.payments == (F(0),)


class TestLinzForms:
    @pytest.mark.parametrize("seed", range(12))
    def test_active_form_equals_reservation_value(self, seed):
        inst = gen_random_instance(2 + seed % 2, 3, seed)
        contract = gen_random_contract(inst, seed + 500)
        zs = reservation_values(inst, contract)
        for i in range(inst.n):
            if not is_finite(zs[i]):
                continue
            active = frozenset(
                j for j in range(inst.m) if contract.payments[j] > zs[i]
            )
            mass = sum((inst.probs[i][j] for j in active), F(0))
            if mass == 0:
                continue
            assert linz(inst, i, active, contract.payments) == zs[i]


class TestFaceConstancy:
    def test_structure_constant_on_sampled_faces(self):
        # Fix m-1 planes, walk the residual line inside the box, and check the
        # agent's comparison structure matches at two interior points whenever
        # no other plane separates them.
        import random

        inst = gen_random_instance(2, 3, 4)
        hs = hyperplanes(inst)
        bound = payment_bound(inst)
        planes = hs.planes
        rng = random.Random(0)
        checked = 0
        for trial in range(400):
            if checked >= 10:
                break
            i, j = rng.sample(range(len(planes)), 2)
            base = _line_through(planes[i], planes[j])
            if base is None:
                continue
            point, direction = base
            samples = []
            for step in (F(1, 7), F(2, 7), F(3, 7), F(5, 7)):
                cand = tuple(p + step * d for p, d in zip(point, direction))
                if all(F(0) < t < bound for t in cand):
                    samples.append(cand)
            if len(samples) < 2:
                continue
            t1, t2 = samples[0], samples[-1]
            sides1 = _sign_vector(planes, t1)
            sides2 = _sign_vector(planes, t2)
            if sides1 != sides2:
                continue  # different faces
            checked += 1
            assert _structure(inst, t1) == _structure(inst, t2)
        assert checked >= 5


def _line_through(p1, p2):
    """Point and direction of the intersection line of two planes in R^3."""
    a1, a2 = p1.coefficients, p2.coefficients
    d = (
        a1[1] * a2[2] - a1[2] * a2[1],
        a1[2] * a2[0] - a1[0] * a2[2],
        a1[0] * a2[1] - a1[1] * a2[0],
    )
    if all(x == 0 for x in d):
        return None
    # Solve the 2x2 system on the coordinate pair where the cross product is
    # nonzero, pinning the third coordinate to zero.
    for drop in range(3):
        if d[drop] == 0:
            continue
        keep = [k for k in range(3) if k != drop]
        det = a1[keep[0]] * a2[keep[1]] - a1[keep[1]] * a2[keep[0]]
        if det == 0:
            continue
        x = (p1.offset * a2[keep[1]] - p2.offset * a1[keep[1]]) / det
        y = (p2.offset * a1[keep[0]] - p1.offset * a2[keep[0]]) / det
        point = [F(0)] * 3
        point[keep[0]] = x
        point[keep[1]] = y
        return tuple(point), d
    return None


def _sign_vector(planes, point):
    signs = []
    for p in planes:
        value = sum((c * t for c, t in zip(p.coefficients, point)), F(0))
        signs.append((value > p.offset) - (value < p.offset))
    return tuple(signs)


def _structure(inst, point):
    contract = Contract(point)
    zs = reservation_values(inst, contract)
    pay = contract.payments
    order = tuple(sorted(range(inst.m), key=lambda j: (pay[j], j)))
    prefixes = tuple(
        frozenset(j for j in range(inst.m) if pay[j] > zs[i])
        if is_finite(zs[i])
        else None
        for i in range(inst.n)
    )
    ranking = tuple(
        sorted(
            range(inst.n),
            key=lambda i: (0, F(0), i) if not is_finite(zs[i]) else (1, -zs[i], i),
        )
    )
    return order, prefixes, ranking
