"""Tests for the modulus, gluing, worst-sum search and certificates."""

import math
from fractions import Fraction

import numpy as np
import pytest

from contana import (
    Anchor,
    BudgetError,
    Certificate,
    EmptyCollection,
    FunctionSpec,
    GeometryError,
    IntervalCollection,
    IntervalSpec,
    Monotonicity,
    Partition,
    PiecewiseConvexPartition,
    PreconditionError,
    SampleGrid,
    Shape,
    ShapePiece,
    Unachievable,
    ac_certificate,
    ac_sum,
    detect_partition,
    evaluate,
    glue_chain,
    glued_single_interval,
    gluing_bound_check,
    invert_modulus,
    modulus,
    modulus_on_grid,
    random_collection,
    refine_to_monotone,
    sample,
    split_collection_at_partition,
    verify_certificate,
    worst_ac_sum_oracle,
)
from contana import catalog
from contana.continuity import ModulusCurve


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def omega_pair_scan(grid, delta):
    """O(m^2) dense pair scan: the defining maximum, no sliding window."""
    xs, vs = grid.abscissae, grid.values
    best = 0.0
    for i in range(len(xs)):
        for j in range(i, len(xs)):
            if xs[j] - xs[i] > delta:
                break
            diff = abs(vs[j] - vs[i])
            if diff > best:
                best = diff
    return best


def brute_force_worst_sum(values, units, k_max):
    """Exhaustive search over grid-aligned collections on a tiny grid."""
    m = len(values)
    best = 0.0

    def rec(start, units_left, k_left, acc):
        nonlocal best
        best = max(best, acc)
        if k_left == 0:
            return
        for i in range(start, m - 1):
            for j in range(i + 1, m):
                cost = j - i
                if cost > units_left:
                    break
                rec(j, units_left - cost, k_left - 1,
                    acc + abs(values[j] - values[i]))

    rec(0, units, k_max, 0.0)
    return best


def sqrt_on_unit_pieces():
    f = catalog.sqrt_on_unit()
    res = detect_partition(sample(f, IntervalSpec(0.0, 1.0), 2001))
    pieces = [p for s in res.shapes for p in refine_to_monotone(f, s)]
    return f, res.partition, tuple(pieces)


class TestIntervalCollection:
    def test_invariants(self):
        with pytest.raises(GeometryError):
            IntervalCollection(((0.5, 0.5),))
        with pytest.raises(GeometryError):
            IntervalCollection(((0.0, 0.4), (0.3, 0.6)))
        c = IntervalCollection(((0.0, 0.25), (0.25, 0.5)))
        assert c.total_length == 0.5

    def test_exact_total_with_fractions(self):
        c = IntervalCollection(((Fraction(0), Fraction(1, 3)),
                                (Fraction(1, 2), Fraction(5, 6))))
        assert c.total_length == Fraction(2, 3)


class TestModulus:
    def test_sqrt_matches_pair_scan(self):
        f = catalog.sqrt_on_unit()
        grid = sample(f, IntervalSpec(0.0, 1.0), 401)
        curve = modulus_on_grid(grid, [0.01, 0.04, 0.25])
        for (d, w) in curve.samples:
            assert w == omega_pair_scan(grid, d)
        assert curve.samples[-1][1] == 0.5

    def test_affine_linear_law(self):
        f = FunctionSpec.affine(2.0, 0.0, IntervalSpec(0.0, 1.0))
        curve = modulus(f, IntervalSpec(0.0, 1.0), [0.1], m=101)
        assert curve.omegas[0] == pytest.approx(0.2, abs=1e-12)

    def test_cantor_self_similarity_exact(self):
        f = catalog.cantor_on_unit()
        endpoints = sorted({x for pair in catalog.cantor_stage_cover(6).pairs
                            for x in pair})
        grid = SampleGrid.from_abscissae(f, endpoints)
        deltas = [Fraction(1, 3 ** k) for k in range(6, 0, -1)]
        curve = modulus_on_grid(grid, deltas)
        for (d, w), k in zip(curve.samples, range(6, 0, -1)):
            assert w == 2.0 ** -k
            assert w == omega_pair_scan(grid, d)

    def test_budget_error(self):
        f = catalog.sqrt_on_unit()
        with pytest.raises(BudgetError):
            modulus(f, IntervalSpec(0.0, 1.0), [2.0], m=51)
        with pytest.raises(BudgetError):
            modulus(f, IntervalSpec(0.0, 1.0), [0.2, 0.1], m=51)

    def test_nondecreasing(self):
        f = catalog.cantor_on_unit()
        curve = modulus(f, IntervalSpec(0.0, 1.0),
                        [0.001, 0.01, 0.1, 0.3, 0.9], m=801)
        assert all(b >= a for a, b in zip(curve.omegas, curve.omegas[1:]))

    def test_fast_path_agrees_with_exact(self):
        # 24001 points crosses the fast-path threshold
        f = catalog.sqrt_on_unit()
        grid = sample(f, IntervalSpec(0.0, 1.0), 24001)
        deltas = [0.001, 0.02, 0.3]
        fast = modulus_on_grid(grid, deltas)
        from contana.continuity import _omega_sliding
        for (d, w) in fast.samples:
            assert w == pytest.approx(_omega_sliding(grid.abscissae,
                                                     grid.values, d),
                                      abs=1e-12)


class TestInvertModulus:
    def test_sqrt_curve(self):
        curve = ModulusCurve(((0.0625, 0.25), (0.125, math.sqrt(0.125)),
                              (0.2, math.sqrt(0.2)), (0.24, math.sqrt(0.24)),
                              (0.25, 0.5)))
        # omega(0.25) = 0.5 does not qualify strictly; 0.24 is the largest
        assert invert_modulus(curve, 0.5) == pytest.approx(0.9 * 0.24)

    def test_affine_curve(self):
        curve = ModulusCurve(((0.05, 0.1), (0.09, 0.18), (0.099, 0.198),
                              (0.1, 0.2)))
        assert invert_modulus(curve, 0.2) == pytest.approx(0.9 * 0.099)

    def test_unachievable(self):
        with pytest.raises(Unachievable):
            invert_modulus(ModulusCurve(((0.1, 0.05),)), 0.01)


class TestGlueChain:
    def test_left_anchored(self):
        c = IntervalCollection(((0.0, 0.1), (0.3, 0.4)))
        chain = glue_chain(c, Anchor.LEFT)
        assert chain.z[0] == 0.0
        assert chain.z[1] == pytest.approx(0.1, abs=1e-15)
        assert chain.z[2] == pytest.approx(0.2, abs=1e-15)

    def test_right_anchored(self):
        c = IntervalCollection(((0.0, 0.1), (0.3, 0.4)))
        chain = glue_chain(c, Anchor.RIGHT)
        assert chain.z[-1] == 0.4
        assert chain.z[1] == pytest.approx(0.3, abs=1e-15)
        assert chain.z[0] == pytest.approx(0.2, abs=1e-15)

    def test_single_pair_identity(self):
        c = IntervalCollection(((0.2, 0.7),))
        for anchor in (Anchor.LEFT, Anchor.RIGHT):
            assert glue_chain(c, anchor).z == (0.2, 0.7)

    def test_empty(self):
        with pytest.raises(EmptyCollection):
            glue_chain(IntervalCollection(()), Anchor.LEFT)

    def test_gaps_reproduce_lengths(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            c = random_collection(rng, 0.0, 1.0, 0.3, 5)
            if len(c) == 0:
                continue
            sigmas = [y - x for x, y in c.pairs]
            for anchor in (Anchor.LEFT, Anchor.RIGHT):
                chain = glue_chain(c, anchor)
                gaps = [b - a for a, b in zip(chain.z, chain.z[1:])]
                assert gaps == pytest.approx(sigmas, abs=1e-14)
                # budget conservation
                assert chain.z[-1] - chain.z[0] == pytest.approx(
                    float(c.total_length), abs=len(c) * 1e-15)


class TestGluingBound:
    def test_sqrt_example(self):
        f = catalog.sqrt_on_unit()
        piece = ShapePiece(IntervalSpec(0.0, 1.0), Shape.CONCAVE,
                           Monotonicity.INCREASING, 0.0)
        c = IntervalCollection(((0.0, 0.1), (0.3, 0.4)))
        chk = gluing_bound_check(f, piece, c)
        assert chk.direction_used is Anchor.LEFT
        assert chk.lhs == pytest.approx(
            math.sqrt(0.1) + math.sqrt(0.4) - math.sqrt(0.3), abs=1e-12)
        assert chk.rhs == pytest.approx(math.sqrt(0.2), abs=1e-12)
        assert chk.holds

    def test_square_example(self):
        f = catalog.squared()
        piece = ShapePiece(IntervalSpec(0.0, 10.0), Shape.CONVEX,
                           Monotonicity.INCREASING, 0.0)
        c = IntervalCollection(((1.0, 2.0), (5.0, 6.0)))
        chk = gluing_bound_check(f, piece, c)
        assert chk.direction_used is Anchor.RIGHT
        assert chk.lhs == pytest.approx(14.0, abs=1e-12)
        assert chk.rhs == pytest.approx(20.0, abs=1e-12)
        assert chk.holds

    def test_affine_equality(self):
        f = FunctionSpec.affine(-3.0, 2.0, IntervalSpec(0.0, 1.0))
        piece = ShapePiece(IntervalSpec(0.0, 1.0), Shape.AFFINE,
                           Monotonicity.DECREASING, 0.0)
        rng = np.random.default_rng(11)
        for _ in range(100):
            c = random_collection(rng, 0.0, 1.0, 0.2, 4)
            if len(c) == 0:
                continue
            chk = gluing_bound_check(f, piece, c)
            assert chk.holds
            assert abs(chk.lhs - chk.rhs) <= 1e-12 * max(1.0, abs(chk.rhs))

    def test_pair_outside_piece(self):
        f = catalog.sqrt_on_unit()
        piece = ShapePiece(IntervalSpec(0.0, 0.5), Shape.CONCAVE,
                           Monotonicity.INCREASING, 0.0)
        with pytest.raises(GeometryError):
            gluing_bound_check(f, piece, IntervalCollection(((0.4, 0.6),)))

    def test_telescoping_identity(self):
        # monotone f: interior chain increments collapse to the endpoints
        f = catalog.sqrt_on_unit()
        rng = np.random.default_rng(5)
        for _ in range(100):
            c = random_collection(rng, 0.0, 1.0, 0.25, 6)
            if len(c) == 0:
                continue
            chain = glue_chain(c, Anchor.LEFT)
            step_sum = math.fsum(abs(evaluate(f, b) - evaluate(f, a))
                                 for a, b in zip(chain.z, chain.z[1:]))
            direct = abs(evaluate(f, chain.z[-1]) - evaluate(f, chain.z[0]))
            assert step_sum == pytest.approx(direct, abs=len(c) * 1e-15)


class TestWorstSumOracle:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(6):
            values = [float(v) for v in rng.normal(size=12)]
            knots = tuple((i / 11.0, v) for i, v in enumerate(values))
            f = FunctionSpec.sampled_table(knots)
            grid = SampleGrid.from_abscissae(f, [k[0] for k in knots])
            h = grid.spacing
            for units, kmax in ((3, 2), (5, 3), (7, 12)):
                delta = (units + 1) * h
                rep = worst_ac_sum_oracle(f, grid, delta * 1.0000001, kmax)
                want = brute_force_worst_sum(values, units, kmax)
                assert rep.best_sum == pytest.approx(want, abs=1e-12), (
                    trial, units, kmax)

    def test_sqrt_single_left_interval(self):
        f = catalog.sqrt_on_unit()
        grid = sample(f, IntervalSpec(0.0, 1.0), 401)
        rep = worst_ac_sum_oracle(f, grid, 0.25)
        spacing = float(grid.spacing)
        assert math.sqrt(0.25 - spacing) - 1e-12 <= rep.best_sum <= 0.5 + 1e-12
        assert len(rep.witness) == 1
        x, y = rep.witness.pairs[0]
        assert x == 0.0
        assert y == pytest.approx(0.2475, abs=1e-12)
        assert float(rep.witness.total_length) < 0.25
        assert ac_sum(f, rep.witness) == pytest.approx(rep.best_sum, abs=1e-12)

    def test_affine_uses_whole_budget(self):
        f = FunctionSpec.affine(3.0, 0.0, IntervalSpec(0.0, 1.0))
        grid = sample(f, IntervalSpec(0.0, 1.0), 101)
        rep = worst_ac_sum_oracle(f, grid, 0.15)
        # 14 grid units of 0.01 fit strictly under 0.15
        assert rep.best_sum == pytest.approx(3.0 * 0.14, abs=1e-12)
        assert float(rep.witness.total_length) == pytest.approx(0.14, abs=1e-12)

    def test_cantor_stage3_cover(self):
        f = catalog.cantor_on_unit()
        xs = [Fraction(i, 27) for i in range(28)]
        grid = SampleGrid.from_abscissae(f, xs)
        rep = worst_ac_sum_oracle(f, grid, Fraction(1, 3))
        assert rep.best_sum == 1.0
        assert rep.witness.total_length <= Fraction(8, 27)
        assert ac_sum(f, rep.witness) == 1.0

    def test_budget_error(self):
        f = catalog.sqrt_on_unit()
        grid = sample(f, IntervalSpec(0.0, 1.0), 101)
        with pytest.raises(BudgetError):
            worst_ac_sum_oracle(f, grid, 0.005)

    def test_glued_closed_form_agreement(self):
        f = catalog.sqrt_on_unit()
        piece = ShapePiece(IntervalSpec(0.0, 1.0), Shape.CONCAVE,
                           Monotonicity.INCREASING, 0.0)
        grid = sample(f, IntervalSpec(0.0, 1.0), 401)
        rep = worst_ac_sum_oracle(f, grid, 0.25)
        glued = glued_single_interval(f, piece, rep.witness.total_length)
        omega_h = modulus_on_grid(grid, [grid.spacing]).omegas[0]
        assert abs(rep.best_sum - glued.best_sum) <= omega_h + 1e-12


class TestSplitCollection:
    def test_examples(self):
        p = Partition((0.0, 0.5, 1.0))
        out = split_collection_at_partition(
            IntervalCollection(((0.4, 0.6),)), p)
        assert out.pairs == ((0.4, 0.5), (0.5, 0.6))
        out = split_collection_at_partition(
            IntervalCollection(((0.1, 0.2),)), p)
        assert out.pairs == ((0.1, 0.2),)
        out = split_collection_at_partition(
            IntervalCollection(((0.45, 0.55), (0.7, 0.8))), p)
        assert out.pairs == ((0.45, 0.5), (0.5, 0.55), (0.7, 0.8))

    def test_straddle_rejected(self):
        p = Partition((0.0, 0.4, 0.6, 1.0))
        with pytest.raises(PreconditionError):
            split_collection_at_partition(
                IntervalCollection(((0.3, 0.7),)), p)

    def test_length_preserved_and_sum_dominates(self):
        f = catalog.sqrt_on_unit()
        rng = np.random.default_rng(17)
        for _ in range(200):
            k = 2 + int(rng.integers(0, 3))
            inner = np.sort(rng.uniform(0.1, 0.9, size=k))
            try:
                p = Partition((0.0, *map(float, inner), 1.0))
            except Exception:
                continue
            total = p.min_piece_length * 0.8
            c = random_collection(rng, 0.0, 1.0, total, 3)
            if len(c) == 0:
                continue
            out = split_collection_at_partition(c, p)
            assert abs(float(out.total_length) -
                       float(c.total_length)) <= 1e-12
            assert ac_sum(f, out) >= ac_sum(f, c) - 1e-12


class TestCertificates:
    def test_sqrt_delta1_band(self):
        f, partition, pieces = sqrt_on_unit_pieces()
        cert = ac_certificate(f, partition, pieces, 0.1)
        assert 0.006 <= cert.delta1 <= 0.01
        assert cert.per_piece_budget == pytest.approx(0.1)
        assert cert.delta1 < partition.min_piece_length

    def test_affine_delta1(self):
        f = FunctionSpec.affine(3.0, 0.0, IntervalSpec(0.0, 1.0))
        res = detect_partition(sample(f, IntervalSpec(0.0, 1.0), 2001))
        pieces = [p for s in res.shapes for p in refine_to_monotone(f, s)]
        cert = ac_certificate(f, res.partition, pieces, 0.1)
        # linear modulus: delta1 ~ 0.99 * 0.9 * (0.1 / 3)
        assert 0.023 <= cert.delta1 <= 0.0333

    def test_verify_sqrt_passes(self):
        f, partition, pieces = sqrt_on_unit_pieces()
        cert = ac_certificate(f, partition, pieces, 0.1)
        ver = verify_certificate(f, cert, trials=500, seed=0)
        assert ver.passed
        assert ver.worst_sum < 0.1
        assert ver.worst_sum == pytest.approx(
            ac_sum(f, ver.worst_collection), abs=1e-12)

    def test_fabricated_cantor_certificate_fails(self):
        f = catalog.cantor_on_unit()
        fake = Certificate(
            epsilon=0.5, delta1=(2.0 / 3.0) ** 6,
            partition=Partition((0.0, 1.0)), per_piece_budget=0.5,
            monotone_pieces=(ShapePiece(IntervalSpec(0.0, 1.0), Shape.CONCAVE,
                                        Monotonicity.INCREASING, 0.0),))
        ver = verify_certificate(f, fake, trials=500, seed=0)
        assert not ver.passed
        assert ver.worst_sum >= 0.5
        assert ver.worst_sum == pytest.approx(
            ac_sum(f, ver.worst_collection), abs=1e-12)

    def test_unachievable_on_steep_data(self):
        jump = FunctionSpec.piecewise_linear(
            ((0.0, 0.0), (1e-7, 1.0), (1.0, 1.0000001)))
        res = detect_partition(sample(jump, IntervalSpec(0.0, 1.0), 2001))
        assert isinstance(res, PiecewiseConvexPartition)
        pieces = [p for s in res.shapes for p in refine_to_monotone(jump, s)]
        with pytest.raises(Unachievable):
            ac_certificate(jump, res.partition, pieces, 0.5)

    def test_certificate_bound_is_semantic(self):
        # the certified guarantee: every collection under the budget stays
        # below epsilon, checked against the exact worst case sqrt(delta1)
        f, partition, pieces = sqrt_on_unit_pieces()
        cert = ac_certificate(f, partition, pieces, 0.1)
        assert math.sqrt(cert.delta1) < 0.1


class TestRandomCollection:
    def test_shape(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            c = random_collection(rng, 0.25, 1.5, 0.2, 6)
            assert float(c.total_length) <= 0.2 + 1e-12
            for x, y in c.pairs:
                assert 0.25 <= x < y <= 1.5
