"""Descent learners: rates, projection interplay, and the decomposition."""

import math

import numpy as np
import pytest

from percoord.core import Box, Example, SparseVector
from percoord.learners import (
    AdaptiveGlobalOGD,
    CompositeDecomposition,
    ConfigurationError,
    FixedStepOGD,
    PassiveAggressive,
    PerCoordinateOGD,
    StronglyConvexOGD,
    per_coordinate_factory,
    strongly_convex_factory,
)
from percoord.losses import HingeLoss, LinearLoss


def rng(seed=0):
    return np.random.Generator(np.random.Philox(key=seed))


def sv(entries):
    return SparseVector(entries)


class TestFixedStepOGD:
    def test_step_and_projection(self):
        learner = FixedStepOGD(Box.unit(1), 0.5)
        learner.update(sv({0: -1.0}))
        assert learner.current_point() == sv({0: 0.5})
        learner.update(sv({0: -2.0}))
        assert learner.current_point() == sv({0: 1.0})  # clipped at the face

    def test_starts_at_projected_origin(self):
        learner = FixedStepOGD(Box.uniform(2, 2.0, 3.0), 0.1)
        assert learner.current_point() == sv({0: 2.0, 1: 2.0})

    def test_rejects_bad_rate(self):
        with pytest.raises(ConfigurationError):
            FixedStepOGD(Box.unit(1), 0.0)

    def test_rejects_non_finite_gradient(self):
        learner = FixedStepOGD(Box.unit(1), 0.1)
        with pytest.raises(ValueError):
            learner.update(SparseVector._wrap({0: math.inf}))


class TestAdaptiveGlobalOGD:
    def test_first_rate_frozen(self):
        # D = 1, |g| = 2: rate = D / sqrt(2 * 4) = 1 / (2 sqrt 2)
        learner = AdaptiveGlobalOGD(Box.unit(1), scale=1.0)
        learner.update(sv({0: 2.0}))
        assert learner.last_rate == pytest.approx(1.0 / (2.0 * math.sqrt(2.0)), rel=1e-15)

    def test_third_rate_frozen(self):
        # unit gradients: rate after t rounds = 1 / sqrt(2 t)
        learner = AdaptiveGlobalOGD(Box.unit(1), scale=1.0)
        for _ in range(3):
            learner.update(sv({0: -1.0}))
        assert learner.last_rate == pytest.approx(1.0 / math.sqrt(6.0), rel=1e-15)
        assert learner.grad_norm_sq_sum == 3.0

    def test_rate_includes_current_round(self):
        learner = AdaptiveGlobalOGD(Box.unit(1), scale=1.0)
        learner.update(sv({0: -1.0}))
        # the very first move already uses the incoming gradient in the sum
        assert learner.current_point() == sv({0: 1.0 / math.sqrt(2.0)})

    def test_zero_gradients_do_not_move(self):
        learner = AdaptiveGlobalOGD(Box.uniform(1, -1.0, 1.0), scale=1.0)
        learner.update(sv({}))
        assert learner.current_point() == sv({})
        assert learner.grad_norm_sq_sum == 0.0

    def test_estimated_diameter_grows_with_support(self):
        box = Box.unit(4)
        learner = AdaptiveGlobalOGD(box, scale=1.0, estimate_diameter=True)
        learner.update(sv({0: -1.0}))
        assert learner.last_rate == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
        learner.update(sv({1: -1.0, 2: -1.0}))
        # seen diameter sqrt(3), gradient power 3
        assert learner.last_rate == pytest.approx(math.sqrt(3.0) / math.sqrt(6.0), rel=1e-15)

    def test_scale_multiplies_rate(self):
        a = AdaptiveGlobalOGD(Box.unit(1), scale=1.0)
        b = AdaptiveGlobalOGD(Box.unit(1), scale=0.25)
        a.update(sv({0: -1.0}))
        b.update(sv({0: -1.0}))
        assert b.last_rate == pytest.approx(0.25 * a.last_rate, rel=1e-15)


class TestPerCoordinateOGD:
    def test_first_step_reaches_boundary(self):
        learner = PerCoordinateOGD(Box.unit(2), scale=1.0)
        learner.update(sv({0: -1.0}))
        assert learner.current_point() == sv({0: 1.0})
        assert learner.rate(0) == 1.0

    def test_rates_decouple_across_coordinates(self):
        learner = PerCoordinateOGD(Box.uniform(2, -2.0, 2.0), scale=1.0)
        learner.update(sv({0: -1.0}))
        learner.update(sv({0: -1.0, 1: -0.5}))
        sums = learner.gradient_sq_sums()
        assert sums[0] == 2.0
        assert sums[1] == 0.25
        # coordinate 1's first move uses only its own accumulator
        assert learner.rate(1) == pytest.approx(4.0 / 0.5, rel=1e-15)

    def test_untouched_coordinates_never_move(self):
        learner = PerCoordinateOGD(Box.uniform(3, -1.0, 1.0), scale=1.0)
        for _ in range(5):
            learner.update(sv({1: 0.3}))
        assert learner.current_point().support() == {1}

    def test_matches_independent_one_dim_runs(self):
        r = rng(9)
        lo = r.uniform(-2, 0, 3)
        box = Box(lo, lo + r.uniform(0.5, 3.0, 3))
        joint = PerCoordinateOGD(box, scale=0.7)
        singles = [PerCoordinateOGD(Box(lo[i:i + 1], box.upper_array()[i:i + 1]),
                                    scale=0.7) for i in range(3)]
        for _ in range(50):
            g = {i: float(r.normal()) for i in range(3) if r.random() < 0.6}
            joint.update(sv(g))
            for i, single in enumerate(singles):
                single.update(sv({0: g[i]}) if i in g else sv({}))
        for i, single in enumerate(singles):
            assert joint.point_entry(i) == single.point_entry(0)

    def test_one_dim_equals_global_with_sqrt_two_scale(self):
        # per-coordinate rate D/sqrt(s) vs global D/sqrt(2s): a sqrt(2)
        # scale on the global learner closes the gap in one dimension
        r = rng(13)
        box = Box.uniform(1, -1.5, 2.0)
        pc = PerCoordinateOGD(box, scale=1.0)
        gl = AdaptiveGlobalOGD(box, scale=math.sqrt(2.0))
        for _ in range(100):
            g = sv({0: float(r.normal())})
            pc.update(g)
            gl.update(g)
            assert pc.point_entry(0) == pytest.approx(gl.point_entry(0), rel=1e-12, abs=1e-12)


class TestStronglyConvexOGD:
    def test_inverse_strength_times_rounds(self):
        learner = StronglyConvexOGD(Box.uniform(1, -1.0, 1.0), 2.0)
        learner.update(sv({0: 1.0}))
        assert learner.current_point() == sv({0: -0.5})  # rate 1/(2*1)
        learner.update(sv({0: 1.0}))
        assert learner.current_point() == sv({0: -0.75})  # rate 1/(2*2)

    def test_inactive_rounds_do_not_advance_the_clock(self):
        learner = StronglyConvexOGD(Box.uniform(1, -1.0, 1.0), 2.0)
        learner.update(sv({0: 1.0}))
        learner.update(sv({}))
        learner.update(sv({0: 1.0}))
        assert learner.current_point() == sv({0: -0.75})

    def test_per_coordinate_strengths(self):
        learner = StronglyConvexOGD(Box.uniform(2, -5.0, 5.0), {0: 1.0, 1: 4.0})
        learner.update(sv({0: 1.0, 1: 1.0}))
        assert learner.point_entry(0) == -1.0
        assert learner.point_entry(1) == -0.25

    def test_missing_or_bad_strength_rejected(self):
        with pytest.raises(ConfigurationError):
            StronglyConvexOGD(Box.unit(1), 0.0)
        learner = StronglyConvexOGD(Box.unit(2), {0: 1.0})
        with pytest.raises(ConfigurationError):
            learner.update(sv({1: 1.0}))


class TestPassiveAggressive:
    def test_frozen_update(self):
        pa = PassiveAggressive()
        ex = Example(sv({0: -0.5}), 1.0)
        loss = pa.update_example(ex)
        assert loss == 1.0  # margin was 0
        assert pa.current_point() == sv({0: -2.0})  # step L/||f||^2 = 4
        assert pa.update_example(ex) == 0.0  # margin now exactly 1

    def test_no_update_when_margin_met(self):
        pa = PassiveAggressive()
        ex = Example(sv({1: 2.0}), 1.0)
        pa.update_example(ex)
        point = pa.current_point()
        assert pa.update_example(ex) == 0.0
        assert pa.current_point() == point

    def test_precomputed_margin_is_trusted(self):
        pa = PassiveAggressive()
        ex = Example(sv({0: 1.0}), 1.0)
        loss = pa.update_example(ex, margin=5.0)
        assert loss == 0.0
        assert not pa.current_point()

    def test_zero_feature_examples_skipped(self):
        pa = PassiveAggressive()
        loss = pa.update_example(Example(sv({}), 1.0))
        assert loss == 1.0
        assert pa.skipped_zero_features == 1
        assert not pa.current_point()


def linear_stream(r, n, t):
    out = []
    for _ in range(t):
        entries = {i: float(r.normal()) for i in range(n) if r.random() < 0.7}
        out.append(LinearLoss(sv(entries)))
    return out


class TestCompositeDecomposition:
    def test_linear_mode_equals_direct_per_coordinate(self):
        r = rng(21)
        box = Box.uniform(3, -1.0, 1.0)
        comp = CompositeDecomposition(box, per_coordinate_factory(1.0), mode="linear")
        direct = PerCoordinateOGD(box, scale=1.0)
        for f in linear_stream(r, 3, 60):
            x = comp.play()
            assert x == direct.current_point()
            comp.observe(f)
            direct.update(f.gradient)

    def test_surrogates_tight_at_played_point(self):
        r = rng(27)
        box = Box(np.array([-1.0, -1.0, 1.0]), np.array([1.0, 1.0, 1.0]))
        comp = CompositeDecomposition(box, per_coordinate_factory(0.5),
                                      mode="linear", bias_coord=2)
        theta = sv({0: 1.0, 1: -2.0})
        stream = [HingeLoss(Example(theta, 1.0 if r.random() < 0.5 else -1.0))
                  for _ in range(40)]
        for t, f in enumerate(stream):
            x = comp.play()
            comp.observe(f)
            assert comp.surrogate_total_at_played(t) == pytest.approx(
                f.value(x), rel=1e-12, abs=1e-12)

    def test_surrogates_lower_bound_losses_on_box(self):
        r = rng(33)
        box = Box(np.array([-1.0, -1.0, 1.0]), np.array([1.0, 1.0, 1.0]))
        comp = CompositeDecomposition(box, per_coordinate_factory(0.5),
                                      mode="linear", bias_coord=2)
        theta = sv({0: 0.5, 1: 1.5})
        stream = [HingeLoss(Example(theta, 1.0 if r.random() < 0.5 else -1.0))
                  for _ in range(30)]
        for f in stream:
            comp.play()
            comp.observe(f)
        for t, f in enumerate(stream):
            for _ in range(20):
                p = sv({0: float(r.uniform(-1, 1)), 1: float(r.uniform(-1, 1)), 2: 1.0})
                assert comp.surrogate_total_at(t, p) <= f.value(p) + 1e-9

    def test_regret_bounded_by_coordinate_regrets(self):
        r = rng(39)
        box = Box(np.array([-1.0, -1.0, 1.0]), np.array([1.0, 1.0, 1.0]))
        comp = CompositeDecomposition(box, per_coordinate_factory(0.5),
                                      mode="linear", bias_coord=2)
        theta = sv({0: 1.0, 1: -1.0})
        total = 0.0
        stream = [HingeLoss(Example(theta, 1.0 if r.random() < 0.5 else -1.0))
                  for _ in range(40)]
        for f in stream:
            x = comp.play()
            total += f.value(x)
            comp.observe(f)
        # grid comparator over the box (bias dimension is the single value 1)
        best = math.inf
        grid = np.linspace(-1.0, 1.0, 201)
        for a in grid:
            for b in grid:
                p = sv({0: float(a), 1: float(b), 2: 1.0})
                best = min(best, sum(f.value(p) for f in stream))
        regret = total - best
        coord_sum = sum(comp.coordinate_regret(i, grid_points=10_001) for i in range(3))
        assert regret <= coord_sum + 1e-6

    def test_bias_must_be_pinned(self):
        box = Box.uniform(2, -1.0, 1.0)
        with pytest.raises(ConfigurationError):
            CompositeDecomposition(box, per_coordinate_factory(1.0),
                                   mode="linear", bias_coord=1)

    def test_constant_without_bias_rejected(self):
        box = Box.uniform(1, -1.0, 1.0)
        comp = CompositeDecomposition(box, per_coordinate_factory(1.0), mode="linear")
        comp.play()
        with pytest.raises(ConfigurationError):
            comp.observe(HingeLoss(Example(sv({0: 1.0}), 1.0)))  # f(0) = 1 != 0

    def test_curved_mode_needs_strengths(self):
        box = Box.uniform(2, -1.0, 1.0)
        with pytest.raises(ConfigurationError):
            CompositeDecomposition(box, strongly_convex_factory({0: 1.0, 1: 1.0}),
                                   mode="curved")
