"""Acceptance suite: one test per shipping criterion.

Each test checks its criterion at the stated tolerance and prints one
summary line (visible with -s, or in captured output on failure); the
pytest -v report gives the per-criterion pass/fail lines. The full module
takes a few minutes; the regularized-logistic reproduction dominates.
"""

import math
import time

import numpy as np
import pytest

from percoord.adversarial import bad_family, regret_floor
from percoord.bounds import (
    best_constant_rate_bound,
    box_grid_points,
    dominance_check,
    golden_section_minimize,
    per_coordinate_bound,
    prefix_sqrt_inequality,
    static_optimum,
)
from percoord.core import Box, Example, SparseVector, project
from percoord.datasets import bundled_sentiment, synthetic_ctr
from percoord.data_io import parse_libsvm_text, serialize_libsvm
from percoord.harness import RunConfig, random_linear_stream, run_classify, \
    run_logreg, run_separation
from percoord.learners import (
    AdaptiveGlobalOGD,
    CompositeDecomposition,
    FixedStepOGD,
    PerCoordinateOGD,
    strongly_convex_factory,
)
from percoord.losses import ConvexQuadratic, LogisticLoss


def rng(seed):
    return np.random.Generator(np.random.Philox(key=seed))


@pytest.fixture(scope="module")
def linear_battery():
    """500 shared random linear streams with both learners' regrets."""
    r = rng(20240601)
    records = []
    for _ in range(500):
        box, losses = random_linear_stream(r)
        comparator = static_optimum(losses, box, "closed-form").loss
        norms_sq = [f.gradient.norm_sq() for f in losses]

        out = {}
        for name, learner in (
            ("global", AdaptiveGlobalOGD(box, scale=1.0)),
            ("per-coord", PerCoordinateOGD(box, scale=1.0)),
        ):
            total = 0.0
            gradients = []
            for f in losses:
                total += f.value(learner.current_point())
                gradients.append(f.gradient)
                learner.update(f.gradient)
            out[name] = (total - comparator, gradients)
        records.append((box, norms_sq, out))
    return records


def test_criterion_1_prefix_sqrt_battery():
    r = rng(101)
    started = time.perf_counter()
    checked = 0
    for _ in range(10_000):
        length = int(r.integers(1, 101))
        xs = 10.0 ** r.uniform(-6.0, 6.0, size=length)
        lhs, rhs = prefix_sqrt_inequality(xs)
        assert lhs <= rhs * (1.0 + 1e-9)
        checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"battery took {elapsed:.3f}s"
    print(f"criterion 1 PASS: {checked} sequences in {elapsed:.3f}s")


def test_criterion_2_global_rate_bound_and_optimal_constant(linear_battery):
    worst = -math.inf
    for box, norms_sq, out in linear_battery:
        regret, _ = out["global"]
        d = box.total_diameter()
        r_min, adaptive = best_constant_rate_bound(d, norms_sq)
        assert regret <= adaptive + 1e-6
        worst = max(worst, regret - adaptive)

        total_sq = sum(norms_sq)

        def objective(u, _d=d, _s=total_sq):
            eta = math.exp(u)
            return _d * _d / (2.0 * eta) + 0.5 * _s * eta

        _, found = golden_section_minimize(objective, math.log(1e-9), math.log(1e9))
        assert found == pytest.approx(r_min, rel=1e-6)
    print(f"criterion 2 PASS: 500 streams, worst regret-minus-bound {worst:.3e}")


def test_criterion_3_per_coordinate_bound_and_dominance(linear_battery):
    worst = -math.inf
    for box, _, out in linear_battery:
        regret, gradients = out["per-coord"]
        bound, _ = per_coordinate_bound(box, gradients)
        assert regret <= bound + 1e-6
        worst = max(worst, regret - bound)
        lhs, rhs, ok = dominance_check(box, gradients)
        assert ok, (lhs, rhs)
    print(f"criterion 3 PASS: 500 streams, worst regret-minus-bound {worst:.3e}")


def test_criterion_4_exact_oscillation_and_ramp_traces():
    # oscillation: unit slope, kink at 0.01, fixed rate 0.5 on [0, 1]
    from percoord.adversarial import oscillation_stream, ramp_stream

    learner = FixedStepOGD(Box.unit(1), 0.5)
    total = 0.0
    comparator = 0.0
    kink = SparseVector({0: 0.01})
    for f in oscillation_stream(1.0, 0.01, 1000):
        x = learner.current_point()
        total += f.value(x)
        comparator += f.value(kink)
        learner.update(f.subgradient(x))
    assert abs(total - 250.0) <= 1e-9
    assert comparator == 0.0

    eta = 1.0 / 64.0
    learner = FixedStepOGD(Box.unit(1), eta)
    for t, f in enumerate(ramp_stream(1.0, 100), start=1):
        expected = min(1.0, (t - 1) * eta)
        assert learner.point_entry(0) == expected  # exact, dyadic rate
        learner.update(f.subgradient(learner.current_point()))
    print("criterion 4 PASS: oscillation total 250 exactly; ramp trace exact for 100 rounds")


def test_criterion_5_separation_slopes_and_floor():
    result = run_separation(RunConfig(experiment="separation", figures=False,
                                      timing=False))
    slopes = result.extras["slopes"]
    assert slopes["global-best-fixed"] >= 0.60
    assert slopes["per-coord"] <= 0.55
    for instance, best in result.extras["per_algo"]["global-best-fixed"]:
        floor = regret_floor(instance, best.eta)
        assert best.regret >= 0.9 * floor
    print(f"criterion 5 PASS: slopes {slopes['global-best-fixed']:.3f} vs "
          f"{slopes['per-coord']:.3f}, tuned regret >= 0.9x floor on all sizes")


def test_criterion_6_composite_regret_within_coordinate_sum():
    r = rng(606)
    worst = -math.inf
    for stream_idx in range(100):
        n = int(r.integers(1, 4))
        t = int(r.integers(1, 51))
        box = Box.uniform(n, -1.0, 1.0)
        strengths = r.uniform(0.3, 2.0, size=n)
        quadratics = []
        for _ in range(t):
            a = r.normal(size=(n, n)) * float(r.uniform(0.2, 1.0))
            q = r.normal(size=n) * float(r.uniform(0.5, 2.0))
            c = float(r.normal())
            quadratics.append(
                ConvexQuadratic(a.T @ a + np.diag(strengths), q, c,
                                curvature=strengths))

        comp = CompositeDecomposition(
            box, strongly_convex_factory(strengths), mode="curved",
            strengths=strengths)
        total = 0.0
        for f in quadratics:
            comp.play()
            total += comp.observe(f)

        # grid oracle for the joint comparator: the stream's sum is itself
        # one quadratic, evaluated over a ~1e5-point lattice
        summed = ConvexQuadratic(
            sum(f.Q for f in quadratics),
            sum(f.q for f in quadratics),
            sum(f.c for f in quadratics),
        )
        grid = box_grid_points(box, total_points=100_000)
        if stream_idx < 3:  # pin the coefficient-sum shortcut to literal sums
            sample = grid[:: max(1, len(grid) // 5)]
            literal = np.sum([f.value_on_points(sample) for f in quadratics], axis=0)
            assert np.allclose(summed.value_on_points(sample), literal, rtol=1e-9)
        regret = total - float(summed.value_on_points(grid).min())

        coord_sum = sum(comp.coordinate_regret(i, grid_points=100_000)
                        for i in range(n))
        assert regret <= coord_sum + 1e-6
        worst = max(worst, regret - coord_sum)
    print(f"criterion 6 PASS: 100 quadratic streams, worst composite-minus-sum {worst:.3e}")


def test_criterion_7_classification_orderings():
    lines = []
    for seed in (1, 2, 3):
        result = run_classify(RunConfig(experiment="classify", seed=seed,
                                        figures=False, timing=False))
        stats = {l.algorithm: l for l in result.ledgers}
        assert stats["per-coord"].avg_hinge_loss < stats["global"].avg_hinge_loss
        lines.append(stats["per-coord"].mistake_fraction
                     <= stats["pa"].mistake_fraction)
        assert result.ledgers[0].rounds >= 2000
    assert sum(lines) >= 2
    print(f"criterion 7 PASS: per-coord wins hinge loss on 3/3 seeds, "
          f"mistakes <= pa on {sum(lines)}/3")


def test_criterion_8_ctr_regret_gap():
    result = run_logreg(RunConfig(experiment="logreg", figures=False, timing=False))
    comp = result.extras["comparator"]
    assert comp.converged
    stats = {l.algorithm: l.regret_per_round for l in result.ledgers}
    assert stats["per-coord"] <= stats["global"] / 3.0
    for ledger in result.ledgers:
        assert ledger.comparator_converged is True
    print(f"criterion 8 PASS: per-round regret {stats['per-coord']:.5f} vs "
          f"{stats['global']:.5f} (ratio {stats['per-coord'] / stats['global']:.3f})")


def test_criterion_9_numerical_hygiene():
    # logistic subgradient vs central differences at 100 random points
    r = rng(909)
    for _ in range(100):
        n = int(r.integers(1, 7))
        theta = SparseVector({i: float(r.normal()) for i in range(n)
                              if r.random() < 0.8})
        y = 1.0 if r.random() < 0.5 else -1.0
        lam = float(r.uniform(0, 0.5)) if r.random() < 0.7 else 0.0
        f = LogisticLoss(Example(theta, y), lam=lam)
        x = {i: float(r.normal()) for i in range(n)}
        g = f.subgradient(SparseVector(x))
        h = 1e-6
        for i in range(n):
            hi, lo = dict(x), dict(x)
            hi[i] = x[i] + h
            lo[i] = x[i] - h
            fd = (f.value(SparseVector(hi)) - f.value(SparseVector(lo))) / (2 * h)
            assert g.get(i) == pytest.approx(fd, rel=1e-5, abs=1e-8)

    # projection idempotence and contraction on 1000 random pairs
    for _ in range(1000):
        n = int(r.integers(1, 6))
        lo = r.uniform(-3, 3, n)
        box = Box(lo, lo + r.uniform(0.05, 5.0, n))
        a = r.normal(0, 3, n)
        b = r.normal(0, 3, n)
        pa = project(SparseVector.from_dense(a), box).to_dense(n)
        pb = project(SparseVector.from_dense(b), box).to_dense(n)
        assert np.array_equal(
            project(SparseVector.from_dense(pa), box).to_dense(n), pa)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12

    # parse/serialize round-trip identity on the bundled data
    for ds in (bundled_sentiment(), synthetic_ctr(n_examples=2000, seed=7)):
        text = serialize_libsvm(ds)
        back = parse_libsvm_text(text)
        assert back.examples == ds.examples
        assert serialize_libsvm(back) == text
    print("criterion 9 PASS: finite differences, projection laws, round trips")
