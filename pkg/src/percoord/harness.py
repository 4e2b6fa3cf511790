"""Experiment harness: run configuration, the four experiments, CSV reports.

Every experiment takes a RunConfig, produces one RegretLedger per algorithm
run, renders them through the fixed CSV schema (config echoed as a comment
header), and optionally writes a companion figure next to the CSV. The CSV
is the contract; figures are a convenience rendering of the same numbers.

Experiments:

  classify      progressive-validation hinge/mistake comparison of the
                adaptive-global, per-coordinate, and passive-aggressive
                learners on a shuffled, unit-scaled classification stream
                over [-R, R]^n (defaults R=100, scales 0.6/R and 0.2/R).
  logreg        one L2-regularized logistic pass over [-1, 1]^n (scale 0.1)
                for the global and per-coordinate learners, with regret
                measured against an iterated-descent static comparator.
  separation    the interleaved adversarial family at several sizes:
                best-fixed-rate descent (rate tuned on a log grid) against
                the per-coordinate learner, with log-log regret slopes.
  bounds-audit  randomized batteries checking measured regret against the
                analytic bound values, the golden-section/constant-rate
                agreement, bound dominance, and the prefix-sqrt inequality.

Progressive validation is structural here: each example is scored before
the learner sees it.
"""

import logging
import math
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import datasets
from .adversarial import bad_family, best_fixed_eta, run_per_coordinate
from .bounds import (
    RegretLedger,
    best_constant_rate_bound,
    dominance_check,
    golden_section_minimize,
    per_coordinate_bound,
    prefix_sqrt_inequality,
    rate_sequence_bound,
    static_optimum,
)
from .core import Box, SparseVector
from .data_io import parse_libsvm, shuffle, unit_scale, write_results_csv
from .engine import compile_stream, logistic_online, logistic_static_optimum
from .learners import AdaptiveGlobalOGD, PassiveAggressive, PerCoordinateOGD
from .losses import LinearLoss

__all__ = [
    "UsageError",
    "RunConfig",
    "ExperimentResult",
    "run_classify",
    "run_logreg",
    "run_separation",
    "run_bounds_audit",
    "run_experiment",
    "progressive_hinge_pass",
    "CheckResult",
    "AuditReport",
]

log = logging.getLogger("percoord")

_EMPTY = SparseVector._wrap({})

CLASSIFY_ALGORITHMS = ("global", "per-coord", "pa")
LOGREG_ALGORITHMS = ("global", "per-coord")


class UsageError(ValueError):
    """A run was configured in a way the harness cannot honor."""


@dataclass(frozen=True)
class RunConfig:
    """One experiment invocation. Fields left at None pick the experiment's
    standard defaults (resolved before running and echoed in the output)."""

    experiment: str
    dataset: str | None = None
    algorithms: tuple | None = None
    radius: float | None = None
    scale_per_coord: float | None = None
    scale_global: float | None = None
    lam: float = 1e-4
    seed: int = 7
    t0_list: tuple = (1_000, 10_000, 100_000)
    eta_grid: str = "1e-4:1:50"
    rounds: int = 100_000
    eps: float = 0.01
    unit_scale: bool | None = None
    figures: bool = True
    timing: bool = True
    max_passes: int = 200
    tol_rel: float = 1e-6
    stream_count: int = 500
    lemma_count: int = 10_000
    out: str | None = None

    def resolve(self):
        """Fill experiment-specific defaults; validates the experiment name."""
        exp = self.experiment
        if exp == "classify":
            r = 100.0 if self.radius is None else float(self.radius)
            return replace(
                self,
                dataset=self.dataset or "bundled:sentiment",
                algorithms=tuple(self.algorithms) if self.algorithms else CLASSIFY_ALGORITHMS,
                radius=r,
                scale_per_coord=0.6 / r if self.scale_per_coord is None else self.scale_per_coord,
                scale_global=0.2 / r if self.scale_global is None else self.scale_global,
                unit_scale=True if self.unit_scale is None else self.unit_scale,
            )
        if exp == "logreg":
            r = 1.0 if self.radius is None else float(self.radius)
            return replace(
                self,
                dataset=self.dataset or "synthetic:ctr",
                algorithms=tuple(self.algorithms) if self.algorithms else LOGREG_ALGORITHMS,
                radius=r,
                scale_per_coord=0.1 if self.scale_per_coord is None else self.scale_per_coord,
                scale_global=0.1 if self.scale_global is None else self.scale_global,
                unit_scale=False if self.unit_scale is None else self.unit_scale,
            )
        if exp in ("separation", "bounds-audit"):
            return replace(
                self,
                algorithms=tuple(self.algorithms) if self.algorithms else (),
                unit_scale=False if self.unit_scale is None else self.unit_scale,
            )
        raise UsageError(f"unknown experiment {exp!r}")

    def echo_items(self):
        """Ordered (key, value) pairs for the CSV header block."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append((f.name, v))
        return out


@dataclass
class ExperimentResult:
    ledgers: list
    csv_text: str | None
    exit_code: int
    extras: dict = field(default_factory=dict)
    figure_paths: list = field(default_factory=list)
    out_path: str | None = None


def _load_dataset(cfg):
    spec = cfg.dataset
    if not spec:
        raise UsageError("a dataset path or synthetic spec is required")
    if spec == "bundled:sentiment":
        return datasets.bundled_sentiment()
    if spec == "synthetic:ctr":
        if cfg.rounds < 1:
            raise UsageError("synthetic stream needs at least one round")
        return datasets.synthetic_ctr(n_examples=cfg.rounds, seed=cfg.seed)
    if spec == "synthetic:sentiment":
        return datasets.synthetic_sentiment(seed=cfg.seed)
    if spec.startswith("synthetic:") or spec.startswith("bundled:"):
        raise UsageError(f"unknown dataset spec {spec!r}")
    try:
        return parse_libsvm(spec)
    except FileNotFoundError:
        raise UsageError(f"dataset file not found: {spec}") from None


def _wall_ms(cfg, started):
    if not cfg.timing:
        return None
    return (time.perf_counter() - started) * 1000.0


def _emit(cfg, ledgers, extras=None, render=None):
    """Render CSV, write files, return the assembled result."""
    items = cfg.echo_items()
    if extras:
        items.extend(extras)
    csv_text = write_results_csv(ledgers, items)
    figure_paths = []
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        log.info("wrote %s", cfg.out)
        if cfg.figures and render is not None:
            from . import figures

            path = figures.companion_path(cfg.out)
            render(path)
            figure_paths.append(path)
            log.info("wrote %s", path)
    return csv_text, figure_paths


def progressive_hinge_pass(driver, examples, ledger=None):
    """Score-then-train pass; returns (avg hinge loss, mistake fraction).

    driver must expose predict_margin(features) and learn(example, margin);
    the margin is computed before learn() is called for that example, which
    is what makes the reported numbers progressive validation.
    """
    examples = list(examples)
    if not examples:
        raise UsageError("empty example stream")
    hinge_sum = 0.0
    mistakes = 0
    for ex in examples:
        m = driver.predict_margin(ex.features)
        hinge = max(0.0, 1.0 - ex.label * m)
        hinge_sum += hinge
        predicted = 1.0 if m > 0.0 else (-1.0 if m < 0.0 else 0.0)
        if predicted != ex.label:  # zero margins count as mistakes
            mistakes += 1
        if ledger is not None:
            ledger.record(hinge)
        driver.learn(ex, m)
    n = len(examples)
    return hinge_sum / n, mistakes / n


class _OgdHingeDriver:
    def __init__(self, learner):
        self.learner = learner

    def predict_margin(self, features):
        return self.learner.margin(features)

    def learn(self, example, margin):
        y = example.label
        g = example.features.scaled(-y) if y * margin < 1.0 else _EMPTY
        self.learner.update(g)


class _PassiveAggressiveDriver:
    def __init__(self, learner):
        self.learner = learner

    def predict_margin(self, features):
        return self.learner.margin(features)

    def learn(self, example, margin):
        self.learner.update_example(example, margin=margin)


def _classify_driver(algo, box, cfg):
    if algo == "global":
        learner = AdaptiveGlobalOGD(box, scale=cfg.scale_global, estimate_diameter=True)
        return _OgdHingeDriver(learner), cfg.scale_global, cfg.radius
    if algo == "per-coord":
        learner = PerCoordinateOGD(box, scale=cfg.scale_per_coord)
        return _OgdHingeDriver(learner), cfg.scale_per_coord, cfg.radius
    if algo == "pa":
        return _PassiveAggressiveDriver(PassiveAggressive()), None, None
    raise UsageError(f"unknown classify algorithm {algo!r} "
                     f"(expected one of {', '.join(CLASSIFY_ALGORITHMS)})")


def run_classify(config):
    """Hinge-loss / mistake comparison under progressive validation."""
    cfg = config.resolve()
    if not cfg.algorithms:
        raise UsageError("no algorithms requested")
    ds = _load_dataset(cfg)
    if cfg.unit_scale:
        ds = unit_scale(ds)
    ds = shuffle(ds, cfg.seed)
    box = Box.symmetric(ds.n_features, cfg.radius)
    ledgers = []
    for algo in cfg.algorithms:
        driver, scale_factor, radius = _classify_driver(algo, box, cfg)
        started = time.perf_counter()
        ledger = RegretLedger(algorithm=algo, dataset=ds.name, log_gradients=False)
        avg_hinge, mistake_fraction = progressive_hinge_pass(driver, ds.examples, ledger)
        ledger.avg_hinge_loss = avg_hinge
        ledger.mistake_fraction = mistake_fraction
        ledger.mark_no_comparator()
        ledger.wall_ms = _wall_ms(cfg, started)
        ledger.config = {
            "scale_factor": scale_factor,
            "R": radius,
            "lambda": None,
            "seed": cfg.seed,
        }
        ledgers.append(ledger)
        log.info("classify %s: hinge=%.4f mistakes=%.4f", algo, avg_hinge, mistake_fraction)
    extras = [("dataset_examples", ds.count), ("dataset_features", ds.n_features)]

    def render(path):
        from . import figures

        figures.render_classify(ledgers, path, title=ds.name)

    csv_text, figure_paths = _emit(cfg, ledgers, extras, render)
    return ExperimentResult(ledgers, csv_text, 0, {"dataset": ds},
                            figure_paths, cfg.out)


def run_logreg(config):
    """Regularized logistic pass with a static regret comparator."""
    cfg = config.resolve()
    if not cfg.algorithms:
        raise UsageError("no algorithms requested")
    for algo in cfg.algorithms:
        if algo not in LOGREG_ALGORITHMS:
            raise UsageError(f"unknown logreg algorithm {algo!r} "
                             f"(expected one of {', '.join(LOGREG_ALGORITHMS)})")
    if cfg.lam < 0:
        raise UsageError("lambda must be non-negative")
    ds = _load_dataset(cfg)
    if cfg.unit_scale:
        ds = unit_scale(ds)
    ds = shuffle(ds, cfg.seed)
    stream = compile_stream(ds.examples, ds.n_features)
    ledgers = []
    for algo in cfg.algorithms:
        scale = cfg.scale_global if algo == "global" else cfg.scale_per_coord
        started = time.perf_counter()
        result = logistic_online(
            stream, algo, half_width=cfg.radius, scale=scale, lam=cfg.lam,
            estimate_diameter=True,
        )
        ledger = RegretLedger(algorithm=algo, dataset=ds.name, log_gradients=False)
        ledger.set_totals(result.cumulative_loss, stream.count)
        ledger.wall_ms = _wall_ms(cfg, started)
        ledger.config = {
            "scale_factor": scale,
            "R": cfg.radius,
            "lambda": cfg.lam,
            "seed": cfg.seed,
        }
        ledgers.append(ledger)
        log.info("logreg %s: cumulative loss %.2f", algo, result.cumulative_loss)
    comparator = logistic_static_optimum(
        stream, half_width=cfg.radius, scale=cfg.scale_per_coord, lam=cfg.lam,
        tol_rel=cfg.tol_rel, max_passes=cfg.max_passes,
    )
    log.info("logreg comparator: loss %.2f converged=%s after %d passes",
             comparator.loss, comparator.converged, comparator.passes)
    for ledger in ledgers:
        ledger.resolve(comparator.loss, comparator.converged)
    extras = [
        ("dataset_examples", ds.count),
        ("dataset_features", ds.n_features),
        ("comparator_passes", comparator.passes),
    ]

    def render(path):
        from . import figures

        figures.render_logreg(ledgers, path, title=ds.name)

    csv_text, figure_paths = _emit(cfg, ledgers, extras, render)
    exit_code = 0 if comparator.converged else 1
    if not comparator.converged:
        log.error("comparator did not converge within %d passes", cfg.max_passes)
    return ExperimentResult(ledgers, csv_text, exit_code,
                            {"comparator": comparator}, figure_paths, cfg.out)


def _parse_eta_grid(spec):
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise UsageError("eta grid spec must be lo:hi:num")
    try:
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad eta grid spec {spec!r}") from None
    if not (0 < lo < hi) or num < 1:
        raise UsageError("eta grid needs 0 < lo < hi and at least one point")
    return np.logspace(math.log10(lo), math.log10(hi), num)


def _loglog_slope(sizes, regrets):
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(regrets, dtype=float))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def run_separation(config):
    """Adversarial-family comparison of tuned-constant vs per-coordinate rates."""
    cfg = config.resolve()
    if not cfg.t0_list:
        raise UsageError("need at least one oscillation length")
    for t0 in cfg.t0_list:
        if int(t0) < 8:
            raise UsageError("oscillation lengths below 8 rounds are not meaningful")
    if not (0.0 < cfg.eps < 1.0):
        raise UsageError("eps must lie strictly inside (0, 1)")
    etas = _parse_eta_grid(cfg.eta_grid)
    ledgers = []
    per_algo = {"global-best-fixed": [], "per-coord": []}
    instances = []
    for t0 in cfg.t0_list:
        instance = bad_family(int(t0), cfg.eps)
        instances.append(instance)
        comparator = instance.comparator_loss()
        name = f"bad-family-t0-{int(t0)}"

        started = time.perf_counter()
        best = best_fixed_eta(instance, etas)
        ledger = RegretLedger(algorithm="global-best-fixed", dataset=name,
                              log_gradients=False)
        ledger.set_totals(best.regret + comparator, instance.total_rounds)
        ledger.resolve(comparator, converged=True)
        ledger.wall_ms = _wall_ms(cfg, started)
        # scale_factor holds the grid-tuned constant rate for these rows
        ledger.config = {"scale_factor": best.eta, "R": None, "lambda": None,
                         "seed": cfg.seed}
        ledgers.append(ledger)
        per_algo["global-best-fixed"].append((instance, best))

        started = time.perf_counter()
        total, pc_ledger = run_per_coordinate(instance, scale=1.0)
        pc_ledger.dataset = name
        pc_ledger.wall_ms = _wall_ms(cfg, started)
        pc_ledger.config = {"scale_factor": 1.0, "R": None, "lambda": None,
                            "seed": cfg.seed}
        pc_ledger.compute_bounds(instance.box())
        ledgers.append(pc_ledger)
        per_algo["per-coord"].append((instance, pc_ledger))
        log.info("separation t0=%d: tuned-constant regret %.1f (eta*=%.4g), "
                 "per-coord regret %.1f", t0, best.regret, best.eta,
                 pc_ledger.regret)

    slopes = {}
    if len(cfg.t0_list) >= 3:
        sizes = [inst.total_rounds for inst in instances]
        slopes["global-best-fixed"] = _loglog_slope(
            sizes, [b.regret for _, b in per_algo["global-best-fixed"]])
        slopes["per-coord"] = _loglog_slope(
            sizes, [l.regret for _, l in per_algo["per-coord"]])
        log.info("separation slopes: %s", slopes)
    extras = [(f"slope_{k}", v) for k, v in sorted(slopes.items())]

    def render(path):
        from . import figures

        figures.render_separation(ledgers, slopes, path)

    csv_text, figure_paths = _emit(cfg, ledgers, extras, render)
    return ExperimentResult(ledgers, csv_text, 0,
                            {"slopes": slopes, "instances": instances,
                             "per_algo": per_algo},
                            figure_paths, cfg.out)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    counterexample: str | None = None

    def render(self):
        line = f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"
        if self.counterexample:
            line += f"\n  counterexample: {self.counterexample}"
        return line


@dataclass
class AuditReport:
    checks: list
    seed: int
    scatter: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def render(self):
        lines = [c.render() for c in self.checks]
        lines.append(f"{'PASS' if self.all_passed else 'FAIL'} overall "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks, "
                     f"seed {self.seed})")
        return "\n".join(lines) + "\n"


def _random_box(rng, n):
    if rng.random() < 0.5:
        lo = float(rng.uniform(-5.0, 5.0))
        return Box.uniform(n, lo, lo + float(rng.uniform(0.1, 10.0)))
    lo = rng.uniform(-5.0, 5.0, size=n)
    return Box(lo, lo + rng.uniform(0.1, 10.0, size=n))


def random_linear_stream(rng):
    """One random audit stream: (box, list of LinearLoss)."""
    while True:
        n = int(rng.integers(1, 9))
        t = int(rng.integers(1, 201))
        box = _random_box(rng, n)
        density = float(rng.uniform(0.3, 1.0))
        grads = []
        any_nonzero = False
        for _ in range(t):
            mask = rng.random(n) < density
            vals = rng.normal(0.0, 1.0, size=n) * mask
            g = SparseVector._wrap({i: float(v) for i, v in enumerate(vals) if v != 0.0})
            any_nonzero = any_nonzero or bool(g)
            grads.append(g)
        if any_nonzero:
            return box, [LinearLoss(g) for g in grads]


def _run_learner_on_linear(learner, losses):
    ledger = RegretLedger(log_gradients=True)
    for f in losses:
        x = learner.current_point()
        g = f.gradient
        ledger.record(f.value(x), g)
        learner.update(g)
    return ledger


def run_bounds_audit(config):
    """Randomized verification battery; returns (AuditReport, ExperimentResult)."""
    cfg = config.resolve()
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    checks = []
    scatter = {"global": [], "per-coord": []}

    # Prefix-sqrt inequality battery.
    started = time.perf_counter()
    worst_gap = -math.inf
    bad = None
    for _ in range(cfg.lemma_count):
        length = int(rng.integers(1, 101))
        xs = 10.0 ** rng.uniform(-6.0, 6.0, size=length)
        lhs, rhs = prefix_sqrt_inequality(xs)
        gap = lhs - rhs * (1.0 + 1e-9)
        if gap > worst_gap:
            worst_gap = gap
            if gap > 0:
                bad = f"lhs={lhs!r} rhs={rhs!r} xs={xs.tolist()!r}"
    elapsed = time.perf_counter() - started
    checks.append(CheckResult(
        "prefix-sqrt-inequality", bad is None,
        f"{cfg.lemma_count} sequences, worst slack {worst_gap:.3e}", bad))
    checks.append(CheckResult(
        "prefix-sqrt-runtime", elapsed < 1.0, f"{elapsed:.3f}s for the battery"))

    # Learner-vs-bound batteries on shared random linear streams.
    tol = 1e-6
    global_bad = golden_bad = percoord_bad = dominance_bad = None
    max_global_gap = max_pc_gap = -math.inf
    for k in range(cfg.stream_count):
        box, losses = random_linear_stream(rng)
        norms_sq = [f.gradient.norm_sq() for f in losses]
        comparator = static_optimum(losses, box, "closed-form")

        ledger_g = _run_learner_on_linear(AdaptiveGlobalOGD(box, scale=1.0), losses)
        regret_g = ledger_g.cumulative_loss - comparator.loss
        r_min, adaptive = best_constant_rate_bound(box.total_diameter(), norms_sq)
        gap = regret_g - (adaptive + tol)
        max_global_gap = max(max_global_gap, gap)
        if gap > 0 and global_bad is None:
            global_bad = f"stream {k}: regret={regret_g!r} bound={adaptive!r}"
        scatter["global"].append((adaptive, regret_g))

        # Golden-section over constant rates must recover the closed form.
        total_sq = sum(norms_sq)
        d = box.total_diameter()

        def objective(u, _d=d, _s=total_sq):
            eta = math.exp(u)
            return _d * _d / (2.0 * eta) + 0.5 * _s * eta

        _, found = golden_section_minimize(objective, math.log(1e-9), math.log(1e9))
        if abs(found - r_min) > 1e-6 * max(r_min, 1e-12) and golden_bad is None:
            golden_bad = f"stream {k}: golden={found!r} r_min={r_min!r}"

        ledger_p = _run_learner_on_linear(PerCoordinateOGD(box, scale=1.0), losses)
        regret_p = ledger_p.cumulative_loss - comparator.loss
        pc_bound, _ = per_coordinate_bound(box, ledger_p.gradients)
        gap = regret_p - (pc_bound + tol)
        max_pc_gap = max(max_pc_gap, gap)
        if gap > 0 and percoord_bad is None:
            percoord_bad = f"stream {k}: regret={regret_p!r} bound={pc_bound!r}"
        scatter["per-coord"].append((pc_bound, regret_p))

        lhs, rhs, ok = dominance_check(box, ledger_p.gradients)
        if not ok and dominance_bad is None:
            dominance_bad = f"stream {k}: lhs={lhs!r} rhs={rhs!r}"

    checks.append(CheckResult(
        "global-rate-regret-bound", global_bad is None,
        f"{cfg.stream_count} streams, worst regret-minus-bound {max_global_gap:.3e}",
        global_bad))
    checks.append(CheckResult(
        "golden-section-constant-rate", golden_bad is None,
        f"{cfg.stream_count} streams within 1e-6 relative", golden_bad))
    checks.append(CheckResult(
        "per-coordinate-regret-bound", percoord_bad is None,
        f"{cfg.stream_count} streams, worst regret-minus-bound {max_pc_gap:.3e}",
        percoord_bad))
    checks.append(CheckResult(
        "bound-dominance", dominance_bad is None,
        f"per-coordinate bound <= global bound on all {cfg.stream_count} streams",
        dominance_bad))

    report = AuditReport(checks, cfg.seed, scatter)
    text = report.render()
    figure_paths = []
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", cfg.out)
        if cfg.figures:
            from . import figures

            path = figures.companion_path(cfg.out)
            figures.render_audit(report, path)
            figure_paths.append(path)
            log.info("wrote %s", path)
    exit_code = 0 if report.all_passed else 1
    result = ExperimentResult([], text, exit_code, {"report": report},
                              figure_paths, cfg.out)
    return report, result


def run_experiment(config):
    """Dispatch on config.experiment; returns an ExperimentResult."""
    exp = config.experiment
    if exp == "classify":
        return run_classify(config)
    if exp == "logreg":
        return run_logreg(config)
    if exp == "separation":
        return run_separation(config)
    if exp == "bounds-audit":
        return run_bounds_audit(config)[1]
    raise UsageError(f"unknown experiment {exp!r}")
