"""Synthetic loss streams that separate global from per-coordinate rates.

Two one-dimensional primitives and their interleaving:

  oscillation_stream   T copies of |x - eps| (unit slope) on one coordinate
                       of [0, 1]. A constant rate eta with eps < eta <= 1
                       drives gradient descent from 0 into a two-cycle
                       {0, eta} costing eta/2 per round, so total loss is
                       (T/2) * eta while the comparator at eps pays nothing.
                       Large rates are expensive here.

  ramp_stream          T copies of the linear loss -x on one coordinate of
                       [0, 1]. Descent climbs by eta per round, so roughly
                       the first 1/eta rounds each give up order-1 regret
                       against the comparator at 1. Small rates are
                       expensive here.

  bad_family           one oscillation subproblem of length T0 on the first
                       coordinate followed by C fresh ramp subproblems of
                       length T1 each on its own coordinate, with
                       C = T1 = floor(T0^(1/3)). Any single non-increasing
                       rate sequence loses ~T^(2/3) total; per-coordinate
                       rates keep it at ~sqrt(T).

Gradients have unit scale and exactly one nonzero component per round, so
regret decomposes exactly across subproblems and the best fixed point is
closed-form: eps on the oscillation coordinate, 1 on every ramp coordinate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bounds import RegretLedger
from .core import Box
from .learners import PerCoordinateOGD
from .losses import AbsoluteLoss, LinearLoss

__all__ = [
    "integer_cbrt",
    "oscillation_stream",
    "ramp_stream",
    "BadFamilyInstance",
    "bad_family",
    "default_eta_grid",
    "run_fixed_rate",
    "run_per_coordinate",
    "regret_floor",
    "BestFixedRate",
    "best_fixed_eta",
]


def integer_cbrt(n):
    """Exact floor of the cube root of a non-negative integer."""
    if n < 0:
        raise ValueError("need a non-negative integer")
    c = round(n ** (1.0 / 3.0))
    while c > 0 and c * c * c > n:
        c -= 1
    while (c + 1) ** 3 <= n:
        c += 1
    return c


def oscillation_stream(scale, center, rounds, coord=0):
    """rounds copies of scale * |x_coord - center|."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    loss = AbsoluteLoss(scale, center, coord)
    return [loss] * int(rounds)


def ramp_stream(scale, rounds, coord=0):
    """rounds copies of the linear pull -scale * x_coord."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")
    loss = LinearLoss({coord: -scale})
    return [loss] * int(rounds)


@dataclass(frozen=True)
class BadFamilyInstance:
    """An interleaved oscillation + ramps stream on [0, 1]^(1 + ramp_count)."""

    oscillation_rounds: int
    ramp_count: int
    ramp_rounds: int
    eps: float

    @property
    def total_rounds(self):
        return self.oscillation_rounds + self.ramp_count * self.ramp_rounds

    @property
    def dimension(self):
        return 1 + self.ramp_count

    def box(self):
        return Box.unit(self.dimension)

    def ramp_coordinate(self, t):
        """Coordinate targeted by 1-based round t of the ramp phase.

        Round t belongs to block ceil((t - T0) / T1); block b occupies
        coordinate b (the oscillation owns coordinate 0).
        """
        if t <= self.oscillation_rounds:
            raise ValueError("round is in the oscillation phase")
        if t > self.total_rounds:
            raise ValueError("round is past the end of the stream")
        return 1 + (t - self.oscillation_rounds - 1) // self.ramp_rounds

    def losses(self):
        """The full stream, in round order."""
        osc = AbsoluteLoss(1.0, self.eps, 0)
        for _ in range(self.oscillation_rounds):
            yield osc
        for block in range(1, self.ramp_count + 1):
            ramp = LinearLoss({block: -1.0})
            for _ in range(self.ramp_rounds):
                yield ramp

    def comparator_loss(self):
        """Loss of the best fixed point: eps on the oscillation coordinate
        (zero loss) and 1 on each ramp coordinate (-T1 per block)."""
        return -float(self.ramp_count * self.ramp_rounds)

    def describe(self):
        return {
            "oscillation_rounds": self.oscillation_rounds,
            "ramp_count": self.ramp_count,
            "ramp_rounds": self.ramp_rounds,
            "eps": self.eps,
            "total_rounds": self.total_rounds,
            "dimension": self.dimension,
        }


def bad_family(oscillation_rounds, eps=0.01):
    """Standard instance: C = T1 = floor(T0^(1/3)) fresh ramp subproblems."""
    t0 = int(oscillation_rounds)
    if t0 < 8:
        raise ValueError("need at least 8 oscillation rounds (so at least 2 ramps)")
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie strictly inside (0, 1)")
    c = integer_cbrt(t0)
    return BadFamilyInstance(t0, c, c, float(eps))


def default_eta_grid(lo=1e-4, hi=1.0, num=50):
    """Log-spaced rate grid for best-fixed-rate tuning."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if num < 1:
        raise ValueError("need at least one grid point")
    return np.logspace(math.log10(lo), math.log10(hi), int(num))


def run_fixed_rate(instance, eta):
    """Total loss of constant-rate projected descent over the instance.

    Scalar fast path: every round touches exactly one coordinate of [0, 1],
    so the full learner state is one float at a time. Matches FixedStepOGD
    on the generic stream exactly (same updates in the same order).
    """
    eta = float(eta)
    if eta <= 0:
        raise ValueError("eta must be positive")
    eps = instance.eps
    total = 0.0
    x = 0.0
    for _ in range(instance.oscillation_rounds):
        total += abs(x - eps)
        if x < eps:
            x = min(1.0, x + eta)  # subgradient -1
        elif x > eps:
            x = max(0.0, x - eta)  # subgradient +1
        # at the kink the subgradient is 0: stay
    for _ in range(instance.ramp_count):
        x = 0.0
        for _ in range(instance.ramp_rounds):
            total += -x
            x = min(1.0, x + eta)  # subgradient -1
    return total


def run_per_coordinate(instance, scale=1.0):
    """(total loss, ledger) of the per-coordinate learner over the instance."""
    learner = PerCoordinateOGD(instance.box(), scale=scale)
    ledger = RegretLedger(algorithm="per-coord", log_gradients=True)
    for f in instance.losses():
        x = learner.current_point()
        g = f.subgradient(x)
        ledger.record(f.value(x), g)
        learner.update(g)
    ledger.resolve(instance.comparator_loss(), converged=True)
    return ledger.cumulative_loss, ledger


def regret_floor(instance, eta):
    """Analytic lower bound on fixed-rate regret:
    (T0/2) * eta + (C/2) * min(T1, 1/(2 eta))."""
    t0 = instance.oscillation_rounds
    c = instance.ramp_count
    t1 = instance.ramp_rounds
    return 0.5 * t0 * eta + 0.5 * c * min(float(t1), 1.0 / (2.0 * eta))


@dataclass
class BestFixedRate:
    eta: float
    regret: float
    etas: np.ndarray
    regrets: np.ndarray


def best_fixed_eta(instance, etas=None):
    """Tune the constant rate on a grid; regrets use the exact comparator."""
    if etas is None:
        etas = default_eta_grid()
    etas = np.asarray(etas, dtype=float)
    comparator = instance.comparator_loss()
    regrets = np.array([run_fixed_rate(instance, e) - comparator for e in etas])
    k = int(np.argmin(regrets))
    return BestFixedRate(float(etas[k]), float(regrets[k]), etas, regrets)
