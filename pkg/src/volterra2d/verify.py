"""Independent certification of candidate solutions.

Residuals here are computed by direct fixed-depth kernel summation with an
explicit geometric remainder, written without the folded tables or the
adaptive truncation the solvers use, so the verifier and the solvers share
no nontrivial code path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

from .asymptotic_solver import Decomposition
from .kernels import Kernel, SeparableExponential, TruncationPolicy
from .sequences import History, PeriodicSequence, product_one_plus
from .simulate import simulate
from .system import SystemSpec

#: Fixed summation depth; at least the 200 terms the certification calls for.
DIRECT_DEPTH = 256


def _direct_sum(kernel: Kernel, i: int, values: Callable[[int], float],
                depth: int) -> float:
    total = 0.0
    for m in range(i - depth, i + 1):
        w = kernel.weight(i, m)
        if w != 0.0:
            total += w * values(m)
    return total


def _remainder(kernel: Kernel, i: int, bound: float, depth: int) -> float:
    """Explicit bound on the discarded |sum_{m < i-depth} a_{i,m} * values|."""
    if isinstance(kernel, SeparableExponential):
        rate = kernel.row_rate
        row_sum = (abs(kernel.coef)
                   * math.exp((rate - kernel.col_rate) * i)
                   / (1.0 - math.exp(-rate)))
        return bound * row_sum * math.exp(-rate * (depth + 1))
    row = kernel.weights[i % kernel.lag_period]
    return bound * sum(abs(w) for w in row[depth + 1:])


def _residual_pair(spec: SystemSpec, values_x: Callable[[int], float],
                   values_y: Callable[[int], float], n: int,
                   depth: int) -> Tuple[float, float]:
    drive_x = _direct_sum(spec.kernel_a, n, lambda m: spec.f(values_y(m)), depth)
    drive_y = _direct_sum(spec.kernel_b, n, lambda m: spec.g(values_x(m)), depth)
    dx = abs(values_x(n + 1) - (1.0 + spec.h.get(n)) * values_x(n) - drive_x)
    dy = abs(values_y(n + 1) - (1.0 + spec.p.get(n)) * values_y(n) - drive_y)
    return dx, dy


def periodic_residual_max(spec: SystemSpec,
                          solution: Tuple[PeriodicSequence, PeriodicSequence],
                          n_checks: int, depth: int = DIRECT_DEPTH) -> float:
    """Max defect of the recurrence over n = 0..n_checks-1 for the periodic
    extension of a candidate period window."""
    sol_x, sol_y = solution
    worst = 0.0
    for n in range(n_checks):
        dx, dy = _residual_pair(spec, sol_x.get, sol_y.get, n, depth)
        worst = max(worst, dx, dy)
    return worst


@dataclass(frozen=True)
class PeriodicVerification:
    max_defect: float
    drift: float
    remainder_bound: float
    n_checks: int
    defect_tol: float
    drift_tol: float
    passed: bool

    def as_dict(self):
        return {
            "max_defect": self.max_defect,
            "drift": self.drift,
            "remainder_bound": self.remainder_bound,
            "n_checks": self.n_checks,
            "defect_tol": self.defect_tol,
            "drift_tol": self.drift_tol,
            "passed": self.passed,
        }


def verify_periodic(spec: SystemSpec,
                    solution: Tuple[PeriodicSequence, PeriodicSequence],
                    n_checks: int = 21, *, defect_tol: float = 1e-8,
                    drift_tol: float = 1e-6, depth: int = DIRECT_DEPTH,
                    policy: TruncationPolicy = TruncationPolicy(1e-14),
                    ) -> PeriodicVerification:
    """Certify a candidate periodic solution two independent ways.

    First, the brute-force residual of the recurrence at n = 0..n_checks-1
    under periodic extension.  Second, a round trip through the simulator:
    the history window is filled with the exact periodic values to ``depth``
    entries (tail zero beyond, which the remainder bound absorbs), the
    system is marched 10 periods forward, and the worst deviation from the
    candidate is reported as drift.  Unstable orbits amplify per-step
    truncation error geometrically, hence the tight default policy here.
    """
    sol_x, sol_y = solution
    T = spec.period
    max_defect = periodic_residual_max(spec, solution, n_checks, depth)
    remainder = max(
        _remainder(spec.kernel_a, i, spec.f.bound, depth)
        for i in range(max(n_checks, 1)))
    remainder = max(remainder, max(
        _remainder(spec.kernel_b, i, spec.g.bound, depth)
        for i in range(max(n_checks, 1))))

    window_len = max(depth, 4 * T)
    window = tuple((sol_x.get(n), sol_y.get(n))
                   for n in range(-window_len, 1))
    trajectory = simulate(spec, History(window), 10 * T, policy)
    drift = max(
        max(abs(trajectory.x[n] - sol_x.get(n)) for n in range(len(trajectory))),
        max(abs(trajectory.y[n] - sol_y.get(n)) for n in range(len(trajectory))))

    passed = max_defect <= defect_tol and drift <= drift_tol
    return PeriodicVerification(max_defect, drift, remainder, n_checks,
                                defect_tol, drift_tol, passed)


@dataclass(frozen=True)
class DecompositionVerification:
    periodic_part_ok: bool
    envelope_ok: bool
    max_defect: float
    decay_ok: bool
    defect_tol: float
    passed: bool

    def as_dict(self):
        return {
            "periodic_part_ok": self.periodic_part_ok,
            "envelope_ok": self.envelope_ok,
            "max_defect": self.max_defect,
            "decay_ok": self.decay_ok,
            "defect_tol": self.defect_tol,
            "passed": self.passed,
        }


def _decay_ratio(kernel: Kernel) -> float:
    """Per-step ratio of the decay envelope (1 for finite-lag kernels,
    whose nonzero case never reaches the asymptotic regime)."""
    if isinstance(kernel, SeparableExponential):
        return math.exp(kernel.row_rate - kernel.col_rate)
    return 1.0


def _decay_check(v, bound, ratio: float) -> bool:
    """The last decade of resolvable v values must decay at least at the
    envelope's per-step ratio, within a factor of 10 (plus a round-off
    floor: v hits the noise floor of its periodic part eventually)."""
    resolvable = [n for n in range(len(v) - 1) if bound[n] > 1e-12]
    for n in resolvable[-10:]:
        if abs(v[n + 1]) > 10.0 * ratio * abs(v[n]) + 1e-15:
            return False
    return True


def verify_decomposition(spec: SystemSpec, dec: Decomposition, *,
                         defect_tol: float = 1e-8,
                         tail_tol: float = 1e-10,
                         depth: int = DIRECT_DEPTH) -> DecompositionVerification:
    """Certify an asymptotic decomposition: the periodic part agrees with
    the running-product form of the free response, v sits inside its
    certified envelope, the reconstruction x = u + v satisfies the
    recurrence (zero history), and the tail of v actually decays at the
    envelope rate."""
    periodic_part_ok = True
    for n in range(10 * spec.period):
        free_x = dec.c1 * product_one_plus(spec.h, 0, n - 1)
        free_y = dec.c2 * product_one_plus(spec.p, 0, n - 1)
        tol_x = 1e-12 * max(1.0, abs(free_x))
        tol_y = 1e-12 * max(1.0, abs(free_y))
        if (abs(dec.u1.get(n) - free_x) > tol_x
                or abs(dec.u2.get(n) - free_y) > tol_y):
            periodic_part_ok = False
            break

    slack = 10.0 * tail_tol
    envelope_ok = all(
        abs(v) <= b + slack for v, b in zip(dec.v1, dec.v1_bound)) and all(
        abs(v) <= b + slack for v, b in zip(dec.v2, dec.v2_bound))

    def x_value(m: int) -> float:
        return dec.x_at(m) if m >= 0 else 0.0

    def y_value(m: int) -> float:
        return dec.y_at(m) if m >= 0 else 0.0

    max_defect = 0.0
    for n in range(dec.horizon):
        dx, dy = _residual_pair(spec, x_value, y_value, n, depth)
        max_defect = max(max_defect, dx, dy)

    decay_ok = (_decay_check(dec.v1, dec.v1_bound, _decay_ratio(spec.kernel_a))
                and _decay_check(dec.v2, dec.v2_bound,
                                 _decay_ratio(spec.kernel_b)))

    passed = (periodic_part_ok and envelope_ok and decay_ok
              and max_defect <= defect_tol)
    return DecompositionVerification(periodic_part_ok, envelope_ok,
                                     max_defect, decay_ok, defect_tol, passed)
