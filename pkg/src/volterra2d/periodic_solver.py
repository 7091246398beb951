"""Periodic cycle map and its fixed-point solver.

The cycle map sends a pair of period-T sequences to the pair obtained by
propagating the kernel-weighted nonlinear drive once around a period and
scaling by the cycle gains; its fixed points are exactly the T-periodic
solutions of the underlying system.  Existence theory guarantees a fixed
point inside the self-map ball but gives no algorithm, so the solver here
runs damped Picard with a Newton closer and certifies the result a
posteriori through the verify module.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ._iteration import STRATEGIES, solve_fixed_point
from .sequences import (
    PeriodicSequence,
    PeriodProductIsOne,
    cycle_gain,
    product_one_plus,
)
from .system import SystemSpec

State = Tuple[PeriodicSequence, PeriodicSequence]


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-12
    residual_tol: float = 1e-8
    max_iter: int = 200
    damping: float = 0.5
    strategy: str = "picard_then_newton"
    initial_guess: Optional[State] = None

    def __post_init__(self):
        if not (self.tol > 0.0 and self.residual_tol > 0.0):
            raise ValueError("tol and residual_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must be in (0, 1]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class PeriodicSolveReport:
    solution: State
    gain_x: float
    gain_y: float
    iterations: int
    method_used: str
    final_update_norm: float
    residual_max: float
    converged: bool

    def as_dict(self):
        return {
            "x": list(self.solution[0].values),
            "y": list(self.solution[1].values),
            "gain_x": self.gain_x,
            "gain_y": self.gain_y,
            "iterations": self.iterations,
            "method_used": self.method_used,
            "final_update_norm": self.final_update_norm,
            "residual_max": self.residual_max,
            "converged": self.converged,
        }


def _cycle_map_vec(spec: SystemSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Build the cycle map on stacked period vectors [x_0..x_{T-1}, y_0..y_{T-1}].

    The inner infinite sums are evaluated exactly through the folded lag
    tables (inputs are T-periodic), so the map output is T-periodic by
    construction.
    """
    T = spec.period
    gain_x = cycle_gain(spec.h)
    gain_y = cycle_gain(spec.p)
    table_a = spec.kernel_a.folded_weights(T)
    table_b = spec.kernel_b.folded_weights(T)
    # prods[n, j] = prod_{l = n+j+1}^{n+T-1} (1 + seq_l), the weight carried
    # by the drive at i = n + j.
    prods_h = np.array([[product_one_plus(spec.h, n + j + 1, n + T - 1)
                         for j in range(T)] for n in range(T)])
    prods_p = np.array([[product_one_plus(spec.p, n + j + 1, n + T - 1)
                         for j in range(T)] for n in range(T)])
    f, g = spec.f, spec.g

    def apply_map(z: np.ndarray) -> np.ndarray:
        x, y = z[:T], z[T:]
        fy = [f(v) for v in y]
        gx = [g(v) for v in x]
        out = np.empty_like(z)
        for n in range(T):
            acc_x = 0.0
            acc_y = 0.0
            for j in range(T):
                i = n + j
                k = i % T
                drive_a = sum(table_a[k, r] * fy[(i - r) % T] for r in range(T))
                drive_b = sum(table_b[k, r] * gx[(i - r) % T] for r in range(T))
                acc_x += prods_h[n, j] * drive_a
                acc_y += prods_p[n, j] * drive_b
            out[n] = gain_x * acc_x
            out[T + n] = gain_y * acc_y
        return out

    return apply_map


def apply_cycle_map(spec: SystemSpec, state: State) -> State:
    """One application of the cycle map to a pair of period-T sequences.

    Raises PeriodProductIsOne when a full-period product equals 1 (the
    asymptotic regime) and NotDiagonalPeriodic when a kernel cannot be
    folded for this period.
    """
    x, y = state
    if x.period != spec.period or y.period != spec.period:
        raise ValueError("state period does not match the system period")
    z = np.array(x.values + y.values)
    out = _cycle_map_vec(spec)(z)
    T = spec.period
    return (PeriodicSequence(T, tuple(out[:T])),
            PeriodicSequence(T, tuple(out[T:])))


def solve_periodic(spec: SystemSpec,
                   opts: SolverOptions = SolverOptions()) -> PeriodicSolveReport:
    """Seek a fixed point of the cycle map in the 2T-dimensional space of
    period values, then certify it against the recurrence.

    The cycle map is generally not a contraction, so the default strategy
    lets damped Picard run until it converges or stalls and finishes with
    Newton.  ``converged`` requires both the final update norm below
    opts.tol and the independent brute-force residual of the recurrence
    below opts.residual_tol; non-convergence is a report state, never an
    exception.  With several fixed points present the result depends on
    the initial guess; no uniqueness is claimed.
    """
    from .verify import periodic_residual_max

    T = spec.period
    apply_map = _cycle_map_vec(spec)
    if opts.initial_guess is None:
        z0 = np.zeros(2 * T)
    else:
        gx, gy = opts.initial_guess
        if gx.period != T or gy.period != T:
            raise ValueError("initial guess period does not match the system")
        z0 = np.array(gx.values + gy.values)

    result = solve_fixed_point(apply_map, z0, tol=opts.tol,
                               max_iter=opts.max_iter, damping=opts.damping,
                               strategy=opts.strategy)
    solution = (PeriodicSequence(T, tuple(result.z[:T])),
                PeriodicSequence(T, tuple(result.z[T:])))
    residual_max = periodic_residual_max(spec, solution, n_checks=5 * T)
    converged = result.converged and residual_max <= opts.residual_tol
    return PeriodicSolveReport(
        solution=solution,
        gain_x=cycle_gain(spec.h),
        gain_y=cycle_gain(spec.p),
        iterations=result.iterations,
        method_used=result.method_used,
        final_update_norm=result.final_update_norm,
        residual_max=residual_max,
        converged=converged,
    )


__all__ = [
    "PeriodProductIsOne",
    "PeriodicSolveReport",
    "SolverOptions",
    "apply_cycle_map",
    "cycle_gain",
    "solve_periodic",
]
