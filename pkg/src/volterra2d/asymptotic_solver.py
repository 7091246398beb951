"""Tail map and asymptotic decomposition solver.

In the regime where the full-period products of (1+h) and (1+p) equal 1
and both kernels are summable, solutions split as x = u + v with u a
periodic free response (u_n = c / r_n for the reciprocal growth r) and v
decaying to zero under a certified geometric envelope.  The tail map
realizes that splitting as a fixed-point equation; here it is reduced to
a finite window with every discarded tail bounded analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ._iteration import solve_fixed_point
from .kernels import Kernel, TailNotCertified, TruncationPolicy
from .periodic_solver import SolverOptions
from .sequences import (
    PeriodicSequence,
    PeriodProductNotOne,
    ZeroFactor,
    reciprocal_growth,
)
from .simulate import residual as recurrence_residual
from .system import SystemSpec


@dataclass(frozen=True)
class GrowthProfile:
    """Reciprocal running products of (1+h) and (1+p) over one period,
    with the extremes of their absolute values (all positive, so the tail
    map's growth factors are bounded both ways)."""

    x: PeriodicSequence
    y: PeriodicSequence
    min_x: float
    max_x: float
    min_y: float
    max_y: float


def growth_profile(spec: SystemSpec) -> GrowthProfile:
    """Compute the reciprocal growth sequences for both components.

    Raises PeriodProductNotOne outside the unit-product regime and
    ZeroFactor when some 1+h_n or 1+p_n vanishes.
    """
    rx = reciprocal_growth(spec.h)
    ry = reciprocal_growth(spec.p)
    return GrowthProfile(
        rx, ry,
        min(abs(v) for v in rx.values), max(abs(v) for v in rx.values),
        min(abs(v) for v in ry.values), max(abs(v) for v in ry.values))


@dataclass(frozen=True)
class Decomposition:
    """Asymptotically periodic solution split x = u + v on a finite window.

    u1, u2 are exactly periodic by representation; v carries pointwise
    certified envelopes v*_bound[n] (the growth ratio times the
    nonlinearity bound times the kernel double tail at n), which decrease
    geometrically to zero.
    """

    c1: float
    c2: float
    u1: PeriodicSequence
    u2: PeriodicSequence
    v1: Tuple[float, ...]
    v2: Tuple[float, ...]
    v1_bound: Tuple[float, ...]
    v2_bound: Tuple[float, ...]
    horizon: int
    converged: bool

    def x_at(self, n: int) -> float:
        return self.u1.get(n) + self.v1[n]

    def y_at(self, n: int) -> float:
        return self.u2.get(n) + self.v2[n]


@dataclass(frozen=True)
class AsymptoticSolveReport:
    decomposition: Decomposition
    x: Tuple[float, ...]
    y: Tuple[float, ...]
    iterations: int
    method_used: str
    final_update_norm: float
    residual_max: float
    truncation_error: float
    closure_error: float
    converged: bool
    warnings: Tuple[str, ...] = ()

    def as_dict(self):
        dec = self.decomposition
        return {
            "c1": dec.c1,
            "c2": dec.c2,
            "horizon": dec.horizon,
            "u1": list(dec.u1.values),
            "u2": list(dec.u2.values),
            "x": list(self.x),
            "y": list(self.y),
            "v1": list(dec.v1),
            "v2": list(dec.v2),
            "v1_bound": list(dec.v1_bound),
            "v2_bound": list(dec.v2_bound),
            "iterations": self.iterations,
            "method_used": self.method_used,
            "final_update_norm": self.final_update_norm,
            "residual_max": self.residual_max,
            "truncation_error": self.truncation_error,
            "closure_error": self.closure_error,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }


def _outer_cut(kernel: Kernel, horizon: int, coeff: float,
               policy: TruncationPolicy) -> int:
    """Smallest N >= horizon with coeff * double_tail(N+1) <= tail_tol/2."""
    if coeff == 0.0:
        return horizon
    target = policy.tail_tol / 2.0
    if not math.isfinite(kernel.double_tail(horizon + 1)):
        raise TailNotCertified("kernel double tail is infinite; the tail map "
                               "cannot be truncated with a certified error")
    n = horizon
    limit = horizon + policy.max_terms
    while coeff * kernel.double_tail(n + 1) > target:
        n += 1
        if n > limit:
            raise TailNotCertified(
                f"outer cut exceeded the {policy.max_terms}-term cap")
    return n


class _TailMapComponent:
    """Precomputed finite reduction of one tail-map component.

    Everything independent of the iterate (growth factors, kernel weight
    windows, certified error budget) is built once; apply() is then two
    vector products.  The iterate enters only through the nonlinearity of
    the partner window.
    """

    def __init__(self, kernel, nonlin, growth: PeriodicSequence,
                 ratio: float, c_out: float, c_partner: float,
                 partner_growth: PeriodicSequence, horizon: int,
                 policy: TruncationPolicy):
        self.nonlin = nonlin
        self.c_out = c_out
        self.horizon = horizon
        bound = nonlin.bound
        cut = _outer_cut(kernel, horizon, ratio * bound, policy)
        self.cut = cut
        self.outer_error = (ratio * bound * kernel.double_tail(cut + 1)
                            if bound > 0.0 else 0.0)

        # Per-row inner truncation: budget the remaining tail_tol/2 evenly
        # over the rows, deflated by the worst growth ratio.
        inner_tol = (policy.tail_tol / 2.0) / (ratio * (cut + 1))
        min_growth = min(abs(v) for v in growth.values)
        depths = []
        inner_error = 0.0
        for i in range(cut + 1):
            depth = kernel.truncation_depth(i, bound, inner_tol)
            if depth + 1 > policy.max_terms:
                raise TailNotCertified(
                    f"inner depth {depth + 1} exceeds the "
                    f"{policy.max_terms}-term cap")
            depths.append(depth)
            inner_error += (abs(growth.get(i + 1))
                            * bound * kernel.tail_beyond(i, depth))
        self.inner_error = inner_error / min_growth
        self.m_lo = min(i - d for i, d in enumerate(depths)) if depths else 0

        width = cut + 1 - self.m_lo
        weights = np.zeros((cut + 1, width))
        for i, depth in enumerate(depths):
            for m in range(i - depth, i + 1):
                weights[i, m - self.m_lo] = kernel.weight(i, m)
        self.weights = weights
        self.growth_row = np.array([growth.get(i + 1) for i in range(cut + 1)])
        self.growth_out = np.array([growth.get(n) for n in range(horizon + 1)])
        # Partner values outside the window: zero history before 0, the
        # periodic free response beyond the horizon.
        self.partner_pre = np.zeros(max(0, -self.m_lo))
        self.partner_post = np.array(
            [c_partner / partner_growth.get(m)
             for m in range(horizon + 1, cut + 1)])

    def apply(self, partner_window: np.ndarray) -> np.ndarray:
        values = np.concatenate(
            [self.partner_pre, partner_window, self.partner_post])
        drive = self.weights @ self.nonlin(values)
        weighted = self.growth_row * drive
        suffix = np.cumsum(weighted[::-1])[::-1]
        return (self.c_out - suffix[:self.horizon + 1]) / self.growth_out

    @property
    def certified_error(self) -> float:
        return self.outer_error + self.inner_error


class TailMapOperator:
    """The tail map reduced to windows on 0..horizon for both components.

    x-component: (c1 - sum_{i>=n} r_{i+1} * drive_a(i)) / r_n with r the
    reciprocal growth of h and drive_a(i) the kernel-a weighted f(y) row
    sum; symmetric for y.  Outer sums stop where the analytic envelope
    falls below half the tail tolerance; inner sums are budgeted the other
    half.  Beyond the window the partner is closed with its periodic free
    response; before 0 the history is zero.
    """

    def __init__(self, spec: SystemSpec, c1: float, c2: float, horizon: int,
                 policy: TruncationPolicy):
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        self.spec = spec
        self.c1 = c1
        self.c2 = c2
        self.horizon = horizon
        self.policy = policy
        self.profile = growth_profile(spec)
        prof = self.profile
        ratio_x = prof.max_x / prof.min_x
        ratio_y = prof.max_y / prof.min_y
        self.component_x = _TailMapComponent(
            spec.kernel_a, spec.f, prof.x, ratio_x, c1, c2, prof.y,
            horizon, policy)
        self.component_y = _TailMapComponent(
            spec.kernel_b, spec.g, prof.y, ratio_y, c2, c1, prof.x,
            horizon, policy)
        # Closing the partner with its free response ignores the partner's
        # own decaying part beyond the horizon; first-order bound via the
        # partner envelope and the kernel tail past the horizon.  A zero
        # nonlinearity bound kills the whole drive, so the infinite double
        # tail of a non-summable kernel never multiplies a nonzero factor.
        env_x = (ratio_x * spec.f.bound * spec.kernel_a.double_tail(horizon + 1)
                 if spec.f.bound > 0.0 else 0.0)
        env_y = (ratio_y * spec.g.bound * spec.kernel_b.double_tail(horizon + 1)
                 if spec.g.bound > 0.0 else 0.0)
        closure_x = (ratio_x * spec.f.lipschitz * env_y
                     * spec.kernel_a.double_tail(horizon + 1)
                     if spec.f.bound > 0.0 and env_y > 0.0 else 0.0)
        closure_y = (ratio_y * spec.g.lipschitz * env_x
                     * spec.kernel_b.double_tail(horizon + 1)
                     if spec.g.bound > 0.0 and env_x > 0.0 else 0.0)
        self.closure_error = max(closure_x, closure_y)

    @property
    def certified_error(self) -> float:
        return max(self.component_x.certified_error,
                   self.component_y.certified_error)

    def apply(self, x_window: np.ndarray,
              y_window: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (self.component_x.apply(y_window),
                self.component_y.apply(x_window))

    def envelope(self) -> Tuple[np.ndarray, np.ndarray]:
        """Pointwise decay bounds for the deviation from the free response."""
        prof = self.profile
        coeff_x = prof.max_x / prof.min_x * self.spec.f.bound
        coeff_y = prof.max_y / prof.min_y * self.spec.g.bound
        bx = np.array([coeff_x * self.spec.kernel_a.double_tail(n)
                       if coeff_x > 0.0 else 0.0
                       for n in range(self.horizon + 1)])
        by = np.array([coeff_y * self.spec.kernel_b.double_tail(n)
                       if coeff_y > 0.0 else 0.0
                       for n in range(self.horizon + 1)])
        return bx, by


def apply_tail_map(spec: SystemSpec, c1: float, c2: float,
                   x_window, y_window,
                   policy: TruncationPolicy) -> Tuple[np.ndarray, np.ndarray, float]:
    """One application of the tail map to window states on 0..horizon
    (horizon is len(window)-1).  Returns the new windows and the aggregate
    certified truncation-error bound, valid for every window entry."""
    x_window = np.asarray(x_window, dtype=float)
    y_window = np.asarray(y_window, dtype=float)
    if x_window.shape != y_window.shape or x_window.ndim != 1 or not len(x_window):
        raise ValueError("x and y windows must be equal-length 1-d arrays")
    op = TailMapOperator(spec, c1, c2, len(x_window) - 1, policy)
    nx, ny = op.apply(x_window, y_window)
    return nx, ny, op.certified_error


def solve_asymptotic(spec: SystemSpec, c1: float, c2: float, horizon: int,
                     opts: SolverOptions = SolverOptions(),
                     policy: TruncationPolicy = TruncationPolicy(),
                     ) -> AsymptoticSolveReport:
    """Drive the tail map to a window fixed point and extract the
    decomposition x = u + v.

    Starts from the free response (v = 0); damped Picard with a Newton
    closer, as in the periodic solver.  ``converged`` requires the update
    norm below opts.tol, the recurrence residual below opts.residual_tol
    on the whole window, and every |v[n]| within its certified envelope
    plus 10x the tail tolerance.  Non-convergence is a report state.
    """
    T = spec.period
    if horizon < 4 * T:
        raise ValueError(f"horizon must be at least 4 periods ({4 * T})")
    warnings = []
    if c1 <= 0.0:
        warnings.append("c1 <= 0: the existence theory assumes positive "
                        "asymptote amplitudes")
    if c2 <= 0.0:
        warnings.append("c2 <= 0: the existence theory assumes positive "
                        "asymptote amplitudes")

    op = TailMapOperator(spec, c1, c2, horizon, policy)
    width = horizon + 1
    u1_window = c1 / op.component_x.growth_out
    u2_window = c2 / op.component_y.growth_out

    def apply_map(z: np.ndarray) -> np.ndarray:
        nx, ny = op.apply(z[:width], z[width:])
        return np.concatenate([nx, ny])

    z0 = np.concatenate([u1_window, u2_window])
    result = solve_fixed_point(apply_map, z0, tol=opts.tol,
                               max_iter=opts.max_iter, damping=opts.damping,
                               strategy=opts.strategy)
    xw = result.z[:width]
    yw = result.z[width:]

    prof = op.profile
    u1 = PeriodicSequence(T, tuple(c1 / v for v in prof.x.values))
    u2 = PeriodicSequence(T, tuple(c2 / v for v in prof.y.values))
    v1 = xw - u1_window
    v2 = yw - u2_window
    bound_x, bound_y = op.envelope()

    def x_value(m: int) -> float:
        return xw[m] if m >= 0 else 0.0

    def y_value(m: int) -> float:
        return yw[m] if m >= 0 else 0.0

    residual_max = 0.0
    for n in range(horizon):
        dx, dy = recurrence_residual(spec, x_value, y_value, n, policy)
        residual_max = max(residual_max, dx, dy)

    slack = 10.0 * policy.tail_tol
    envelope_ok = (np.all(np.abs(v1) <= bound_x + slack)
                   and np.all(np.abs(v2) <= bound_y + slack))
    converged = bool(result.converged
                     and residual_max <= opts.residual_tol and envelope_ok)

    decomposition = Decomposition(
        c1=c1, c2=c2, u1=u1, u2=u2,
        v1=tuple(float(v) for v in v1),
        v2=tuple(float(v) for v in v2),
        v1_bound=tuple(float(b) for b in bound_x),
        v2_bound=tuple(float(b) for b in bound_y),
        horizon=horizon, converged=converged)
    return AsymptoticSolveReport(
        decomposition=decomposition,
        x=tuple(float(v) for v in xw),
        y=tuple(float(v) for v in yw),
        iterations=result.iterations,
        method_used=result.method_used,
        final_update_norm=result.final_update_norm,
        residual_max=residual_max,
        truncation_error=op.certified_error,
        closure_error=op.closure_error,
        converged=converged,
        warnings=tuple(warnings),
    )


__all__ = [
    "AsymptoticSolveReport",
    "Decomposition",
    "GrowthProfile",
    "PeriodProductNotOne",
    "TailMapOperator",
    "ZeroFactor",
    "apply_tail_map",
    "growth_profile",
    "solve_asymptotic",
]
