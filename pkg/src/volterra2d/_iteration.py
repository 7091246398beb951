"""Shared fixed-point driver: damped Picard with stall detection, falling
back to Newton on F(z) = z - map(z) with a central-difference Jacobian."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

STRATEGIES = ("picard_then_newton", "picard_only", "newton_only")

#: Picard stalls after this many iterations without a new best update norm.
STALL_PATIENCE = 10

#: Relative step for central-difference Jacobian columns.
FD_STEP = 1e-6


@dataclass(frozen=True)
class IterationResult:
    z: np.ndarray
    iterations: int
    method_used: str
    final_update_norm: float
    converged: bool


def _newton(apply_map: Callable[[np.ndarray], np.ndarray], z: np.ndarray,
            tol: float, budget: int) -> Tuple[np.ndarray, int, float, bool]:
    update = math.inf
    used = 0
    for _ in range(budget):
        residual = z - apply_map(z)
        if not np.all(np.isfinite(residual)):
            break
        dim = len(z)
        jac = np.empty((dim, dim))
        for k in range(dim):
            step = FD_STEP * max(1.0, abs(z[k]))
            plus = z.copy()
            plus[k] += step
            minus = z.copy()
            minus[k] -= step
            jac[:, k] = ((plus - apply_map(plus)) - (minus - apply_map(minus))
                         ) / (2.0 * step)
        try:
            delta = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -residual, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            break
        stepped = z + delta
        if not np.all(np.isfinite(stepped)):
            break
        z = stepped
        used += 1
        update = float(np.max(np.abs(delta)))
        if update < tol:
            return z, used, update, True
    return z, used, update, False


def solve_fixed_point(apply_map: Callable[[np.ndarray], np.ndarray],
                      z0: np.ndarray, *, tol: float, max_iter: int,
                      damping: float, strategy: str) -> IterationResult:
    """Find z with z = apply_map(z).

    Picard phase: z <- (1-damping) z + damping * map(z) until the update
    norm drops below tol, stalling (no new minimum update norm for
    STALL_PATIENCE iterations, which also catches sustained oscillation)
    or exhausting max_iter.  On stall the best iterate seen seeds Newton.
    Non-convergence is reported, not raised.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    z = np.asarray(z0, dtype=float).copy()
    iterations = 0
    update = math.inf
    method = "newton"

    if strategy != "newton_only":
        method = "picard" if damping == 1.0 else "damped_picard"
        best_update = math.inf
        best_z = z.copy()
        since_best = 0
        while iterations < max_iter:
            mapped = apply_map(z)
            z_next = (1.0 - damping) * z + damping * mapped
            iterations += 1
            if not np.all(np.isfinite(z_next)):
                z = best_z
                break
            update = float(np.max(np.abs(z_next - z)))
            z = z_next
            if update < tol:
                return IterationResult(z, iterations, method, update, True)
            if update < best_update:
                best_update = update
                best_z = z.copy()
                since_best = 0
            else:
                since_best += 1
                if since_best >= STALL_PATIENCE:
                    z = best_z
                    break
        if strategy == "picard_only":
            return IterationResult(z, iterations, method, update, False)

    budget = (max_iter - iterations if strategy == "picard_then_newton"
              else max_iter)
    z_newton, used, update_newton, converged = _newton(apply_map, z, tol,
                                                       budget)
    iterations += used
    if used > 0 or strategy == "newton_only":
        z = z_newton
        update = update_newton
        method = "newton"
    return IterationResult(z, iterations, method, update, converged)
