#!/usr/bin/env python3
"""
Small dense optimization kernels.

Euclidean projection onto the unit simplex, vertex minimization of a linear
form over the simplex, a dense tableau simplex method with Bland's rule, and
the separable concave QP solved in every Progressive Hedging scenario step.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

ZERO_SNAP = 1e-14


class NonFiniteInput(ValueError):
    """Exception raised when a kernel receives NaN or infinite values."""
    pass


class InfeasibleProblem(Exception):
    """Exception raised when no y >= 0 satisfies Ay <= b."""
    pass


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass
class LPSolution:
    """Result of ``solve_lp``; ``x`` and ``duals`` are None unless optimal."""
    status: LPStatus
    x: Optional[np.ndarray]
    value: float
    duals: Optional[np.ndarray]
    pivots: int

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _as_finite_vector(values, what: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float)
    if vector.ndim != 1:
        raise ValueError(f"{what} must be a vector, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise NonFiniteInput(f"non-finite {what}")
    return vector


def project_simplex(v) -> np.ndarray:
    """
    Euclidean projection of ``v`` onto the unit simplex.

    Sort-and-threshold algorithm: with ``u`` sorted in decreasing order the
    projection is ``max(v - theta, 0)`` where ``theta`` is fixed by the largest
    index keeping ``u_k - (sum_{j<=k} u_j - 1)/k`` positive.

    Args:
        v: Finite vector of length at least one.

    Returns:
        The closest point of the simplex; components below 1e-14 are zero.

    Raises:
        NonFiniteInput: If ``v`` holds NaN or infinite values.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"projection input must be a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("non-finite projection input")

    # Points already in the simplex are returned untouched (exact idempotence)
    if np.all(v >= 0.0) and abs(float(v.sum()) - 1.0) <= 4.0 * np.finfo(float).eps * v.size:
        return v.copy()

    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, v.size + 1)
    active = np.nonzero(u - cumulative / index > 0.0)[0]
    k = int(active[-1])
    theta = cumulative[k] / (k + 1.0)

    z = np.maximum(v - theta, 0.0)
    z[z < ZERO_SNAP] = 0.0
    return z


def min_vertex(c) -> Tuple[int, float]:
    """
    Minimize the linear form ``<q, c>`` over the simplex.

    The minimum is attained at the vertex of the smallest coefficient; ties
    resolve to the smallest index.

    Returns:
        ``(j, c_j)`` with ``j`` 0-based.
    """
    c = _as_finite_vector(c, "vertex coefficients")
    j = int(np.argmin(c))
    return j, float(c[j])


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])


def _run_simplex(tableau: np.ndarray, basis: List[int], n_cols: int, tol: float,
                 max_pivots: int, pivots: int) -> Tuple[LPStatus, int]:
    """Bland's-rule primal simplex on a tableau whose last row holds reduced costs."""
    m = tableau.shape[0] - 1
    while True:
        entering = np.nonzero(tableau[m, :n_cols] < -tol)[0]
        if entering.size == 0:
            return LPStatus.OPTIMAL, pivots
        col = int(entering[0])

        column = tableau[:m, col]
        rows = np.nonzero(column > tol)[0]
        if rows.size == 0:
            return LPStatus.UNBOUNDED, pivots

        ratios = tableau[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))

        _pivot(tableau, row, col)
        basis[row] = col
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError(f"simplex method exceeded {max_pivots} pivots")


def solve_lp(c, A, b, tol: float = 1e-12, max_pivots: int = 50_000) -> LPSolution:
    """
    Maximize ``<c, y>`` subject to ``Ay <= b`` and ``y >= 0``.

    Dense two-phase tableau simplex with Bland's anti-cycling rule. Phase 1
    only runs when ``b`` has negative entries; otherwise ``y = 0`` is the
    starting vertex.

    Args:
        c: Objective coefficients, length n.
        A: Constraint matrix, m x n.
        b: Right-hand side, length m.

    Returns:
        An ``LPSolution``; Unbounded and Infeasible are reported as status,
        not raised. ``duals`` are the multipliers of the m rows.
    """
    c = _as_finite_vector(c, "objective")
    b = _as_finite_vector(b, "right-hand side")
    A = np.asarray(A, dtype=float).reshape(b.size, c.size)
    if not np.all(np.isfinite(A)):
        raise NonFiniteInput("non-finite constraint matrix")
    m, n = A.shape

    negative = np.nonzero(b < 0.0)[0]
    n_art = negative.size
    tableau = np.zeros((m + 1, n + m + n_art + 1))
    tableau[:m, :n] = A
    tableau[:m, n:n + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(n, n + m))

    pivots = 0
    if n_art:
        tableau[negative, :] *= -1.0
        for k, row in enumerate(negative):
            tableau[row, n + m + k] = 1.0
            basis[row] = n + m + k
        # Phase 1: maximize minus the sum of artificials
        tableau[m, :] = -tableau[negative, :].sum(axis=0)
        tableau[m, n + m:n + m + n_art] = 0.0
        _, pivots = _run_simplex(tableau, basis, n + m + n_art, tol, max_pivots, pivots)
        if tableau[m, -1] < -1e-9:
            logger.debug(f"LP infeasible: phase 1 optimum {tableau[m, -1]:.3e}")
            return LPSolution(LPStatus.INFEASIBLE, None, float("nan"), None, pivots)

        # Drive zero-level artificials out of the basis; rows that cannot pivot are redundant
        redundant = []
        for row in range(m):
            if basis[row] < n + m:
                continue
            candidates = np.nonzero(np.abs(tableau[row, :n + m]) > 1e-9)[0]
            if candidates.size:
                _pivot(tableau, row, int(candidates[0]))
                basis[row] = int(candidates[0])
            else:
                redundant.append(row)
        tableau = np.delete(tableau, np.arange(n + m, n + m + n_art), axis=1)
        if redundant:
            tableau = np.delete(tableau, redundant, axis=0)
            basis = [col for row, col in enumerate(basis) if row not in redundant]

    width = tableau.shape[1] - 1
    costs = np.zeros(width)
    costs[:n] = c
    tableau[-1, :] = 0.0
    tableau[-1, :width] = -costs
    for row, col in enumerate(basis):
        tableau[-1] += costs[col] * tableau[row]

    status, pivots = _run_simplex(tableau, basis, width, tol, max_pivots, pivots)
    if status is LPStatus.UNBOUNDED:
        return LPSolution(status, None, float("inf"), None, pivots)

    x = np.zeros(width)
    for row, col in enumerate(basis):
        x[col] = tableau[row, -1]
    y = np.maximum(x[:n], 0.0)
    duals = tableau[-1, n:n + A.shape[0]].copy()
    return LPSolution(LPStatus.OPTIMAL, y, float(c @ y), duals, pivots)


def _is_diagonal(A: np.ndarray) -> bool:
    return A.shape[0] == A.shape[1] and not np.any(A - np.diag(np.diagonal(A)))


def solve_separable_qp(c, rho: float, A, b, tol: float = 1e-10, max_sweeps: int = 20_000) -> np.ndarray:
    """
    Maximize ``sum_j (c_j y_j - rho/2 y_j**2)`` subject to ``Ay <= b``, ``y >= 0``.

    A diagonal ``A`` with nonnegative entries and ``b >= 0`` is solved by the
    clamp formula ``y_j = clamp(c_j/rho, 0, b_j/A_jj)``. Otherwise the dual is
    minimized by exact coordinate descent over the row multipliers
    (Hildreth's method) until the KKT residuals drop below ``tol``.

    Raises:
        InfeasibleProblem: If no ``y >= 0`` satisfies ``Ay <= b``.
    """
    c = _as_finite_vector(c, "QP objective")
    b = _as_finite_vector(b, "QP right-hand side")
    A = np.asarray(A, dtype=float).reshape(b.size, c.size)
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")

    if b.size == 0:
        return np.maximum(c / rho, 0.0)

    if _is_diagonal(A) and np.all(np.diagonal(A) >= 0.0) and np.all(b >= 0.0):
        d = np.diagonal(A)
        upper = np.full(c.size, np.inf)
        upper[d > 0] = b[d > 0] / d[d > 0]
        return np.clip(c / rho, 0.0, upper)

    if np.any(b < 0.0) and not solve_lp(np.zeros(c.size), A, b).is_optimal:
        raise InfeasibleProblem("no y >= 0 satisfies Ay <= b")

    mu = np.zeros(b.size)
    y = np.maximum(c / rho, 0.0)
    for sweep in range(max_sweeps):
        for i in range(b.size):
            row = A[i]
            base = c - A.T @ mu + row * mu[i]

            def slack(t: float) -> float:
                return float(b[i] - row @ np.maximum((base - row * t) / rho, 0.0))

            if slack(0.0) >= 0.0:
                mu[i] = 0.0
            else:
                hi = 1.0
                while slack(hi) < 0.0:
                    hi *= 2.0
                    if hi > 1e300:
                        raise InfeasibleProblem(f"row {i} cannot be satisfied")
                lo = 0.0
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    if slack(mid) < 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo <= 1e-16 * max(1.0, hi):
                        break
                mu[i] = hi
            y = np.maximum((c - A.T @ mu) / rho, 0.0)

        residual = b - A @ y
        violation = max(0.0, float(-residual.min()))
        complementarity = float(np.max(np.abs(mu * residual)))
        if violation <= tol and complementarity <= tol:
            logger.debug(f"separable QP converged after {sweep + 1} sweeps")
            return y

    logger.warning(
        f"separable QP stopped after {max_sweeps} sweeps "
        f"(violation {violation:.2e}, complementarity {complementarity:.2e})"
    )
    return y
