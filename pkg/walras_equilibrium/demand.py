#!/usr/bin/env python3
"""
Agent demand under a budget constraint with box bounds.

Cobb-Douglas and CES utilities have closed-form interior demands. When the
survival floor or the demand cap binds, the KKT demand path
``x_j(lam) = clamp(g_j(lam), lb_j, cap_j)`` is decreasing in the budget
multiplier ``lam`` and the budget equation is solved by geometric bisection.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple

import numpy as np

from .models import CES, CobbDouglas, ModelError, UtilitySpec

logger = logging.getLogger(__name__)

BUDGET_TOL = 1e-12
BISECTION_STEPS = 200


class InfeasibleBudget(ModelError):
    """Exception raised when wealth cannot pay for the survival floor."""
    pass


class BoundFlag(str, Enum):
    LOWER = "lower-bound-active"
    UPPER = "upper-bound-active"
    INTERIOR = "interior"


@dataclass(frozen=True)
class DemandResult:
    """Optimal consumption bundle and the bookkeeping around it."""
    x: np.ndarray
    spent: float
    utility: float
    boundary_flags: Tuple[BoundFlag, ...]
    wealth: float

    @property
    def cap_binds(self) -> bool:
        return BoundFlag.UPPER in self.boundary_flags


def utility_value(spec: UtilitySpec, x) -> float:
    """
    Evaluate a Cobb-Douglas or CES utility at ``x``.

    Cobb-Douglas uses the product form, so a zero component with positive
    weight gives 0 rather than minus infinity.

    Raises:
        ValueError: If ``x`` has a negative component.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError(f"utility is undefined for negative consumption {x.tolist()}")

    if isinstance(spec, CobbDouglas):
        return float(np.prod(np.power(x, spec.beta)))

    exponent = (spec.b - 1.0) / spec.b
    held = spec.a > 0.0
    with np.errstate(divide="ignore"):
        terms = np.power(spec.a[held], 1.0 / spec.b) * np.power(x[held], exponent)
        total = float(terms.sum())
        if total == 0.0 or np.isinf(total):
            # zero consumption of a held good: 0 for b > 1 sums, inf for b < 1 sums
            return 0.0
        return float(total ** (spec.b / (spec.b - 1.0)))


def _flags(x: np.ndarray, lb: np.ndarray, cap: np.ndarray) -> Tuple[BoundFlag, ...]:
    flags = []
    for xj, lj, cj in zip(x, lb, cap):
        if xj >= cj and cj > lj:
            flags.append(BoundFlag.UPPER)
        elif xj <= lj:
            flags.append(BoundFlag.LOWER)
        else:
            flags.append(BoundFlag.INTERIOR)
    return tuple(flags)


def _check_inputs(p: np.ndarray, wealth: float, lb: np.ndarray, cap: np.ndarray) -> None:
    if not (p.shape == lb.shape == cap.shape):
        raise ValueError(f"shape mismatch: p {p.shape}, lb {lb.shape}, cap {cap.shape}")
    if not np.all(np.isfinite(p)) or not np.isfinite(wealth):
        raise ValueError("non-finite prices or wealth")
    floor_cost = float(p @ lb)
    if wealth < floor_cost - BUDGET_TOL:
        raise InfeasibleBudget(f"wealth {wealth:.6g} below survival cost {floor_cost:.6g}")


def _solve_budget(path: Callable[[float], np.ndarray], lam0: float, p: np.ndarray,
                  wealth: float, lb: np.ndarray, saturated: np.ndarray) -> np.ndarray:
    """
    Find the multiplier at which the clamped demand path exhausts ``wealth``.

    ``saturated`` is the limit of the path as the multiplier goes to zero: the
    cap for goods the agent values, the floor for the others.
    """
    if float(p @ saturated) <= wealth:
        return saturated.copy()
    if wealth <= float(p @ lb):
        return lb.copy()

    def spend(lam: float) -> float:
        return float(p @ path(lam))

    lo = hi = lam0 if np.isfinite(lam0) and lam0 > 0 else 1.0
    while spend(lo) < wealth:
        lo *= 0.5
        if lo < 1e-300:
            break
    while spend(hi) > wealth:
        hi *= 2.0
        if hi > 1e300:
            break

    spend_lo, spend_hi = spend(lo), spend(hi)
    for _ in range(BISECTION_STEPS):
        mid = np.sqrt(lo * hi)
        spend_mid = spend(mid)
        if spend_mid > spend_lo + BUDGET_TOL * wealth or spend_mid < spend_hi - BUDGET_TOL * wealth:
            raise RuntimeError("budget path is not monotone in the multiplier")
        if abs(spend_mid - wealth) <= BUDGET_TOL * wealth:
            return path(mid)
        if spend_mid > wealth:
            lo, spend_lo = mid, spend_mid
        else:
            hi, spend_hi = mid, spend_mid
        if hi <= lo * (1.0 + 1e-16):
            break
    return path(hi)


def demand_cobb_douglas(beta, p, wealth: float, lb, cap) -> DemandResult:
    """
    Cobb-Douglas demand with survival floor and demand cap.

    Interior solution ``x_j = beta_j * wealth / p_j``; goods with zero weight
    are consumed at their floor.

    Raises:
        InfeasibleBudget: If ``wealth < <p, lb>``.
    """
    beta = np.asarray(beta, dtype=float)
    p, lb, cap = (np.asarray(v, dtype=float) for v in (p, lb, cap))
    _check_inputs(p, wealth, lb, cap)

    weighted = beta > 0.0
    x = np.where(weighted, beta * wealth / np.where(weighted, p, 1.0), 0.0)
    if not (np.all(weighted | (lb <= 0.0)) and np.all(x >= lb) and np.all(x <= cap)):
        def path(lam: float) -> np.ndarray:
            with np.errstate(over="ignore", divide="ignore"):
                raw = np.where(weighted, beta / (lam * np.where(weighted, p, 1.0)), 0.0)
            return np.clip(raw, lb, cap)

        lam0 = 1.0 / wealth if wealth > 0 else 1.0
        x = _solve_budget(path, lam0, p, wealth, lb, np.where(weighted, cap, lb))

    return DemandResult(
        x=x,
        spent=float(p @ x),
        utility=utility_value(CobbDouglas(beta), x),
        boundary_flags=_flags(x, lb, cap),
        wealth=float(wealth),
    )


def demand_ces(a, b: float, p, wealth: float, lb, cap) -> DemandResult:
    """
    CES demand with survival floor and demand cap.

    Interior solution ``x_j = a_j * wealth / (p_j**b * sum_k p_k**(1-b) a_k)``,
    which exhausts the budget.

    Raises:
        InfeasibleBudget: If ``wealth < <p, lb>``.
    """
    a = np.asarray(a, dtype=float)
    p, lb, cap = (np.asarray(v, dtype=float) for v in (p, lb, cap))
    _check_inputs(p, wealth, lb, cap)

    scale = float(np.sum(np.power(p, 1.0 - b) * a))
    x = a * wealth / (np.power(p, b) * scale)
    if not (np.all(x >= lb) and np.all(x <= cap)):
        def path(lam: float) -> np.ndarray:
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                raw = np.where(a > 0.0, a * np.power(lam * p, -b), 0.0)
            return np.clip(raw, lb, cap)

        lam0 = (scale / wealth) ** (1.0 / b) if wealth > 0 else 1.0
        x = _solve_budget(path, lam0, p, wealth, lb, np.where(a > 0.0, cap, lb))

    return DemandResult(
        x=x,
        spent=float(p @ x),
        utility=utility_value(CES(a, b), x),
        boundary_flags=_flags(x, lb, cap),
        wealth=float(wealth),
    )


def demand(spec: UtilitySpec, p, wealth: float, lb, cap) -> DemandResult:
    """Dispatch to the closed-form demand of the utility family."""
    if isinstance(spec, CobbDouglas):
        return demand_cobb_douglas(spec.beta, p, wealth, lb, cap)
    if isinstance(spec, CES):
        return demand_ces(spec.a, spec.b, p, wealth, lb, cap)
    raise TypeError(f"unsupported utility specification {type(spec).__name__}")
