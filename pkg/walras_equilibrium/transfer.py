#!/usr/bin/env python3
"""
Two-stage agent problem through the transfer-first reduction.

For a fixed activity vector ``y`` the two-stage problem splits into two
static demand problems. With Cobb-Douglas or CES utilities the optimal
utility per unit of wealth is a price multiplier (alpha or theta), so the
reward ``r(y) = u0(x0(y)) + u1(x1(y))`` is affine in ``y`` and the best
``y`` solves a small linear program.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .demand import DemandResult, demand
from .models import CES, Agent, CobbDouglas, ModelError, UtilitySpec
from .numerics import LPStatus, solve_lp

logger = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-10


def stage_multiplier(spec: UtilitySpec, p) -> float:
    """
    Utility attained per unit of wealth by the interior demand at prices ``p``.

    Cobb-Douglas: ``alpha(p) = prod_j (beta_j / p_j) ** beta_j``.
    CES: ``theta(p) = (sum_k a_k p_k ** (1 - b)) ** (1 / (b - 1))``.
    """
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise ValueError(f"stage multiplier needs positive finite prices, got {p.tolist()}")
    if isinstance(spec, CobbDouglas):
        return float(np.prod(np.power(spec.beta / p, spec.beta)))
    if isinstance(spec, CES):
        scale = float(np.sum(spec.a * np.power(p, 1.0 - spec.b)))
        return float(scale ** (1.0 / (spec.b - 1.0)))
    raise TypeError(f"unsupported utility specification {type(spec).__name__}")


@dataclass(frozen=True)
class RewardCoefficients:
    """Affine reward ``r(y) = constant + <linear, y>`` with its stage multipliers."""
    constant: float
    linear: np.ndarray
    stage0: float
    stage1: float

    def value(self, y) -> float:
        return float(self.constant + self.linear @ np.asarray(y, dtype=float))


def _scenario(agent: Agent, scenario: Optional[str]) -> str:
    if scenario is not None:
        return scenario
    if not agent.e1:
        raise ModelError(f"agent {agent.name} has no stage-1 data")
    return next(iter(agent.e1))


def reward_coefficients(agent: Agent, p0, p1, scenario: Optional[str] = None) -> RewardCoefficients:
    """
    Affine coefficients of the agent's two-stage reward at prices ``(p0, p1)``.

    Args:
        agent: Two-stage agent.
        p0: Stage-0 prices.
        p1: Stage-1 prices of ``scenario``.
        scenario: Stage-1 scenario; defaults to the agent's first (only) one.

    Returns:
        ``constant = a0 <p0, e0> + a1 <p1, e1>`` and
        ``linear = -a0 T0' p0 + a1 T1' p1``.
    """
    scenario = _scenario(agent, scenario)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    a0 = stage_multiplier(agent.utility0, p0)
    a1 = stage_multiplier(agent.utility1, p1)

    constant = a0 * float(p0 @ agent.e0) + a1 * float(p1 @ agent.e1[scenario])
    linear = -a0 * (agent.T0.T @ p0) + a1 * (agent.T1[scenario].T @ p1)
    return RewardCoefficients(constant=constant, linear=linear, stage0=a0, stage1=a1)


def transfer_bounds(agent: Agent) -> Tuple[np.ndarray, np.ndarray]:
    """
    Feasible set of activities as ``(T0, e0 - survival_lb)`` for ``T0 y <= bound``.

    Reserving the survival floor keeps stage-0 wealth above the cost of
    the floor at every price; with a zero floor this is ``T0 y <= e0``.
    """
    return agent.T0, np.maximum(agent.e0 - agent.survival_lb, 0.0)


def solve_transfer(agent: Agent, p0, p1, scenario: Optional[str] = None) -> np.ndarray:
    """
    Best activity vector for the deterministic two-stage agent.

    Returns ``y = 0`` when no activity has a positive reward coefficient.

    Raises:
        ModelError: If an activity with positive reward consumes no stage-0
            goods (unbounded LP).
    """
    coefficients = reward_coefficients(agent, p0, p1, scenario)
    linear = coefficients.linear
    if linear.size == 0 or np.all(linear <= 0.0):
        return np.zeros(linear.size)

    A, b = transfer_bounds(agent)
    solution = solve_lp(linear, A, b)
    if solution.status is LPStatus.UNBOUNDED:
        free = [k for k in range(linear.size) if linear[k] > 0.0 and np.all(A[:, k] <= 0.0)]
        raise ModelError(
            f"agent {agent.name}: activity {free[0] if free else '?'} is profitable "
            f"and uses no stage-0 goods (unbounded transfer problem)"
        )
    if solution.status is LPStatus.INFEASIBLE:
        raise ModelError(f"agent {agent.name}: transfer problem infeasible")
    return solution.x


def stage_demands(agent: Agent, p0, p1, y, cap0=None, cap1=None,
                  scenario: Optional[str] = None) -> Tuple[DemandResult, DemandResult]:
    """
    Stage-0 and stage-1 demands for a fixed activity vector ``y``.

    Stage-0 wealth is ``<p0, e0 - T0 y>``, stage-1 wealth ``<p1, e1 + T1 y>``.
    Caps default to no cap.

    Raises:
        ModelError: If ``T0 y`` exceeds the stage-0 endowment of some good.
    """
    scenario = _scenario(agent, scenario)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    y = np.asarray(y, dtype=float)
    n = agent.e0.size
    cap0 = np.full(n, np.inf) if cap0 is None else cap0
    cap1 = np.full(n, np.inf) if cap1 is None else cap1

    used = agent.T0 @ y
    over = np.nonzero(used > agent.e0 + FEASIBILITY_TOL)[0]
    if over.size:
        raise ModelError(
            f"agent {agent.name}: activities use {used[over[0]]:.6g} of good {over[0]} "
            f"but only {agent.e0[over[0]]:.6g} is endowed"
        )

    residual0 = np.maximum(agent.e0 - used, 0.0)
    stock1 = agent.e1[scenario] + agent.T1[scenario] @ y
    x0 = demand(agent.utility0, p0, float(p0 @ residual0), agent.survival_lb, cap0)
    x1 = demand(agent.utility1, p1, float(p1 @ stock1), agent.survival_lb, cap1)
    return x0, x1
