#!/usr/bin/env python3
"""
Excess supply, the Walrasian bifunction and its augmented form.

The augmented Walrasian of a block is
``min_z { <z, s> + |z - q|^2 / (2r) : z in simplex }``; completing the
square turns the minimizer into the projection of ``q - r s`` onto the
simplex, so the oracle is exact and cheap.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional

import numpy as np

from .demand import DemandResult, demand
from .hedging import HedgingOptions, MaxIterExceeded, ph_solve
from .models import Agent, Economy, ModelClass, PriceSystem, frozen_array, frozen_mapping
from .numerics import LPStatus, project_simplex, solve_lp
from .transfer import solve_transfer, stage_demands

logger = logging.getLogger(__name__)


class AugmentingKind(str, Enum):
    """Proximal term of the augmented Walrasian."""
    SELF_DUAL = "self_dual"
    LINF_BALL = "linf_ball"


@dataclass(frozen=True, eq=False)
class ExcessSupply:
    """Excess supply per block: stage 0 and one vector per stage-1 scenario."""
    s0: np.ndarray
    s1: Mapping[str, np.ndarray] = field(default_factory=dict)
    cap_binds: bool = False

    def __post_init__(self):
        object.__setattr__(self, "s0", frozen_array(self.s0))
        object.__setattr__(self, "s1", frozen_mapping(self.s1))

    def blocks(self) -> List[np.ndarray]:
        return [self.s0] + [self.s1[xi] for xi in self.s1]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks())


@dataclass(frozen=True)
class AugmentedWalrasianEval:
    """Value of the augmented Walrasian and its inner minimizer, one block per price block."""
    value: float
    z_star: PriceSystem
    r: float


@dataclass
class AgentPlan:
    """An agent's choices at given prices."""
    agent: str
    x0: DemandResult
    x1: Dict[str, DemandResult] = field(default_factory=dict)
    y: Optional[np.ndarray] = None
    ph_residual: Optional[float] = None
    ph_iterations: int = 0


@dataclass
class MarketEvaluation:
    """Excess supply at ``p`` together with the agent plans that produced it."""
    prices: PriceSystem
    excess: ExcessSupply
    plans: List[AgentPlan]

    @property
    def ph_residuals(self) -> Dict[str, float]:
        return {plan.agent: plan.ph_residual for plan in self.plans if plan.ph_residual is not None}


def _check_prices(p: PriceSystem, economy: Economy) -> None:
    if p.p0.size != economy.n_goods:
        raise ValueError(f"price block p0 has {p.p0.size} entries for {economy.n_goods} goods")
    if economy.is_two_stage and tuple(p.scenarios) != economy.scenarios:
        raise ValueError(f"price scenarios {p.scenarios} do not match economy scenarios {economy.scenarios}")


def _exchange_plan(agent: Agent, p: PriceSystem, cap0: np.ndarray) -> AgentPlan:
    wealth = float(p.p0 @ agent.e0)
    return AgentPlan(agent.name, demand(agent.utility0, p.p0, wealth, agent.survival_lb, cap0))


def _deterministic_plan(agent: Agent, p: PriceSystem, cap0: np.ndarray,
                        caps1: Dict[str, np.ndarray]) -> AgentPlan:
    xi = next(iter(caps1))
    y = solve_transfer(agent, p.p0, p.p1[xi], xi)
    x0, x1 = stage_demands(agent, p.p0, p.p1[xi], y, cap0, caps1[xi], xi)
    return AgentPlan(agent.name, x0, {xi: x1}, y)


def _stochastic_plan(agent: Agent, p: PriceSystem, cap0: np.ndarray,
                     caps1: Dict[str, np.ndarray], hedging: HedgingOptions,
                     accept_inexact: bool) -> AgentPlan:
    try:
        result = ph_solve(agent, p, hedging.rho, hedging.tol, hedging.max_iter, hedging.parallel)
    except MaxIterExceeded as e:
        if not accept_inexact:
            raise
        logger.warning(
            f"Progressive hedging for agent {agent.name} stopped at residual {e.residual:.3e}; using the mean transfer"
        )
        result = e.result

    y = result.y
    x1 = {}
    x0 = None
    for xi in p.scenarios:
        x0_xi, x1[xi] = stage_demands(agent, p.p0, p.p1[xi], y, cap0, caps1[xi], xi)
        x0 = x0 if x0 is not None else x0_xi
    return AgentPlan(agent.name, x0, x1, y, result.residual, result.iterations)


def evaluate_market(economy: Economy, p: PriceSystem,
                    hedging: Optional[HedgingOptions] = None,
                    accept_inexact: bool = True) -> MarketEvaluation:
    """
    Solve every agent's problem at ``p`` and aggregate the excess supply.

    Agents are reduced in list order. Demand caps are the aggregate
    endowment of the stage or scenario.

    Args:
        economy: Validated economy.
        p: Price system with positive prices in every block.
        hedging: Progressive Hedging parameters for stochastic economies.
        accept_inexact: Use the mean transfer when Progressive Hedging hits
            its iteration limit instead of raising ``MaxIterExceeded``.

    Raises:
        InfeasibleBudget: If an agent cannot afford its survival floor.
        ModelError: If a transfer problem is unbounded.
        MaxIterExceeded: If ``accept_inexact`` is False and PH does not converge.
    """
    _check_prices(p, economy)
    hedging = hedging or HedgingOptions()

    cap0 = economy.aggregate_endowment0()
    caps1 = {xi: economy.aggregate_endowment1(xi) for xi in economy.scenarios} if economy.is_two_stage else {}

    plans = []
    for agent in economy.agents:
        if economy.model_class is ModelClass.EXCHANGE:
            plans.append(_exchange_plan(agent, p, cap0))
        elif economy.model_class is ModelClass.TWO_STAGE_DETERMINISTIC:
            plans.append(_deterministic_plan(agent, p, cap0, caps1))
        else:
            plans.append(_stochastic_plan(agent, p, cap0, caps1, hedging, accept_inexact))

    s0 = cap0.copy()
    s1 = {xi: caps1[xi].copy() for xi in caps1}
    cap_binds = False
    for agent, plan in zip(economy.agents, plans):
        s0 -= plan.x0.x
        cap_binds = cap_binds or plan.x0.cap_binds
        if plan.y is not None:
            s0 -= agent.T0 @ plan.y
        for xi, x1 in plan.x1.items():
            s1[xi] += agent.T1[xi] @ plan.y - x1.x
            cap_binds = cap_binds or x1.cap_binds

    return MarketEvaluation(p, ExcessSupply(s0, s1, cap_binds), plans)


def excess_supply(economy: Economy, p: PriceSystem,
                  hedging: Optional[HedgingOptions] = None) -> ExcessSupply:
    """Aggregate endowment minus demand (and net activity use) at ``p``, per block."""
    return evaluate_market(economy, p, hedging).excess


def _conformal(s: ExcessSupply, q: PriceSystem) -> List[tuple]:
    s_blocks, q_blocks = s.blocks(), q.blocks()
    if len(s_blocks) != len(q_blocks) or any(a.shape != b.shape for a, b in zip(s_blocks, q_blocks)):
        raise ValueError(
            f"excess supply blocks {[b.size for b in s_blocks]} do not match "
            f"price blocks {[b.size for b in q_blocks]}"
        )
    return list(zip(s_blocks, q_blocks))


def walrasian_value(s: ExcessSupply, q: PriceSystem) -> float:
    """Sum over blocks of ``<q_block, s_block>``."""
    return float(sum(float(qb @ sb) for sb, qb in _conformal(s, q)))


def _linf_ball_minimizer(s: np.ndarray, q: np.ndarray, r: float) -> np.ndarray:
    """Minimize ``<z, s>`` over the simplex intersected with ``|z - q|_inf <= r``."""
    n = s.size
    low = np.maximum(q - r, 0.0)
    high = np.minimum(q + r, 1.0)
    remaining = 1.0 - float(low.sum())

    # z = low + u with 0 <= u <= high - low and sum(u) = remaining
    A = np.vstack([np.eye(n), np.ones((1, n)), -np.ones((1, n))])
    b = np.concatenate([high - low, [remaining, -remaining]])
    solution = solve_lp(-s, A, b)
    if solution.status is not LPStatus.OPTIMAL:
        raise RuntimeError(f"l-infinity ball subproblem {solution.status.value}")
    return low + solution.x


def augmented_walrasian(s: ExcessSupply, q: PriceSystem, r: float,
                        kind: AugmentingKind = AugmentingKind.SELF_DUAL) -> AugmentedWalrasianEval:
    """
    Evaluate the augmented Walrasian at ``(p, q)`` from the excess supply ``s = s(p)``.

    Args:
        s: Excess supply at the primal point.
        q: Dual price system, block-conformal with ``s``.
        r: Augmenting parameter, positive.
        kind: ``SELF_DUAL`` (projection form) or ``LINF_BALL`` (LP over the
            ball of radius ``r`` around ``q``).

    Returns:
        The value and the blockwise minimizer ``z*``.
    """
    if not r > 0.0:
        raise ValueError(f"augmenting parameter must be positive, got {r}")

    kind = AugmentingKind(kind)
    value = 0.0
    minimizers = []
    for sb, qb in _conformal(s, q):
        if kind is AugmentingKind.SELF_DUAL:
            z = project_simplex(qb - r * sb)
            gap = z - qb
            value += float(z @ sb) + float(gap @ gap) / (2.0 * r)
        else:
            z = _linf_ball_minimizer(sb, qb, r)
            value += float(z @ sb)
        minimizers.append(z)

    return AugmentedWalrasianEval(value, PriceSystem.from_blocks(minimizers, q.scenarios), r)


def residual(s: ExcessSupply) -> float:
    """Worst excess demand ``max(0, -min_j s_j)``; zero exactly at an equilibrium."""
    return max(0.0, -float(np.min(s.flat)))
