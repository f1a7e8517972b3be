#!/usr/bin/env python3
"""
Progressive Hedging for the stochastic agent's transfer problem.

Each scenario subproblem maximizes the scenario reward minus the
non-anticipativity multiplier and a proximal term around the current
belief-weighted mean. The subproblems are separable concave QPs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping

import numpy as np

from .models import Agent, PriceSystem
from .numerics import solve_separable_qp
from .transfer import reward_coefficients, transfer_bounds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HedgingOptions:
    """Progressive Hedging parameters used inside every stochastic excess-supply evaluation."""
    rho: float = 1.0
    tol: float = 1e-6
    max_iter: int = 500
    parallel: bool = False


@dataclass(frozen=True)
class PHState:
    """Iterate of Progressive Hedging after one averaging and multiplier update."""
    nu: int
    y_by_scenario: Dict[str, np.ndarray]
    y_bar: np.ndarray
    w: Dict[str, np.ndarray]
    rho: float
    residual: float

    def centering(self, beliefs: Mapping[str, float]) -> np.ndarray:
        """Belief-weighted sum of the multipliers; zero up to roundoff."""
        return sum((beliefs[xi] * self.w[xi] for xi in self.w), np.zeros_like(self.y_bar))


@dataclass
class PHResult:
    """Final transfer ``y`` (the non-anticipative mean) and the iterate history."""
    y: np.ndarray
    history: List[PHState] = field(default_factory=list)
    converged: bool = True

    @property
    def residual(self) -> float:
        return self.history[-1].residual if self.history else 0.0

    @property
    def iterations(self) -> int:
        return len(self.history)


class MaxIterExceeded(Exception):
    """Exception raised when Progressive Hedging stops before reaching its tolerance."""

    def __init__(self, residual: float, result: PHResult):
        super().__init__(f"progressive hedging stopped at residual {residual:.3e}")
        self.residual = residual
        self.result = result


def ph_scenario_coefficients(agent: Agent, p: PriceSystem, scenario: str,
                             w=None, y_bar=None, rho: float = 1.0) -> np.ndarray:
    """
    Linear coefficient of the scenario subproblem ``c(xi) = linear(xi) - w(xi) + rho * y_bar``.

    Constants are dropped; the remaining quadratic is ``-(rho/2)|y|^2``.
    """
    linear = reward_coefficients(agent, p.p0, p.p1[scenario], scenario).linear
    m = linear.size
    w = np.zeros(m) if w is None else np.asarray(w, dtype=float)
    y_bar = np.zeros(m) if y_bar is None else np.asarray(y_bar, dtype=float)
    return linear - w + rho * y_bar


class ProgressiveHedging:
    """
    Progressive Hedging solver for one agent at fixed prices.

    Scenario subproblems may run on a thread pool; the averaging and the
    multiplier update always run in scenario-list order.
    """

    def __init__(self, agent: Agent, scenarios, rho: float = 1.0, tol: float = 1e-6,
                 max_iter: int = 500, parallel: bool = False):
        if rho <= 0.0:
            raise ValueError(f"rho must be positive, got {rho}")
        self.agent = agent
        self.scenarios = tuple(scenarios)
        self.rho = rho
        self.tol = tol
        self.max_iter = max_iter
        self.parallel = parallel
        self.logger = logging.getLogger(__name__)

    def solve(self, p: PriceSystem) -> PHResult:
        """
        Alternate scenario solves and averaging until the scenario decisions agree within ``tol``.

        Raises:
            MaxIterExceeded: With the last ``PHResult`` (its ``y`` is the mean).
        """
        agent, rho = self.agent, self.rho
        A, b = transfer_bounds(agent)
        m = A.shape[1]
        beliefs = {xi: agent.beliefs.get(xi, 0.0) for xi in self.scenarios}
        weighted = [xi for xi in self.scenarios if beliefs[xi] > 0.0]

        linear = {
            xi: reward_coefficients(agent, p.p0, p.p1[xi], xi).linear for xi in self.scenarios
        }
        y_bar = np.zeros(m)
        w = {xi: np.zeros(m) for xi in self.scenarios}
        history: List[PHState] = []

        def subproblem(xi: str) -> np.ndarray:
            return solve_separable_qp(linear[xi] - w[xi] + rho * y_bar, rho, A, b)

        pool = ThreadPoolExecutor(max_workers=len(self.scenarios)) if self.parallel else None
        try:
            for nu in range(1, self.max_iter + 1):
                if pool is not None:
                    solutions = list(pool.map(subproblem, self.scenarios))
                else:
                    solutions = [subproblem(xi) for xi in self.scenarios]
                y = dict(zip(self.scenarios, solutions))

                y_bar = np.zeros(m)
                for xi in self.scenarios:
                    y_bar = y_bar + beliefs[xi] * y[xi]

                residual = max(
                    (float(np.max(np.abs(y[xi] - y_bar), initial=0.0)) for xi in weighted),
                    default=0.0,
                )
                w = {xi: w[xi] + rho * (y[xi] - y_bar) for xi in self.scenarios}
                history.append(PHState(nu, y, y_bar, w, rho, residual))
                self.logger.debug(f"PH agent {agent.name} iteration {nu}: residual {residual:.3e}")

                if residual <= self.tol:
                    return PHResult(y=y_bar, history=history, converged=True)
        finally:
            if pool is not None:
                pool.shutdown()

        result = PHResult(y=y_bar, history=history, converged=False)
        raise MaxIterExceeded(history[-1].residual if history else float("inf"), result)


def ph_solve(agent: Agent, p: PriceSystem, rho: float = 1.0, tol: float = 1e-6,
             max_iter: int = 500, parallel: bool = False) -> PHResult:
    """
    Solve the stochastic agent's transfer problem at prices ``p``.

    Args:
        agent: Two-stage agent with beliefs over ``p.scenarios``.
        p: Price system with a stage-1 block per scenario.
        rho: Proximal parameter, positive.
        tol: Stop when ``max_xi |y(xi) - y_bar|_inf <= tol``.
        max_iter: Iteration limit.
        parallel: Solve scenario subproblems on a thread pool.

    Returns:
        ``PHResult`` whose ``y`` is the belief-weighted mean transfer.

    Raises:
        MaxIterExceeded: If the tolerance is not reached in ``max_iter`` iterations.
    """
    return ProgressiveHedging(agent, p.scenarios, rho, tol, max_iter, parallel).solve(p)
