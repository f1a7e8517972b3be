#!/usr/bin/env python3
"""
Economy validation and the relatively complete recourse check.

Violations are returned as data with a path to the offending field, e.g.
``agents[1].utility0.beta: weights sum to 0.9, expected 1``.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .models import CES, Agent, CobbDouglas, Economy, ModelClass, UtilitySpec

logger = logging.getLogger(__name__)

WEIGHT_TOL = 1e-12
CES_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    """One failed invariant and where it was found."""
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def _check_vector(values: Optional[np.ndarray], n: int, path: str,
                  violations: List[Violation]) -> bool:
    if values is None:
        violations.append(Violation(path, "missing"))
        return False
    if values.shape != (n,):
        violations.append(Violation(path, f"expected {n} entries, got shape {values.shape}"))
        return False
    if not np.all(np.isfinite(values)):
        violations.append(Violation(path, "contains non-finite values"))
        return False
    negative = np.nonzero(values < 0.0)[0]
    if negative.size:
        violations.append(Violation(path, f"negative entry {values[negative[0]]:g} at index {negative[0]}"))
    return True


def _check_matrix(values: Optional[np.ndarray], shape: tuple, path: str,
                  violations: List[Violation]) -> None:
    if values is None:
        violations.append(Violation(path, "missing"))
        return
    if values.shape != shape:
        violations.append(Violation(path, f"expected shape {shape}, got {values.shape}"))
        return
    if not np.all(np.isfinite(values)):
        violations.append(Violation(path, "contains non-finite values"))
    elif np.any(values < 0.0):
        violations.append(Violation(path, "technology matrices must be nonnegative"))


def _check_utility(spec: Optional[UtilitySpec], n: int, path: str,
                   violations: List[Violation]) -> None:
    if spec is None:
        violations.append(Violation(path, "missing"))
        return
    if isinstance(spec, CobbDouglas):
        if _check_vector(spec.beta, n, f"{path}.beta", violations):
            total = float(spec.beta.sum())
            if abs(total - 1.0) > WEIGHT_TOL:
                violations.append(Violation(f"{path}.beta", f"weights sum to {total:.12g}, expected 1"))
    elif isinstance(spec, CES):
        if _check_vector(spec.a, n, f"{path}.a", violations) and not np.any(spec.a > 0.0):
            violations.append(Violation(f"{path}.a", "at least one share must be positive"))
        if not np.isfinite(spec.b) or spec.b <= 0.0:
            violations.append(Violation(f"{path}.b", f"elasticity must be positive, got {spec.b:g}"))
        elif abs(spec.b - 1.0) <= CES_UNIT_TOL:
            violations.append(Violation(f"{path}.b", "elasticity 1 is Cobb-Douglas; use a cobb_douglas utility"))
    else:
        violations.append(Violation(path, f"unsupported utility type {type(spec).__name__}"))


def _check_agent(economy: Economy, index: int, agent: Agent, violations: List[Violation]) -> None:
    n, m = economy.n_goods, economy.n_activities
    path = f"agents[{index}]"

    _check_utility(agent.utility0, n, f"{path}.utility0", violations)
    _check_vector(agent.e0, n, f"{path}.e0", violations)
    _check_vector(agent.survival_lb, n, f"{path}.survival_lb", violations)

    if not economy.is_two_stage:
        return

    _check_utility(agent.utility1, n, f"{path}.utility1", violations)
    _check_matrix(agent.T0, (n, m), f"{path}.T0", violations)
    for xi in economy.scenarios:
        if xi not in agent.e1:
            violations.append(Violation(f"{path}.e1.{xi}", "missing scenario entry"))
        else:
            _check_vector(agent.e1[xi], n, f"{path}.e1.{xi}", violations)
        if xi not in agent.T1:
            violations.append(Violation(f"{path}.T1.{xi}", "missing scenario entry"))
        else:
            _check_matrix(agent.T1[xi], (n, m), f"{path}.T1.{xi}", violations)

    unknown = [xi for xi in list(agent.e1) + list(agent.T1) + list(agent.beliefs) if xi not in economy.scenarios]
    for xi in dict.fromkeys(unknown):
        violations.append(Violation(f"{path}", f"unknown scenario '{xi}'"))

    probabilities = np.array([agent.beliefs.get(xi, 0.0) for xi in economy.scenarios])
    if np.any(probabilities < 0.0) or not np.all(np.isfinite(probabilities)):
        violations.append(Violation(f"{path}.beliefs", "probabilities must be finite and nonnegative"))
    elif abs(float(probabilities.sum()) - 1.0) > WEIGHT_TOL:
        violations.append(
            Violation(f"{path}.beliefs", f"probabilities sum to {probabilities.sum():.12g}, expected 1")
        )


def validate(economy: Economy) -> List[Violation]:
    """
    Check every invariant of an economy instance.

    Args:
        economy: Parsed economy.

    Returns:
        List of violations, empty when the economy is valid. The economy is
        not modified.
    """
    violations: List[Violation] = []
    n = economy.n_goods

    if n == 0:
        violations.append(Violation("goods", "at least one good is required"))
        return violations
    if not economy.agents:
        violations.append(Violation("agents", "at least one agent is required"))
        return violations
    if len(set(economy.goods)) != n:
        violations.append(Violation("goods", "good names must be unique"))

    if economy.model_class is ModelClass.EXCHANGE:
        if economy.n_activities:
            violations.append(Violation("activities", "exchange economies have no activities"))
    else:
        if not economy.scenarios:
            violations.append(Violation("scenarios", "two-stage economies need at least one scenario"))
        if len(set(economy.scenarios)) != len(economy.scenarios):
            violations.append(Violation("scenarios", "scenario identifiers must be unique"))
        if economy.model_class is ModelClass.TWO_STAGE_DETERMINISTIC and len(economy.scenarios) > 1:
            violations.append(Violation("scenarios", "deterministic economies have exactly one scenario"))

    for index, agent in enumerate(economy.agents):
        _check_agent(economy, index, agent, violations)

    if violations:
        return violations

    # aggregate checks need well-formed agents
    blocks = [("e0", economy.aggregate_endowment0())]
    if economy.is_two_stage:
        blocks.extend((f"e1.{xi}", economy.aggregate_endowment1(xi)) for xi in economy.scenarios)

    for j in np.nonzero(blocks[0][1] <= 0.0)[0]:
        violations.append(Violation(f"goods[{j}]", f"good '{economy.goods[j]}' has zero aggregate endowment"))

    for index, agent in enumerate(economy.agents):
        for label, cap in blocks:
            over = np.nonzero(agent.survival_lb > cap)[0]
            for j in over:
                violations.append(Violation(
                    f"agents[{index}].survival_lb",
                    f"floor {agent.survival_lb[j]:g} of good '{economy.goods[j]}' exceeds "
                    f"the aggregate {label} of {cap[j]:g}",
                ))
    return violations


@dataclass(frozen=True)
class RecourseReport:
    """Outcome of the recourse check for one agent, with the witness tested."""
    agent: str
    ok: bool
    x0: np.ndarray
    y: np.ndarray
    x1: Dict[str, np.ndarray] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)


def check_recourse(economy: Economy) -> List[RecourseReport]:
    """
    Test the canonical recourse witness for every agent.

    The witness is ``x0 = survival_lb``, ``y = 0`` and ``x1 = survival_lb``
    per scenario; it is feasible when ``e0 >= survival_lb`` and
    ``e1 >= survival_lb`` in every scenario. A failure names the good.

    Raises:
        ValueError: If the economy is an exchange economy.
    """
    if not economy.is_two_stage:
        raise ValueError("recourse check applies to two-stage economies only")

    reports = []
    for agent in economy.agents:
        lb = agent.survival_lb
        failures = [
            f"stage 0, good '{economy.goods[j]}': endowment {agent.e0[j]:g} below floor {lb[j]:g}"
            for j in np.nonzero(agent.e0 - lb < 0.0)[0]
        ]
        for xi in economy.scenarios:
            stock = agent.e1[xi]
            failures.extend(
                f"scenario {xi}, good '{economy.goods[j]}': endowment {stock[j]:g} below floor {lb[j]:g}"
                for j in np.nonzero(stock - lb < 0.0)[0]
            )

        report = RecourseReport(
            agent=agent.name,
            ok=not failures,
            x0=lb.copy(),
            y=np.zeros(economy.n_activities),
            x1={xi: lb.copy() for xi in economy.scenarios},
            failures=failures,
        )
        if failures:
            logger.warning(f"Recourse witness fails for agent {agent.name}: {failures[0]}")
        reports.append(report)
    return reports
