#!/usr/bin/env python3
"""
Solver configuration.

Defaults are overridden by ``WALRAS_*`` environment variables, which the
command line overrides in turn.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional

from .hedging import HedgingOptions
from .walrasian import AugmentingKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Phase2Options:
    """Trust-region price-step parameters."""
    max_evals: int = 1000
    step_init: float = 0.05
    step_tol: float = 1e-11


@dataclass(frozen=True)
class SolverConfig:
    """Every tunable of the outer augmented-Walrasian iteration."""
    epsilon: float = 1e-6
    r0: float = 1.0
    r_growth: float = 1.259
    r_max: float = 1e8
    max_outer_iters: int = 500
    delta: float = 1e-6
    multistart_k: int = 1
    seed: int = 0
    workers: int = 1
    augmenting: AugmentingKind = AugmentingKind.SELF_DUAL
    phase2: Phase2Options = field(default_factory=Phase2Options)
    ph: HedgingOptions = field(default_factory=HedgingOptions)

    def validate(self, n_goods: int) -> None:
        """
        Check the configuration against an economy with ``n_goods`` goods.

        Raises:
            ValueError: On the first violated constraint.
        """
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if not self.r_growth > 1:
            raise ValueError(f"r_growth must exceed 1, got {self.r_growth}")
        if not self.r_max >= self.r0:
            raise ValueError(f"r_max {self.r_max} is below r0 {self.r0}")
        if not 0 < self.delta < 1.0 / n_goods:
            raise ValueError(f"delta must lie in (0, 1/{n_goods}), got {self.delta}")
        if self.max_outer_iters < 1:
            raise ValueError(f"max_outer_iters must be at least 1, got {self.max_outer_iters}")
        if self.multistart_k < 1:
            raise ValueError(f"multistart_k must be at least 1, got {self.multistart_k}")
        if self.workers < 1:
            raise ValueError(f"workers must be at least 1, got {self.workers}")
        if self.phase2.max_evals < 1 or not self.phase2.step_init > self.phase2.step_tol > 0:
            raise ValueError(f"invalid phase2 options {self.phase2}")
        if not self.ph.rho > 0 or not self.ph.tol > 0 or self.ph.max_iter < 1:
            raise ValueError(f"invalid progressive hedging options {self.ph}")

    def with_overrides(self, **overrides: Any) -> 'SolverConfig':
        """
        Return a copy with the given fields replaced; ``None`` values are ignored.

        Keys prefixed ``phase2_`` or ``ph_`` update the nested options.
        """
        top: Dict[str, Any] = {}
        phase2: Dict[str, Any] = {}
        ph: Dict[str, Any] = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key.startswith("phase2_"):
                phase2[key[len("phase2_"):]] = value
            elif key.startswith("ph_"):
                ph[key[len("ph_"):]] = value
            else:
                top[key] = value
        if "augmenting" in top:
            top["augmenting"] = AugmentingKind(top["augmenting"])
        return replace(
            self,
            phase2=replace(self.phase2, **phase2),
            ph=replace(self.ph, **ph),
            **top,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Plain representation echoed in summary reports."""
        return {
            "epsilon": self.epsilon,
            "r0": self.r0,
            "r_growth": self.r_growth,
            "r_max": self.r_max,
            "max_outer_iters": self.max_outer_iters,
            "delta": self.delta,
            "multistart_k": self.multistart_k,
            "seed": self.seed,
            "workers": self.workers,
            "augmenting": self.augmenting.value,
            "phase2": {
                "max_evals": self.phase2.max_evals,
                "step_init": self.phase2.step_init,
                "step_tol": self.phase2.step_tol,
            },
            "ph": {
                "rho": self.ph.rho,
                "tol": self.ph.tol,
                "max_iter": self.ph.max_iter,
                "parallel": self.ph.parallel,
            },
        }


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# environment variable -> (config field, parser)
ENVIRONMENT_FIELDS: Dict[str, tuple] = {
    "WALRAS_EPSILON": ("epsilon", float),
    "WALRAS_R0": ("r0", float),
    "WALRAS_R_GROWTH": ("r_growth", float),
    "WALRAS_R_MAX": ("r_max", float),
    "WALRAS_MAX_ITERS": ("max_outer_iters", int),
    "WALRAS_DELTA": ("delta", float),
    "WALRAS_MULTISTART": ("multistart_k", int),
    "WALRAS_SEED": ("seed", int),
    "WALRAS_WORKERS": ("workers", int),
    "WALRAS_AUGMENTING": ("augmenting", AugmentingKind),
    "WALRAS_PHASE2_MAX_EVALS": ("phase2_max_evals", int),
    "WALRAS_PHASE2_STEP_INIT": ("phase2_step_init", float),
    "WALRAS_PHASE2_STEP_TOL": ("phase2_step_tol", float),
    "WALRAS_PH_RHO": ("ph_rho", float),
    "WALRAS_PH_TOL": ("ph_tol", float),
    "WALRAS_PH_MAX_ITER": ("ph_max_iter", int),
    "WALRAS_PH_PARALLEL": ("ph_parallel", _parse_bool),
}


def load_configuration(environ: Optional[Mapping[str, str]] = None) -> SolverConfig:
    """
    Load solver configuration from environment variables.

    Args:
        environ: Mapping to read instead of ``os.environ``.

    Returns:
        The default ``SolverConfig`` with every set ``WALRAS_*`` variable applied.

    Raises:
        ValueError: If a variable cannot be parsed; the message names it.
    """
    environ = os.environ if environ is None else environ
    overrides: Dict[str, Any] = {}
    for variable, (name, parse) in ENVIRONMENT_FIELDS.items():
        raw = environ.get(variable)
        if raw is None or raw.strip() == "":
            continue
        try:
            overrides[name] = parse(raw.strip())
        except ValueError as e:
            raise ValueError(f"{variable} has an invalid value {raw!r}: {e}") from e
        logger.debug(f"Configuration {name} = {overrides[name]} from {variable}")
    return SolverConfig().with_overrides(**overrides)


def get_log_level(environ: Optional[Mapping[str, str]] = None, default: str = "INFO") -> int:
    """
    Resolve the logging level named by ``WALRAS_LOG_LEVEL``.

    Raises:
        ValueError: If the variable names an unknown level.
    """
    environ = os.environ if environ is None else environ
    name = environ.get("WALRAS_LOG_LEVEL", default).strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ValueError(f"WALRAS_LOG_LEVEL has an unknown level {name!r}")
    return level
