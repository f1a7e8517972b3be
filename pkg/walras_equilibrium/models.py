#!/usr/bin/env python3
"""
Data models for Walras equilibrium problems.

Contains the core immutable types used throughout the package: utility
specifications, agents, economies and price systems.
"""

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

SIMPLEX_TOL = 1e-10


class ModelError(Exception):
    """Exception raised when economy data is inconsistent at solve time."""
    pass


class ModelClass(str, Enum):
    """The three economy classes, valued as they appear in economy files."""
    EXCHANGE = "exchange"
    TWO_STAGE_DETERMINISTIC = "dynamic"
    TWO_STAGE_STOCHASTIC = "stochastic"


def frozen_array(values, ndim: int = 1) -> np.ndarray:
    """Return a read-only float copy of ``values`` with the given rank."""
    array = np.array(values, dtype=float)
    if ndim == 2 and array.size == 0:
        array = array.reshape((array.shape[0] if array.ndim else 0, 0))
    if array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    array.flags.writeable = False
    return array


def frozen_mapping(items: Mapping[str, np.ndarray], ndim: int = 1) -> Mapping[str, np.ndarray]:
    """Freeze a scenario-keyed mapping of arrays, keeping insertion order."""
    return MappingProxyType({str(k): frozen_array(v, ndim) for k, v in items.items()})


def _arrays_equal(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> bool:
    if a is None or b is None:
        return a is b
    return a.shape == b.shape and bool(np.array_equal(a, b))


def _mappings_equal(a: Mapping[str, np.ndarray], b: Mapping[str, np.ndarray]) -> bool:
    return list(a.keys()) == list(b.keys()) and all(_arrays_equal(a[k], b[k]) for k in a)


@dataclass(frozen=True, eq=False)
class CobbDouglas:
    """Cobb-Douglas utility ``prod_j x_j ** beta_j`` with weights summing to one."""
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", frozen_array(self.beta))

    @property
    def n_goods(self) -> int:
        return self.beta.size

    def normalized(self, tolerance: float = 1e-6) -> 'CobbDouglas':
        """
        Rescale the weights to sum to one when they are already within ``tolerance``.

        Sums within 1e-12 of one are left untouched so that normalizing is idempotent.
        """
        total = float(self.beta.sum())
        if total > 0 and 1e-12 < abs(total - 1.0) <= tolerance:
            return CobbDouglas(self.beta / total)
        return self

    def __eq__(self, other) -> bool:
        return isinstance(other, CobbDouglas) and _arrays_equal(self.beta, other.beta)

    def __hash__(self) -> int:
        return hash(("cobb_douglas", self.beta.tobytes()))


@dataclass(frozen=True, eq=False)
class CES:
    """Constant elasticity of substitution utility with shares ``a`` and elasticity ``b``."""
    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", frozen_array(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def n_goods(self) -> int:
        return self.a.size

    def __eq__(self, other) -> bool:
        return isinstance(other, CES) and self.b == other.b and _arrays_equal(self.a, other.a)

    def __hash__(self) -> int:
        return hash(("ces", self.a.tobytes(), self.b))


UtilitySpec = Union[CobbDouglas, CES]


@dataclass(frozen=True, eq=False)
class Agent:
    """
    A consumer with endowments, survival bounds, technology and beliefs.

    Stage-1 data (``utility1``, ``e1``, ``T1``, ``beliefs``) is keyed by scenario
    identifier and left empty for exchange economies. ``T0`` and the ``T1``
    matrices are goods x activities.
    """
    name: str
    utility0: UtilitySpec
    e0: np.ndarray
    survival_lb: np.ndarray
    utility1: Optional[UtilitySpec] = None
    e1: Mapping[str, np.ndarray] = field(default_factory=dict)
    T0: Optional[np.ndarray] = None
    T1: Mapping[str, np.ndarray] = field(default_factory=dict)
    beliefs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "e0", frozen_array(self.e0))
        object.__setattr__(self, "survival_lb", frozen_array(self.survival_lb))
        object.__setattr__(self, "e1", frozen_mapping(self.e1))
        if self.T0 is not None:
            object.__setattr__(self, "T0", frozen_array(self.T0, ndim=2))
        object.__setattr__(self, "T1", frozen_mapping(self.T1, ndim=2))
        object.__setattr__(
            self, "beliefs", MappingProxyType({str(k): float(v) for k, v in self.beliefs.items()})
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Agent):
            return NotImplemented
        return (
            self.name == other.name
            and self.utility0 == other.utility0
            and self.utility1 == other.utility1
            and _arrays_equal(self.e0, other.e0)
            and _arrays_equal(self.survival_lb, other.survival_lb)
            and _arrays_equal(self.T0, other.T0)
            and _mappings_equal(self.e1, other.e1)
            and _mappings_equal(self.T1, other.T1)
            and dict(self.beliefs) == dict(other.beliefs)
        )

    __hash__ = object.__hash__

    def belief_vector(self, scenarios: Sequence[str]) -> np.ndarray:
        """Return the agent's probabilities in scenario-list order."""
        return np.array([self.beliefs.get(xi, 0.0) for xi in scenarios], dtype=float)


@dataclass(frozen=True, eq=False)
class Economy:
    """A complete problem instance: goods, activities, scenarios and agents."""
    model_class: ModelClass
    goods: Tuple[str, ...]
    agents: Tuple[Agent, ...]
    activities: Tuple[str, ...] = ()
    scenarios: Tuple[str, ...] = ()
    name: str = "economy"

    def __post_init__(self):
        object.__setattr__(self, "model_class", ModelClass(self.model_class))
        object.__setattr__(self, "goods", tuple(str(g) for g in self.goods))
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "activities", tuple(str(a) for a in self.activities))
        object.__setattr__(self, "scenarios", tuple(str(s) for s in self.scenarios))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Economy):
            return NotImplemented
        return (
            self.model_class == other.model_class
            and self.goods == other.goods
            and self.activities == other.activities
            and self.scenarios == other.scenarios
            and self.name == other.name
            and self.agents == other.agents
        )

    __hash__ = object.__hash__

    @property
    def n_goods(self) -> int:
        return len(self.goods)

    @property
    def n_activities(self) -> int:
        return len(self.activities)

    @property
    def is_two_stage(self) -> bool:
        return self.model_class is not ModelClass.EXCHANGE

    @property
    def n_blocks(self) -> int:
        """Number of simplex blocks in a price system for this economy."""
        return 1 + (len(self.scenarios) if self.is_two_stage else 0)

    def block_labels(self) -> List[str]:
        """Labels of the price blocks in block order: ``p0`` then ``p1_<scenario>``."""
        labels = ["p0"]
        if self.is_two_stage:
            labels.extend(f"p1_{xi}" for xi in self.scenarios)
        return labels

    def aggregate_endowment0(self) -> np.ndarray:
        return np.sum([agent.e0 for agent in self.agents], axis=0)

    def aggregate_endowment1(self, scenario: str) -> np.ndarray:
        return np.sum([agent.e1[scenario] for agent in self.agents], axis=0)

    def aggregate_endowments(self) -> List[np.ndarray]:
        """Aggregate endowment of every block, in block order."""
        blocks = [self.aggregate_endowment0()]
        if self.is_two_stage:
            blocks.extend(self.aggregate_endowment1(xi) for xi in self.scenarios)
        return blocks


@dataclass(frozen=True, eq=False)
class PriceSystem:
    """Stage-0 prices plus one stage-1 price vector per scenario, each in the unit simplex."""
    p0: np.ndarray
    p1: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p0", frozen_array(self.p0))
        object.__setattr__(self, "p1", frozen_mapping(self.p1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSystem):
            return NotImplemented
        return _arrays_equal(self.p0, other.p0) and _mappings_equal(self.p1, other.p1)

    __hash__ = object.__hash__

    @property
    def scenarios(self) -> Tuple[str, ...]:
        return tuple(self.p1.keys())

    def blocks(self) -> List[np.ndarray]:
        """Price blocks in block order (stage 0, then scenarios in list order)."""
        return [self.p0] + [self.p1[xi] for xi in self.p1]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks())

    def is_in_simplex(self, tol: float = SIMPLEX_TOL) -> bool:
        """True when every block is nonnegative and sums to one within ``tol``."""
        return all(
            bool(np.all(block >= 0.0)) and abs(float(block.sum()) - 1.0) <= tol
            for block in self.blocks()
        )

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray], scenarios: Iterable[str] = ()) -> 'PriceSystem':
        """Build a price system from blocks ordered as returned by ``blocks()``."""
        scenarios = tuple(scenarios)
        if len(blocks) != 1 + len(scenarios):
            raise ValueError(f"expected {1 + len(scenarios)} price blocks, got {len(blocks)}")
        return cls(blocks[0], {xi: blocks[k + 1] for k, xi in enumerate(scenarios)})

    @classmethod
    def from_flat(cls, flat: np.ndarray, economy: Economy) -> 'PriceSystem':
        blocks = np.asarray(flat, dtype=float).reshape(economy.n_blocks, economy.n_goods)
        scenarios = economy.scenarios if economy.is_two_stage else ()
        return cls.from_blocks(list(blocks), scenarios)

    @classmethod
    def centroid(cls, economy: Economy) -> 'PriceSystem':
        """The barycenter of every simplex block."""
        n = economy.n_goods
        return cls.from_flat(np.full(economy.n_blocks * n, 1.0 / n), economy)

    def scaled(self, factor: float = 100.0) -> Dict[str, List[float]]:
        """Prices per block label multiplied by ``factor`` (100 for percentage reports)."""
        report = {"p0": [float(v) * factor for v in self.p0]}
        for xi, block in self.p1.items():
            report[f"p1_{xi}"] = [float(v) * factor for v in block]
        return report
