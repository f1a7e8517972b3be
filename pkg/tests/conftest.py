"""Shared economy builders for the test suite."""

import itertools

import numpy as np
import pytest

from walras_equilibrium.models import CES, Agent, CobbDouglas, Economy, ModelClass


def symmetric_economy(n_goods: int = 3, n_agents: int = 2, b: float = 0.5, lb: float = 1e-3) -> Economy:
    """Identical CES agents with unit endowments; equilibrium at the centroid."""
    agents = tuple(
        Agent(
            name=f"agent{k + 1}",
            utility0=CES(np.full(n_goods, 1.0 / n_goods), b),
            e0=np.ones(n_goods),
            survival_lb=np.full(n_goods, lb),
        )
        for k in range(n_agents)
    )
    return Economy(
        model_class=ModelClass.EXCHANGE,
        goods=tuple(f"g{j + 1}" for j in range(n_goods)),
        agents=agents,
        name="symmetric",
    )


def cobb_douglas_pair() -> Economy:
    """Two Cobb-Douglas traders; equilibrium p = (1.5, 1.9) / 3.4."""
    return Economy(
        model_class=ModelClass.EXCHANGE,
        goods=("grain", "cloth"),
        agents=(
            Agent("farmer", CobbDouglas([0.6, 0.4]), [3.0, 1.0], [0.0, 0.0]),
            Agent("weaver", CobbDouglas([0.3, 0.7]), [1.0, 3.0], [0.0, 0.0]),
        ),
        name="pair",
    )


def two_stage_agent(utility0=None, utility1=None, e0=(1.0, 1.0), e1=(1.0, 1.0),
                    T0=((1.0,), (0.0,)), T1=((0.0,), (1.0,)), lb=(0.0, 0.0),
                    scenarios=("base",), beliefs=None, name: str = "saver") -> Agent:
    """Two-good agent with one activity by default: store good 1, receive good 2."""
    utility0 = utility0 or CobbDouglas([0.5, 0.5])
    utility1 = utility1 or CobbDouglas([0.5, 0.5])
    beliefs = beliefs or {xi: 1.0 / len(scenarios) for xi in scenarios}
    return Agent(
        name=name,
        utility0=utility0,
        e0=e0,
        survival_lb=lb,
        utility1=utility1,
        e1={xi: e1 for xi in scenarios},
        T0=T0,
        T1={xi: T1 for xi in scenarios},
        beliefs=beliefs,
    )


def storage_economy() -> Economy:
    """Deterministic two-stage economy with a lossy storage technology."""
    T0 = np.eye(2)
    T1 = 0.5 * np.eye(2)
    agents = (
        two_stage_agent(CobbDouglas([0.6, 0.4]), CobbDouglas([0.6, 0.4]), (3.0, 1.0), (3.0, 1.0),
                        T0, T1, (0.01, 0.01), name="farmer"),
        two_stage_agent(CobbDouglas([0.3, 0.7]), CobbDouglas([0.3, 0.7]), (1.0, 3.0), (1.0, 3.0),
                        T0, T1, (0.01, 0.01), name="weaver"),
    )
    return Economy(
        model_class=ModelClass.TWO_STAGE_DETERMINISTIC,
        goods=("grain", "cloth"),
        agents=agents,
        activities=("store_grain", "store_cloth"),
        scenarios=("base",),
        name="storage",
    )


def stochastic_economy() -> Economy:
    """Two agents, two goods, one storage activity, two equally likely return scenarios."""
    scenarios = ("good", "bad")
    agents = []
    for name, e0 in (("a", (2.0, 1.0)), ("b", (1.0, 2.0))):
        agents.append(Agent(
            name=name,
            utility0=CES([0.5, 0.5], 0.5),
            e0=e0,
            survival_lb=(1e-3, 1e-3),
            utility1=CES([0.5, 0.5], 0.5),
            e1={"good": (1.0, 1.0), "bad": (1.0, 1.0)},
            T0=((1.0,), (0.0,)),
            T1={"good": ((1.2,), (0.0,)), "bad": ((0.6,), (0.0,))},
            beliefs={"good": 0.5, "bad": 0.5},
        ))
    return Economy(
        model_class=ModelClass.TWO_STAGE_STOCHASTIC,
        goods=("x", "y"),
        agents=tuple(agents),
        activities=("store_x",),
        scenarios=scenarios,
        name="stochastic",
    )


def enumerate_vertices(c, A, b):
    """Best objective over the basic feasible solutions of Ay <= b, y >= 0."""
    c, A, b = (np.asarray(v, dtype=float) for v in (c, A, b))
    m, n = A.shape
    rows = np.vstack([A, -np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n)])
    best = -np.inf
    for active in itertools.combinations(range(m + n), n):
        M = rows[list(active)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        y = np.linalg.solve(M, rhs[list(active)])
        if np.all(rows @ y <= rhs + 1e-9):
            best = max(best, float(c @ y))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def symmetric():
    return symmetric_economy()


@pytest.fixture
def pair():
    return cobb_douglas_pair()


@pytest.fixture
def storage():
    return storage_economy()


@pytest.fixture
def stochastic():
    return stochastic_economy()
