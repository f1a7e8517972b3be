#!/usr/bin/env python3
"""
Outer augmented-Walrasian iteration.

Each outer iteration evaluates the excess supply at the current prices,
takes the dual step (the simplex vertex of the most negative excess supply
in every block), then the primal step (a trust-region local maximization
of the augmented Walrasian over the product of price simplices), and raises
the augmenting parameter geometrically until the worst excess demand is
below ``epsilon``.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import Phase2Options, SolverConfig
from .demand import InfeasibleBudget
from .hedging import HedgingOptions
from .models import Economy, ModelError, PriceSystem
from .numerics import min_vertex, project_simplex, solve_lp
from .validation import validate
from .walrasian import (
    AgentPlan,
    AugmentingKind,
    ExcessSupply,
    MarketEvaluation,
    augmented_walrasian,
    evaluate_market,
    residual,
    walrasian_value,
)

logger = logging.getLogger(__name__)

WALRAS_LAW_TOL = 1e-8
CACHE_DECIMALS = 12
JACOBIAN_STEP = 1e-7
STATIONARY_GAIN = 1e-14
MODEL_ROUNDS = 50
MODEL_GAP = 0.1

StartSpec = Union[str, PriceSystem, Sequence[float]]


class Phase2Stalled(Exception):
    """Exception raised when the price step finds no point better than its start."""

    def __init__(self, p_start: PriceSystem, value: float):
        super().__init__(f"price step found no improvement over value {value:.6e}")
        self.p_start = p_start
        self.value = value


class SolveStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"


@dataclass
class IterationRecord:
    """State after one outer iteration: the new prices, the dual point and diagnostics."""
    nu: int
    r: float
    p: PriceSystem
    q: PriceSystem
    s: ExcessSupply
    residual: float
    walrasian_value: float
    augmented_value: float
    walras_law: List[float]
    phase1_ms: float
    phase2_ms: float
    evaluations: int = 0
    stalled: bool = False
    ph_residuals: Dict[str, float] = field(default_factory=dict)


@dataclass
class SolveTrace:
    """Per-iteration records and the final status of one solve."""
    start: PriceSystem
    start_residual: float
    records: List[IterationRecord] = field(default_factory=list)
    status: SolveStatus = SolveStatus.MAX_ITER
    final_residual: float = float("inf")
    elapsed: float = 0.0
    start_index: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED


def floor_prices(p: PriceSystem, delta: float) -> PriceSystem:
    """Raise every price to at least ``delta`` and renormalize each block."""
    blocks = []
    for block in p.blocks():
        floored = np.maximum(block, delta)
        blocks.append(floored / floored.sum())
    return PriceSystem.from_blocks(blocks, p.scenarios)


def normalize_prices(p: PriceSystem) -> PriceSystem:
    """Divide each block by its sum."""
    return PriceSystem.from_blocks([block / block.sum() for block in p.blocks()], p.scenarios)


class MarketOracle:
    """Excess-supply evaluations memoized on prices rounded to 12 decimals."""

    def __init__(self, economy: Economy, hedging: HedgingOptions):
        self.economy = economy
        self.hedging = hedging
        self.evaluations = 0
        self._cache: Dict[bytes, MarketEvaluation] = {}

    @staticmethod
    def _key(p: PriceSystem) -> bytes:
        return np.round(p.flat(), CACHE_DECIMALS).tobytes()

    def __call__(self, p: PriceSystem) -> MarketEvaluation:
        key = self._key(p)
        evaluation = self._cache.get(key)
        if evaluation is None:
            evaluation = evaluate_market(self.economy, p, self.hedging)
            self._cache[key] = evaluation
            self.evaluations += 1
        return evaluation

    def retain(self, evaluation: MarketEvaluation) -> None:
        """Start a new iteration's cache holding only ``evaluation``."""
        self._cache = {self._key(evaluation.prices): evaluation}


def phase1(s: ExcessSupply, p: PriceSystem, r: float) -> PriceSystem:
    """
    Dual step: in every block the simplex vertex of the smallest excess supply.

    The augmented Walrasian at this vertex equals ``min_j s_j`` exactly,
    for any ``r`` > 0. Ties go to the smallest index.
    """
    blocks = []
    for block in s.blocks():
        j, _ = min_vertex(block)
        vertex = np.zeros(block.size)
        vertex[j] = 1.0
        blocks.append(vertex)
    return PriceSystem.from_blocks(blocks, p.scenarios)


@dataclass
class PriceStep:
    """Outcome of one primal step."""
    prices: PriceSystem
    value: float
    start_value: float
    evaluations: int
    radius: float


class PriceSearch:
    """
    Trust-region maximization of ``p -> W_r(p, q)`` over the price simplices.

    Works on the affine chart of each block (the last price is implied by the
    others). Every trial point is projected onto the simplex, floored at
    ``delta`` and renormalized before the oracle call.

    Each round linearizes the excess supply by forward differences, ``d``
    oracle calls for a chart of dimension ``d``, and maximizes the
    augmented Walrasian of the linearized excess supply over the trust box
    (see ``model_step``). A step that improves the true value
    is accepted and the differences are refreshed; otherwise the box halves
    and the same linearization is reused.
    """

    def __init__(self, economy: Economy, oracle: MarketOracle, q: PriceSystem, r: float,
                 options: Phase2Options, delta: float,
                 kind: AugmentingKind = AugmentingKind.SELF_DUAL,
                 epsilon: Optional[float] = None):
        self.economy = economy
        self.oracle = oracle
        self.q = q
        self.r = r
        self.options = options
        self.delta = delta
        self.kind = AugmentingKind(kind)
        self.epsilon = epsilon
        self.evaluations = 0
        self.logger = logging.getLogger(__name__)
        self._width = economy.n_goods - 1
        self._costs = np.concatenate([self.vertex_costs(qb) for qb in q.blocks()])

    def _chart(self, p: PriceSystem) -> np.ndarray:
        return np.concatenate([block[:-1] for block in p.blocks()])

    def to_prices(self, x: np.ndarray) -> PriceSystem:
        blocks = []
        for b in range(len(self.q.blocks())):
            u = x[b * self._width:(b + 1) * self._width]
            point = project_simplex(np.append(u, 1.0 - u.sum()))
            point = np.maximum(point, self.delta)
            blocks.append(point / point.sum())
        return PriceSystem.from_blocks(blocks, self.q.scenarios)

    def vertex_costs(self, qb: np.ndarray) -> np.ndarray:
        """
        Augmenting cost of pricing one block at each simplex vertex.

        Infinite where the vertex lies outside the l-infinity ball around ``qb``.
        """
        gaps = np.eye(qb.size) - qb
        if self.kind is AugmentingKind.SELF_DUAL:
            return np.sum(gaps * gaps, axis=1) / (2.0 * self.r)
        return np.where(np.max(np.abs(gaps), axis=1) <= self.r, 0.0, np.inf)

    def excess(self, x: np.ndarray) -> Tuple[Optional[ExcessSupply], PriceSystem]:
        p = self.to_prices(x)
        self.evaluations += 1
        try:
            return self.oracle(p).excess, p
        except InfeasibleBudget as e:
            self.logger.debug(f"trial prices rejected: {e}")
            return None, p

    def jacobian(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Forward differences of the flat excess supply in the chart coordinates."""
        J = np.zeros((s.size, x.size))
        for k in range(x.size):
            block = k // self._width
            u = x[block * self._width:(block + 1) * self._width]
            signs = (1.0, -1.0) if 1.0 - u.sum() - JACOBIAN_STEP >= self.delta else (-1.0, 1.0)
            for sign in signs:
                trial = x.copy()
                trial[k] += sign * JACOBIAN_STEP
                shifted, _ = self.excess(trial)
                if shifted is not None:
                    J[:, k] = sign * (shifted.flat - s) / JACOBIAN_STEP
                    break
        return J

    def _cut_cost(self, zb: np.ndarray, qb: np.ndarray) -> float:
        if self.kind is AugmentingKind.SELF_DUAL:
            gap = zb - qb
            return float(gap @ gap) / (2.0 * self.r)
        return 0.0

    def _as_excess(self, flat: np.ndarray) -> ExcessSupply:
        blocks = flat.reshape(-1, self.economy.n_goods)
        return ExcessSupply(blocks[0], dict(zip(self.q.scenarios, blocks[1:])))

    def model_step(self, x: np.ndarray, s: np.ndarray, f: float, J: np.ndarray,
                   h: float) -> Tuple[np.ndarray, float]:
        """
        Maximize the linearized objective ``W_r(s + J step, q)`` over the trust box.

        The model is concave in the step and is maximized by cutting planes:
        any ``z`` in a block's simplex bounds that block from above by
        ``<z, s_b + J_b step> + |z - q_b|^2 / (2r)``. The first LP holds the
        vertices and the current minimizer; each round adds the minimizer at
        the LP solution until the LP bound is within ``MODEL_GAP`` of the gain.

        The LP variables ``w = step - lower`` and ``tau_b = t_b + T`` are
        nonnegative, with ``lower`` the box corner clipped to keep prices
        above ``delta / 2``, so the origin is feasible.

        Returns:
            ``(step, model value at the step)``; the zero step when no LP round succeeds.
        """
        d = x.size
        n = self.economy.n_goods
        n_blocks = s.size // n
        q_blocks = self.q.blocks()
        lower = np.maximum(-h, 0.5 * self.delta - x)
        shift = 2.0 * (1.0 + float(np.abs(s).sum()) + h * float(np.abs(J).sum()))

        box_rows, box_rhs = [], []
        for k in range(d):
            row = np.zeros(d + n_blocks)
            row[k] = 1.0
            box_rows.append(row)
            box_rhs.append(h - lower[k])
        for b in range(n_blocks):
            chart = slice(b * self._width, (b + 1) * self._width)
            row = np.zeros(d + n_blocks)
            row[chart] = 1.0
            box_rows.append(row)
            box_rhs.append(1.0 - 0.5 * self.delta - float(x[chart].sum() + lower[chart].sum()))

        cuts = []
        for b, qb in enumerate(q_blocks):
            for j in range(n):
                if np.isfinite(self._costs[b * n + j]):
                    vertex = np.zeros(n)
                    vertex[j] = 1.0
                    cuts.append((b, vertex, self._costs[b * n + j]))
        current = augmented_walrasian(self._as_excess(s), self.q, self.r, self.kind)
        for b, (zb, qb) in enumerate(zip(current.z_star.blocks(), q_blocks)):
            cuts.append((b, zb, self._cut_cost(zb, qb)))

        objective = np.concatenate([np.zeros(d), np.ones(n_blocks)])
        best_step, best_value = np.zeros(d), f
        for _ in range(MODEL_ROUNDS):
            rows, rhs = list(box_rows), list(box_rhs)
            for b, zb, cost in cuts:
                block = slice(b * n, (b + 1) * n)
                slope = zb @ J[block]
                row = np.zeros(d + n_blocks)
                row[:d] = -slope
                row[d + b] = 1.0
                rows.append(row)
                rhs.append(float(zb @ s[block]) + cost + shift + float(slope @ lower))

            solution = solve_lp(objective, np.array(rows), np.maximum(np.array(rhs), 0.0))
            if not solution.is_optimal:
                self.logger.debug(f"price model LP {solution.status.value} at radius {h:.2e}")
                break
            step = solution.x[:d] + lower
            bound = solution.value - n_blocks * shift
            model = augmented_walrasian(self._as_excess(s + J @ step), self.q, self.r, self.kind)
            if model.value > best_value:
                best_step, best_value = step, model.value
            if bound - model.value <= max(MODEL_GAP * (bound - f), STATIONARY_GAIN * (1.0 + abs(f))):
                break
            for b, (zb, qb) in enumerate(zip(model.z_star.blocks(), q_blocks)):
                cuts.append((b, zb, self._cut_cost(zb, qb)))
        return best_step, best_value

    def run(self, p_start: PriceSystem, radius: float) -> PriceStep:
        """
        Search from ``p_start`` with initial trust radius ``radius``.

        Stops when the radius falls below ``step_tol``, the model predicts no
        gain, the evaluation budget is spent, or the residual drops to
        ``epsilon``.

        Raises:
            Phase2Stalled: If no evaluated point beats the start.
        """
        options = self.options
        x = self._chart(p_start)
        s, p = self.excess(x)
        if s is None:
            raise Phase2Stalled(p_start, float("-inf"))
        f = start_value = augmented_walrasian(s, self.q, self.r, self.kind).value
        d = x.size
        h = min(radius, options.step_init)
        J: Optional[np.ndarray] = None

        while h >= options.step_tol and self.evaluations < options.max_evals:
            if self.epsilon is not None and residual(s) <= self.epsilon:
                break
            if J is None:
                if self.evaluations + d >= options.max_evals:
                    break
                J = self.jacobian(x, s.flat)

            step, model_value = self.model_step(x, s.flat, f, J, h)
            predicted = model_value - f
            if not predicted > STATIONARY_GAIN * (1.0 + abs(f)):
                break

            trial_s, trial_p = self.excess(x + step)
            trial = None if trial_s is None else augmented_walrasian(trial_s, self.q, self.r, self.kind)
            if trial is not None and trial.value > f:
                ratio = (trial.value - f) / predicted
                x, s, p, f, J = self._chart(trial_p), trial_s, trial_p, trial.value, None
                if ratio >= 0.75 and np.max(np.abs(step)) >= 0.99 * h:
                    h = min(2.0 * h, options.step_init)
                elif ratio < 0.25:
                    h *= 0.5
            else:
                h = 0.5 * min(h, float(np.max(np.abs(step))))

        self.logger.debug(
            f"price step: {self.evaluations} evaluations, value {start_value:.6e} -> {f:.6e}, radius {h:.2e}"
        )
        if not f > start_value:
            raise Phase2Stalled(p_start, start_value)
        return PriceStep(p, f, start_value, self.evaluations, h)


def phase2(economy: Economy, q: PriceSystem, p_start: PriceSystem, r: float,
           cfg: Optional[SolverConfig] = None, oracle: Optional[MarketOracle] = None,
           radius: Optional[float] = None) -> PriceSystem:
    """
    Primal step: a local maximizer of the augmented Walrasian in ``p`` at fixed ``q``.

    Args:
        economy: Economy whose excess supply defines the objective.
        q: Dual price system from ``phase1``.
        p_start: Start of the search.
        r: Augmenting parameter.
        cfg: Solver configuration (phase2 options, floor, augmenting kind).
        oracle: Shared memoized excess-supply oracle.
        radius: Initial trust radius, ``cfg.phase2.step_init`` by default.

    Returns:
        Prices whose augmented value is strictly better than at ``p_start``.

    Raises:
        Phase2Stalled: If no improving point was found.
    """
    cfg = cfg or SolverConfig()
    oracle = oracle or MarketOracle(economy, cfg.ph)
    search = PriceSearch(economy, oracle, q, r, cfg.phase2, cfg.delta, cfg.augmenting)
    return search.run(p_start, cfg.phase2.step_init if radius is None else radius).prices


def resolve_start(economy: Economy, p_init: StartSpec, cfg: SolverConfig,
                  rng: Optional[np.random.Generator] = None) -> PriceSystem:
    """
    Turn a start specification into a floored price system.

    ``"centroid"``, ``"random"`` (Dirichlet(1, ..., 1) per block), a
    ``PriceSystem`` or a stage-0 price vector (stage-1 blocks at the centroid).

    Raises:
        ValueError: If the specification is unknown or has the wrong length.
    """
    n = economy.n_goods
    if isinstance(p_init, PriceSystem):
        start = p_init
    elif isinstance(p_init, str) and p_init == "centroid":
        start = PriceSystem.centroid(economy)
    elif isinstance(p_init, str) and p_init == "random":
        rng = rng or np.random.default_rng(cfg.seed)
        start = PriceSystem.from_blocks(
            [rng.dirichlet(np.ones(n)) for _ in range(economy.n_blocks)],
            economy.scenarios if economy.is_two_stage else (),
        )
    elif isinstance(p_init, str):
        raise ValueError(f"unknown start {p_init!r}; use centroid, random or a price vector")
    else:
        p0 = np.asarray(p_init, dtype=float)
        if p0.shape != (n,) or np.any(p0 < 0.0) or not p0.sum() > 0.0:
            raise ValueError(f"start prices must be {n} nonnegative numbers, got {p0.tolist()}")
        centroid = PriceSystem.centroid(economy)
        start = PriceSystem(p0 / p0.sum(), centroid.p1)

    if start.p0.size != n or (economy.is_two_stage and start.scenarios != economy.scenarios):
        raise ValueError("start prices do not match the economy's goods and scenarios")
    return floor_prices(start, cfg.delta)


class AugmentedWalrasianSolver:
    """Runs the outer iteration for one economy and configuration."""

    def __init__(self, economy: Economy, cfg: Optional[SolverConfig] = None):
        self.economy = economy
        self.cfg = cfg or SolverConfig()
        self.logger = logging.getLogger(__name__)

        self.cfg.validate(economy.n_goods)
        violations = validate(economy)
        if violations:
            raise ModelError(f"invalid economy: {violations[0]} ({len(violations)} violation(s))")

    def _radius_after(self, p_old: PriceSystem, p_new: PriceSystem, stalled: bool) -> float:
        options = self.cfg.phase2
        if stalled:
            return options.step_init
        moved = float(np.max(np.abs(p_new.flat() - p_old.flat())))
        return min(options.step_init, max(4.0 * moved, 1e3 * options.step_tol))

    def run(self, start: PriceSystem, start_index: int = 0) -> Tuple[PriceSystem, SolveTrace]:
        """
        Iterate from ``start`` until converged or out of iterations.

        Returns:
            ``(p*, trace)``; on MaxIter ``p*`` is the iterate with the smallest residual.

        Raises:
            ModelError: If an agent problem is ill-posed at some iterate.
        """
        cfg = self.cfg
        clock = time.perf_counter()
        oracle = MarketOracle(self.economy, cfg.ph)

        p = floor_prices(start, cfg.delta)
        current = oracle(p)
        res = residual(current.excess)
        best_residual, best_p = res, p
        trace = SolveTrace(start=p, start_residual=res, start_index=start_index)
        self.logger.info(
            f"Solving {self.economy.name} ({self.economy.model_class.value}, "
            f"{self.economy.n_goods} goods, {len(self.economy.agents)} agents): start residual {res:.3e}"
        )

        if res <= cfg.epsilon:
            trace.status = SolveStatus.CONVERGED
        radius = cfg.phase2.step_init
        capped = False
        stalls = 0

        for nu in range(cfg.max_outer_iters):
            if trace.status is SolveStatus.CONVERGED:
                break
            r = cfg.r0 * cfg.r_growth ** nu
            if r > cfg.r_max:
                if not capped:
                    self.logger.warning(f"Augmenting parameter capped at {cfg.r_max:g} from iteration {nu}")
                    capped = True
                r = cfg.r_max

            tick = time.perf_counter()
            q = phase1(current.excess, p, r)
            tock = time.perf_counter()

            search = PriceSearch(self.economy, oracle, q, r, cfg.phase2, cfg.delta, cfg.augmenting, cfg.epsilon)
            stalled = False
            try:
                step = search.run(p, radius)
                p_next, augmented = step.prices, step.value
            except Phase2Stalled as e:
                if not stalls:
                    self.logger.warning(f"Iteration {nu}: price step stalled at value {e.value:.6e}; raising r")
                p_next, augmented, stalled = p, e.value, True
            stalls = stalls + 1 if stalled else 0
            done = time.perf_counter()

            following = oracle(p_next)
            oracle.retain(following)
            s = following.excess
            res = residual(s)
            walras_law = [float(pb @ sb) for pb, sb in zip(p_next.blocks(), s.blocks())]
            if not s.cap_binds and max(abs(v) for v in walras_law) > WALRAS_LAW_TOL:
                self.logger.warning(f"Iteration {nu}: Walras law violated by {max(abs(v) for v in walras_law):.3e}")

            trace.records.append(IterationRecord(
                nu=nu,
                r=r,
                p=p_next,
                q=q,
                s=s,
                residual=res,
                walrasian_value=walrasian_value(s, q),
                augmented_value=augmented,
                walras_law=walras_law,
                phase1_ms=1e3 * (tock - tick),
                phase2_ms=1e3 * (done - tock),
                evaluations=search.evaluations,
                stalled=stalled,
                ph_residuals=following.ph_residuals,
            ))
            self.logger.info(f"Iteration {nu}: r={r:.4g} residual={res:.3e} evaluations={search.evaluations}")

            radius = self._radius_after(p, p_next, stalled)
            p, current = p_next, following
            if res < best_residual:
                best_residual, best_p = res, p
            if res <= cfg.epsilon:
                trace.status = SolveStatus.CONVERGED
            elif stalled and capped:
                # p, q and r are fixed from here on
                self.logger.warning(
                    f"Iteration {nu}: price step stalled with r at its cap "
                    f"after {stalls} stalled iteration(s); stopping"
                )
                break

        if trace.status is SolveStatus.CONVERGED:
            p_star, trace.final_residual = p, res
            self.logger.info(f"Converged after {trace.iterations} iterations, residual {res:.3e}")
        else:
            p_star, trace.final_residual = best_p, best_residual
            self.logger.warning(
                f"No convergence after {trace.iterations} iterations; best residual {best_residual:.3e}"
            )
        trace.elapsed = time.perf_counter() - clock
        return normalize_prices(p_star), trace


def solve(economy: Economy, p_init: StartSpec = "centroid",
          cfg: Optional[SolverConfig] = None) -> Tuple[PriceSystem, SolveTrace]:
    """
    Compute an approximate Walras equilibrium.

    Args:
        economy: Valid economy; two-stage economies should pass the recourse check.
        p_init: ``"centroid"``, ``"random"``, a ``PriceSystem`` or a stage-0 vector.
        cfg: Solver configuration, defaults when omitted.

    Returns:
        ``(p*, trace)`` with ``min s(p*) >= -epsilon`` when the trace status is Converged.

    Raises:
        ValueError: If the configuration or the start is invalid.
        ModelError: If the economy is invalid or an agent problem is ill-posed.
    """
    cfg = cfg or SolverConfig()
    solver = AugmentedWalrasianSolver(economy, cfg)
    return solver.run(resolve_start(economy, p_init, cfg))


def multistart_solve(economy: Economy, cfg: Optional[SolverConfig] = None) -> Tuple[PriceSystem, SolveTrace]:
    """
    Solve from the centroid and ``k - 1`` Dirichlet-sampled starts; keep the smallest residual.

    Starts are drawn up front from ``numpy.random.default_rng(cfg.seed)``,
    so the result does not depend on ``cfg.workers``. A run that raises
    counts as residual infinity.

    Raises:
        ModelError: If every run fails (the first failure is re-raised).
    """
    cfg = cfg or SolverConfig()
    solver = AugmentedWalrasianSolver(economy, cfg)
    rng = np.random.default_rng(cfg.seed)
    starts = [resolve_start(economy, "centroid", cfg)]
    starts.extend(resolve_start(economy, "random", cfg, rng) for _ in range(cfg.multistart_k - 1))

    def run(index: int):
        try:
            return solver.run(starts[index], start_index=index)
        except ModelError as e:
            logger.warning(f"Start {index} failed: {e}")
            return e

    if cfg.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(run, range(len(starts))))
    else:
        outcomes = [run(index) for index in range(len(starts))]

    finished = [(index, outcome) for index, outcome in enumerate(outcomes) if not isinstance(outcome, Exception)]
    if not finished:
        raise outcomes[0]
    index, best = min(finished, key=lambda item: (item[1][1].final_residual, item[0]))
    logger.info(
        f"Multi-start: {len(finished)}/{len(starts)} runs finished, best is start {index} "
        f"with residual {best[1].final_residual:.3e}"
    )
    return best


def solve_sequence(economy: Economy, epsilons: Sequence[float], cfg: Optional[SolverConfig] = None,
                   p_init: StartSpec = "centroid") -> List[Tuple[PriceSystem, SolveTrace]]:
    """Solve for each tolerance in turn, warm-starting at the previous solution."""
    cfg = cfg or SolverConfig()
    results = []
    start: StartSpec = p_init
    for epsilon in epsilons:
        p_star, trace = solve(economy, start, cfg.with_overrides(epsilon=epsilon))
        results.append((p_star, trace))
        start = p_star
    return results


def allocations(economy: Economy, p: PriceSystem, cfg: Optional[SolverConfig] = None) -> List[AgentPlan]:
    """Consumption plans and transfers of every agent at prices ``p``."""
    cfg = cfg or SolverConfig()
    return evaluate_market(economy, floor_prices(p, cfg.delta), cfg.ph).plans
