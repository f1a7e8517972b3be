#!/usr/bin/env python3
"""
Trajectory CSV and summary JSON written after a solve.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config import SolverConfig
from .models import Economy, PriceSystem
from .solver import SolveTrace
from .walrasian import ExcessSupply, MarketEvaluation, residual

logger = logging.getLogger(__name__)

PRICE_SCALE = 100.0


def _number(value: float) -> str:
    return f"{value:.12g}"


def _block_columns(economy: Economy, prefix0: str, prefix1: str) -> List[str]:
    columns = [f"{prefix0}_{good}" for good in economy.goods]
    if economy.is_two_stage:
        for xi in economy.scenarios:
            columns.extend(f"{prefix1}_{xi}_{good}" for good in economy.goods)
    return columns


def trajectory_header(economy: Economy) -> List[str]:
    """CSV header: iteration scalars, then price blocks, then excess-supply blocks."""
    return (
        ["nu", "r", "residual", "W_value", "Waug_value"]
        + _block_columns(economy, "p0", "p1")
        + _block_columns(economy, "s0", "s1")
    )


def trajectory_rows(trace: SolveTrace) -> List[List[str]]:
    rows = []
    for record in trace.records:
        row = [str(record.nu)]
        row.extend(_number(v) for v in (record.r, record.residual, record.walrasian_value, record.augmented_value))
        row.extend(_number(float(v)) for v in record.p.flat())
        row.extend(_number(float(v)) for v in record.s.flat)
        rows.append(row)
    return rows


def write_trajectory(trace: SolveTrace, economy: Economy, path: Union[str, Path]) -> None:
    """Write one CSV row per outer iteration, values with 12 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(trajectory_header(economy))
        writer.writerows(trajectory_rows(trace))
    logger.info(f"Wrote {trace.iterations} trajectory rows to {path}")


def _excess_by_label(s: ExcessSupply) -> Dict[str, List[float]]:
    labels = ["s0"] + [f"s1_{xi}" for xi in s.s1]
    return {label: [float(v) for v in block] for label, block in zip(labels, s.blocks())}


def build_summary(economy: Economy, p_star: PriceSystem, trace: SolveTrace,
                  evaluation: MarketEvaluation, cfg: Optional[SolverConfig] = None) -> Dict[str, Any]:
    """
    Assemble the summary document of a solve.

    Args:
        economy: The solved economy.
        p_star: Final prices.
        trace: Trace of the solve that produced ``p_star``.
        evaluation: Market evaluation at ``p_star`` (excess supply and plans).
        cfg: Configuration echoed into the document.
    """
    cfg = cfg or SolverConfig()
    agents = []
    for plan in evaluation.plans:
        entry: Dict[str, Any] = {
            "name": plan.agent,
            "x0": [float(v) for v in plan.x0.x],
            "utility0": plan.x0.utility,
        }
        if plan.x1:
            entry["x1"] = {xi: [float(v) for v in result.x] for xi, result in plan.x1.items()}
            entry["utility1"] = {xi: result.utility for xi, result in plan.x1.items()}
        if plan.y is not None:
            entry["y"] = [float(v) for v in plan.y]
        if plan.ph_residual is not None:
            entry["ph_residual"] = plan.ph_residual
            entry["ph_iterations"] = plan.ph_iterations
        agents.append(entry)

    return {
        "economy": economy.name,
        "model": economy.model_class.value,
        "status": trace.status.value,
        "iterations": trace.iterations,
        "start_index": trace.start_index,
        "final_residual": residual(evaluation.excess),
        "prices": p_star.scaled(1.0),
        "prices_x100": p_star.scaled(PRICE_SCALE),
        "excess_supply": _excess_by_label(evaluation.excess),
        "cap_binds": evaluation.excess.cap_binds,
        "agents": agents,
        "wall_clock_seconds": trace.elapsed,
        "config": cfg.to_dict(),
    }


def write_summary(summary: Dict[str, Any], path: Union[str, Path]) -> None:
    """Write the summary document as indented JSON."""
    Path(path).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote summary to {path}")


def format_prices(economy: Economy, p: PriceSystem) -> str:
    """Human-readable price table, scaled by 100."""
    lines = []
    for label, values in p.scaled(PRICE_SCALE).items():
        cells = ", ".join(f"{good}={value:.2f}" for good, value in zip(economy.goods, values))
        lines.append(f"{label}: {cells}")
    return "\n".join(lines)
