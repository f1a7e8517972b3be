#!/usr/bin/env python3
"""
Economy files: JSON parsing with path-annotated errors, serialization and
the fixtures shipped with the package.
"""

import json
import logging
import shutil
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .models import CES, Agent, CobbDouglas, Economy, ModelClass, UtilitySpec
from .validation import validate

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1.0"
DEFAULT_SCENARIO = "base"
FIXTURE_DIR = Path(__file__).parent / "fixtures"


class EconomyFileError(Exception):
    """Exception raised when an economy document cannot be turned into a valid economy."""

    def __init__(self, errors: List[str], source: str = "<document>"):
        self.errors = list(errors)
        self.source = source
        super().__init__(f"{source}: " + "; ".join(self.errors))


class _Reader:
    """Collects ``path: message`` errors while walking a document."""

    def __init__(self):
        self.errors: List[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def vector(self, value: Any, path: str) -> Optional[np.ndarray]:
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            self.fail(path, "expected a list of numbers")
            return None
        return np.array(value, dtype=float)

    def matrix(self, value: Any, path: str, n_rows: int, n_cols: int) -> Optional[np.ndarray]:
        if not isinstance(value, list) or len(value) != n_rows:
            self.fail(path, f"expected {n_rows} rows")
            return None
        rows = []
        for i, row in enumerate(value):
            parsed = self.vector(row, f"{path}[{i}]")
            if parsed is None:
                return None
            if parsed.size != n_cols:
                self.fail(f"{path}[{i}]", f"expected {n_cols} entries, got {parsed.size}")
                return None
            rows.append(parsed)
        return np.array(rows, dtype=float).reshape(n_rows, n_cols)

    def scenario_map(self, value: Any, path: str, scenarios: List[str]) -> Optional[Dict[str, Any]]:
        """Accept ``{scenario: entry}``; a bare entry stands for the single scenario."""
        if isinstance(value, dict):
            return value
        if len(scenarios) == 1:
            return {scenarios[0]: value}
        self.fail(path, "expected an object keyed by scenario id")
        return None

    def utility(self, value: Any, path: str) -> Optional[UtilitySpec]:
        if not isinstance(value, dict):
            self.fail(path, "expected an object with 'type' and 'params'")
            return None
        kind = value.get("type")
        params = value.get("params")
        if not isinstance(params, dict):
            self.fail(f"{path}.params", "expected an object")
            return None

        if kind == "cobb_douglas":
            beta = self.vector(params.get("beta"), f"{path}.params.beta")
            return CobbDouglas(beta).normalized() if beta is not None else None
        if kind == "ces":
            a = self.vector(params.get("a"), f"{path}.params.a")
            b = params.get("b")
            if not isinstance(b, (int, float)) or isinstance(b, bool):
                self.fail(f"{path}.params.b", "expected a number")
                return None
            return CES(a, b) if a is not None else None

        self.fail(f"{path}.type", f"unknown utility type {kind!r}; use 'cobb_douglas' or 'ces'")
        return None


def _parse_agent(reader: _Reader, item: Any, index: int, model: ModelClass,
                 n_goods: int, n_activities: int, scenarios: List[str]) -> Optional[Agent]:
    path = f"agents[{index}]"
    if not isinstance(item, dict):
        reader.fail(path, "expected an object")
        return None

    errors_before = len(reader.errors)
    name = str(item.get("name", f"agent{index + 1}"))
    utility0 = reader.utility(item.get("utility0"), f"{path}.utility0")
    e0 = reader.vector(item.get("e0"), f"{path}.e0")
    lb = item.get("survival_lb")
    survival_lb = np.zeros(n_goods) if lb is None else reader.vector(lb, f"{path}.survival_lb")

    fields: Dict[str, Any] = {}
    if model is not ModelClass.EXCHANGE:
        fields["utility1"] = reader.utility(item.get("utility1"), f"{path}.utility1")

        T0 = item.get("T0")
        if T0 is None and n_activities == 0:
            fields["T0"] = np.zeros((n_goods, 0))
        else:
            fields["T0"] = reader.matrix(T0, f"{path}.T0", n_goods, n_activities)

        e1 = reader.scenario_map(item.get("e1"), f"{path}.e1", scenarios) or {}
        fields["e1"] = {
            str(xi): vector for xi, raw in e1.items()
            if (vector := reader.vector(raw, f"{path}.e1.{xi}")) is not None
        }

        raw_T1 = item.get("T1")
        if raw_T1 is None and n_activities == 0:
            raw_T1 = {xi: [[] for _ in range(n_goods)] for xi in scenarios}
        T1 = reader.scenario_map(raw_T1, f"{path}.T1", scenarios) or {}
        fields["T1"] = {
            str(xi): matrix for xi, raw in T1.items()
            if (matrix := reader.matrix(raw, f"{path}.T1.{xi}", n_goods, n_activities)) is not None
        }

        beliefs = item.get("beliefs")
        if beliefs is None and len(scenarios) == 1:
            beliefs = {scenarios[0]: 1.0}
        if not isinstance(beliefs, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in beliefs.values()
        ):
            reader.fail(f"{path}.beliefs", "expected an object of scenario probabilities")
            beliefs = {}
        fields["beliefs"] = beliefs

    if len(reader.errors) > errors_before or utility0 is None or e0 is None or survival_lb is None:
        return None
    return Agent(name=name, utility0=utility0, e0=e0, survival_lb=survival_lb, **fields)


def parse_document(document: Any, source: str = "<document>") -> Economy:
    """
    Build and validate an economy from a decoded JSON document.

    Args:
        document: Decoded economy document.
        source: Name used in error messages.

    Returns:
        A valid ``Economy``.

    Raises:
        EconomyFileError: With every parse error and validation violation.
    """
    reader = _Reader()
    if not isinstance(document, dict):
        raise EconomyFileError(["$: expected a JSON object"], source)

    try:
        model = ModelClass(document.get("model"))
    except ValueError:
        raise EconomyFileError(
            [f"model: expected one of {[m.value for m in ModelClass]}, got {document.get('model')!r}"], source
        )

    goods = document.get("goods")
    if not isinstance(goods, list) or not goods:
        raise EconomyFileError(["goods: expected a non-empty list of names"], source)
    goods = [str(g) for g in goods]

    activities = document.get("activities") or []
    if not isinstance(activities, list):
        reader.fail("activities", "expected a list of names")
        activities = []

    raw_scenarios = document.get("scenarios")
    scenarios: List[str] = []
    if model is not ModelClass.EXCHANGE:
        if raw_scenarios is None and model is ModelClass.TWO_STAGE_DETERMINISTIC:
            raw_scenarios = [{"id": DEFAULT_SCENARIO}]
        if not isinstance(raw_scenarios, list) or not raw_scenarios:
            reader.fail("scenarios", "expected a non-empty list of {id} objects")
            raw_scenarios = []
        for k, entry in enumerate(raw_scenarios):
            if isinstance(entry, dict) and "id" in entry:
                scenarios.append(str(entry["id"]))
            else:
                reader.fail(f"scenarios[{k}]", "expected an object with an 'id'")

    raw_agents = document.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        raise EconomyFileError(reader.errors + ["agents: expected a non-empty list"], source)

    agents = [
        _parse_agent(reader, item, k, model, len(goods), len(activities), scenarios)
        for k, item in enumerate(raw_agents)
    ]
    if reader.errors:
        raise EconomyFileError(reader.errors, source)

    economy = Economy(
        model_class=model,
        goods=tuple(goods),
        agents=tuple(agents),
        activities=tuple(str(a) for a in activities),
        scenarios=tuple(scenarios),
        name=str(document.get("name", Path(source).stem)),
    )
    violations = validate(economy)
    if violations:
        raise EconomyFileError([str(v) for v in violations], source)
    return economy


def parse_economy(path: Union[str, Path]) -> Economy:
    """
    Read and validate an economy file.

    Raises:
        EconomyFileError: On malformed JSON (with line and column) or an invalid economy.
        OSError: If the file cannot be read.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise EconomyFileError([f"line {e.lineno}, column {e.colno}: {e.msg}"], str(path)) from e
    economy = parse_document(document, str(path))
    logger.debug(f"Loaded {economy.name} from {path}")
    return economy


def _utility_document(spec: UtilitySpec) -> Dict[str, Any]:
    if isinstance(spec, CobbDouglas):
        return {"type": "cobb_douglas", "params": {"beta": spec.beta.tolist()}}
    return {"type": "ces", "params": {"a": spec.a.tolist(), "b": spec.b}}


def serialize_economy(economy: Economy) -> Dict[str, Any]:
    """Inverse of ``parse_document``: the full document, every optional field written out."""
    document: Dict[str, Any] = {
        "version": FORMAT_VERSION,
        "name": economy.name,
        "model": economy.model_class.value,
        "goods": list(economy.goods),
        "activities": list(economy.activities),
        "scenarios": [{"id": xi} for xi in economy.scenarios],
        "agents": [],
    }
    for agent in economy.agents:
        entry: Dict[str, Any] = {
            "name": agent.name,
            "utility0": _utility_document(agent.utility0),
            "e0": agent.e0.tolist(),
            "survival_lb": agent.survival_lb.tolist(),
        }
        if economy.is_two_stage:
            entry["utility1"] = _utility_document(agent.utility1)
            entry["e1"] = {xi: agent.e1[xi].tolist() for xi in agent.e1}
            entry["T0"] = agent.T0.tolist()
            entry["T1"] = {xi: agent.T1[xi].tolist() for xi in agent.T1}
            entry["beliefs"] = dict(agent.beliefs)
        document["agents"].append(entry)
    return document


def write_economy(economy: Economy, path: Union[str, Path]) -> None:
    """Write an economy document as indented JSON."""
    Path(path).write_text(json.dumps(serialize_economy(economy), indent=2) + "\n", encoding="utf-8")


def list_fixtures() -> List[str]:
    """Names of the economies shipped with the package."""
    return sorted(path.stem for path in FIXTURE_DIR.glob("*.json"))


def fixture_path(name: str) -> Path:
    """
    Path of a shipped fixture.

    Raises:
        ValueError: If no fixture has that name.
    """
    path = FIXTURE_DIR / f"{name}.json"
    if not path.is_file():
        raise ValueError(f"unknown fixture {name!r}; available: {', '.join(list_fixtures())}")
    return path


def load_fixture(name: str) -> Economy:
    """Parse one of the shipped fixtures by name."""
    return parse_economy(fixture_path(name))


def export_fixtures(directory: Union[str, Path]) -> List[Path]:
    """Copy every shipped fixture into ``directory`` (created if needed)."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    copied = []
    for name in list_fixtures():
        copied.append(Path(shutil.copy(fixture_path(name), target / f"{name}.json")))
    logger.info(f"Exported {len(copied)} fixtures to {target}")
    return copied
