"""
Модели сценариев и конфигурации бенчмарка.
"""

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..exceptions import ConfigError
from ..utils.canonical import parse_timestamp
from .protocol_models import ActorKind


@dataclass(frozen=True)
class ActorSpec:
    name: str
    kind: ActorKind
    did: str


@dataclass(frozen=True)
class ScenarioStep:
    name: str
    actor: str
    action: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    at: Optional[datetime] = None


@dataclass(frozen=True)
class VoteIntent:
    voter: str
    option: str


class ScriptClock:
    """Часы сценария: фиксированный старт плюс шаг на каждое обращение к шагу."""

    def __init__(self, start: datetime, tick: timedelta):
        self.now = start
        self.tick = tick

    def __call__(self) -> datetime:
        return self.now

    def advance(self, at: Optional[datetime] = None) -> None:
        self.now = at if at is not None else self.now + self.tick


@dataclass
class ScenarioScript:
    """Сценарий: акторы, сценарии голосования и упорядоченные шаги."""
    name: str
    template_path: Path
    genesis_path: Path
    actors: List[ActorSpec]
    steps: List[ScenarioStep]
    voter_scripts: Dict[str, List[VoteIntent]] = field(default_factory=dict)
    clock_start: datetime = datetime(2021, 7, 12, 9, 0, tzinfo=timezone.utc)
    tick_seconds: int = 60

    def actor(self, name: str) -> ActorSpec:
        for spec in self.actors:
            if spec.name == name:
                return spec
        raise ConfigError(f"Актор не объявлен: {name}")

    def make_clock(self) -> ScriptClock:
        return ScriptClock(self.clock_start, timedelta(seconds=self.tick_seconds))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Union[str, Path] = ".") -> "ScenarioScript":
        """
        Разбор сценария с проверкой ссылок на акторов.

        Args:
            data: JSON сценария
            base_dir: Каталог для относительных путей к шаблону и генезису

        Raises:
            ConfigError: неизвестный актор, тип или некорректное поле
        """
        base = Path(base_dir)
        try:
            actors = [ActorSpec(a["name"], ActorKind(a["kind"]), a["did"]) for a in data["actors"]]
            names = {a.name for a in actors}
            if len(names) != len(actors):
                raise ConfigError("Имена акторов повторяются")

            scripts: Dict[str, List[VoteIntent]] = {}
            for key, votes in data.get("voter_scripts", {}).items():
                scripts[key] = [VoteIntent(v["voter"], v["option"]) for v in votes]
                for intent in scripts[key]:
                    if intent.voter not in names:
                        raise ConfigError(f"Сценарий голосования {key}: актор не объявлен: {intent.voter}")

            steps = []
            for index, raw in enumerate(data["steps"]):
                if raw["actor"] not in names:
                    raise ConfigError(f"Шаг {index}: актор не объявлен: {raw['actor']}")
                steps.append(ScenarioStep(
                    name=raw.get("name", raw["action"]),
                    actor=raw["actor"],
                    action=raw["action"],
                    parameters=dict(raw.get("parameters", {})),
                    at=parse_timestamp(raw["at"]) if raw.get("at") else None,
                ))

            clock = data.get("clock", {})
            return cls(
                name=data.get("name", "scenario"),
                template_path=base / data["template"],
                genesis_path=base / data["genesis"],
                actors=actors,
                steps=steps,
                voter_scripts=scripts,
                clock_start=parse_timestamp(clock.get("start", "2021-07-12T09:00:00Z")),
                tick_seconds=int(clock.get("tick_seconds", 60)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Некорректный сценарий: {e}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ScenarioScript":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Не удалось прочитать сценарий {path}: {e}")
        return cls.from_dict(data, path.parent)


@dataclass(frozen=True)
class BenchmarkConfig:
    """Параметры бенчмарка."""
    attribute_counts: Tuple[int, ...] = (8, 16, 24, 32)
    runs_per_point: int = 100
    voter_counts: Tuple[int, ...] = tuple(range(5, 55, 5))
    concurrency_levels: Tuple[int, ...] = tuple(range(50, 550, 50))
    commits_per_client: int = 1
    profile: str = "default"
    output_dir: str = "bench"

    def __post_init__(self):
        for name in ("attribute_counts", "voter_counts", "concurrency_levels"):
            values = getattr(self, name)
            if not values or any(v <= 0 for v in values):
                raise ConfigError(f"{name}: нужны положительные значения")
        if self.runs_per_point <= 0 or self.commits_per_client <= 0:
            raise ConfigError("runs_per_point и commits_per_client должны быть положительными")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> "BenchmarkConfig":
        merged = {**(defaults or {}), **data}
        try:
            return cls(
                attribute_counts=tuple(int(v) for v in merged.get("attribute_counts", cls.attribute_counts)),
                runs_per_point=int(merged.get("runs_per_point", cls.runs_per_point)),
                voter_counts=tuple(int(v) for v in merged.get("voter_counts", cls.voter_counts)),
                concurrency_levels=tuple(int(v) for v in merged.get("concurrency_levels", cls.concurrency_levels)),
                commits_per_client=int(merged.get("commits_per_client", cls.commits_per_client)),
                profile=str(merged.get("profile", cls.profile)),
                output_dir=str(merged.get("output_dir", cls.output_dir)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Некорректная конфигурация бенчмарка: {e}")
