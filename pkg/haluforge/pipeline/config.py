"""Run configuration."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from ..core.config.provider import YAMLConfigProvider
from ..core.errors import ConfigError, ExportError, UnknownFieldError, ValidationError
from ..core.interfaces import ConfigurationProvider
from ..core.validation import FieldValidator, first_failure, positive
from ..finetune.config import build_train_config
from ..gateway.retry import RetryPolicy
from ..gateway.types import BackendSpec
from ..prompts.engine import PromptKind

SELECTION_SOURCES = ("report", "code")
SELECTION_MODES = ("diverse", "unseen_cwe")
INPUT_SOURCES = ("report", "code")
DESCRIPTION_SOURCES = ("yaml", "nvd")

TOP_LEVEL_KEYS = (
    "corpus_dir", "run_dir", "manifest_path", "prompt_kind", "base_seed", "max_in_flight",
    "mock_mode", "backends", "classifier", "embedding", "retry", "fetch", "selection",
    "export", "train", "descriptions",
)


def _reject_secrets(data: Any, path: str = "") -> None:
    if isinstance(data, Mapping):
        for key, value in data.items():
            where = f"{path}.{key}" if path else str(key)
            if key == "api_key":
                raise ConfigError(where, "secrets belong in the environment, use api_key_env")
            _reject_secrets(value, where)
    elif isinstance(data, (list, tuple)):
        for index, value in enumerate(data):
            _reject_secrets(value, f"{path}[{index}]")


def _section(data: Mapping[str, Any], key: str) -> Dict[str, Any]:
    value = data.get(key) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(key, "must be a mapping")
    return dict(value)


def _spec(data: Any, where: str) -> Optional[BackendSpec]:
    if data is None:
        return None
    if not isinstance(data, Mapping):
        raise ConfigError(where, "must be a mapping")
    return BackendSpec.from_dict(dict(data))


def _choice(value: Any, allowed: Tuple[str, ...]) -> bool:
    return value in allowed


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; flags and environment already applied."""
    corpus_dir: Path = Path("corpus")
    run_dir: Path = Path("runs/default")
    manifest_path: Path = Path("data/manifest.csv")
    backends: Tuple[BackendSpec, ...] = ()
    classifier: Optional[BackendSpec] = None
    embedding: Optional[BackendSpec] = None
    prompt_kind: PromptKind = PromptKind.CO_STAR
    p: float = 0.8
    k_rounds: int = 5
    base_seed: int = 0
    max_in_flight: int = 4
    mock_mode: bool = False
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    fetch_max_in_flight: int = 4
    pair_lock: bool = False
    selection_source: str = "report"
    selection_mode: str = "diverse"
    report_filter: str = "all"
    export_input_source: str = "report"
    train: Dict[str, Any] = field(default_factory=dict)
    descriptions: str = "yaml"

    def __post_init__(self):
        try:
            _run_validator.validate(self)
        except ValidationError as e:
            raise ConfigError(*first_failure(e)) from e
        try:
            build_train_config(self.train)
        except UnknownFieldError as e:
            raise ConfigError(f"train.{e.details['name']}", "unknown training field") from e
        except (ValidationError, ExportError) as e:
            raise ConfigError("train", e.message) from e
        names = [spec.name for spec in self.backends]
        if len(set(names)) != len(names):
            raise ConfigError("backends", "names must be unique")

    @property
    def generator_specs(self) -> Tuple[BackendSpec, ...]:
        """Configured generators; mock mode falls back to a single mock."""
        if self.backends or not self.mock_mode:
            return self.backends
        return (BackendSpec(name="mock-generator"),)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """Build from the YAML schema.

        Raises:
            ConfigError: unknown key, bad value or a secret in the file
        """
        _reject_secrets(data)
        unknown = sorted(set(data) - set(TOP_LEVEL_KEYS))
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")

        backends = data.get("backends") or []
        if not isinstance(backends, (list, tuple)):
            raise ConfigError("backends", "must be a list")
        selection = _section(data, "selection")
        export = _section(data, "export")

        try:
            prompt_kind = PromptKind(str(data.get("prompt_kind", PromptKind.CO_STAR.value)))
        except ValueError as e:
            raise ConfigError("prompt_kind", "must be one of to, ro, costar") from e
        try:
            retry = RetryPolicy.from_dict(_section(data, "retry"))
        except ValidationError as e:
            raise ConfigError("retry", e.message) from e

        return cls(
            corpus_dir=Path(data.get("corpus_dir", "corpus")),
            run_dir=Path(data.get("run_dir", "runs/default")),
            manifest_path=Path(data.get("manifest_path", "data/manifest.csv")),
            backends=tuple(_spec(b, f"backends[{i}]") for i, b in enumerate(backends)),
            classifier=_spec(data.get("classifier"), "classifier"),
            embedding=_spec(data.get("embedding"), "embedding"),
            prompt_kind=prompt_kind,
            p=selection.get("p", 0.8),
            k_rounds=selection.get("k_rounds", 5),
            base_seed=data.get("base_seed", 0),
            max_in_flight=data.get("max_in_flight", 4),
            mock_mode=bool(data.get("mock_mode", False)),
            retry=retry,
            fetch_max_in_flight=_section(data, "fetch").get("max_in_flight", 4),
            pair_lock=bool(selection.get("pair_lock", False)),
            selection_source=selection.get("source", "report"),
            selection_mode=selection.get("mode", "diverse"),
            report_filter=str(export.get("report_filter", "all")),
            export_input_source=export.get("input_source", "report"),
            train=_section(data, "train"),
            descriptions=data.get("descriptions", "yaml"),
        )

    @classmethod
    async def from_provider(cls, provider: ConfigurationProvider) -> "RunConfig":
        data = {}
        for key in TOP_LEVEL_KEYS:
            if await provider.has(key):
                data[key] = await provider.get(key)
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        """The YAML schema form; `from_dict(to_dict())` gives an equal config."""
        return {
            "corpus_dir": str(self.corpus_dir),
            "run_dir": str(self.run_dir),
            "manifest_path": str(self.manifest_path),
            "prompt_kind": self.prompt_kind.value,
            "base_seed": self.base_seed,
            "max_in_flight": self.max_in_flight,
            "mock_mode": self.mock_mode,
            "backends": [spec.to_dict() for spec in self.backends],
            "classifier": self.classifier.to_dict() if self.classifier else None,
            "embedding": self.embedding.to_dict() if self.embedding else None,
            "retry": {
                "max_attempts": self.retry.max_attempts,
                "base_delay": self.retry.base_delay,
                "multiplier": self.retry.multiplier,
                "jitter": self.retry.jitter,
            },
            "fetch": {"max_in_flight": self.fetch_max_in_flight},
            "selection": {
                "p": self.p,
                "k_rounds": self.k_rounds,
                "pair_lock": self.pair_lock,
                "source": self.selection_source,
                "mode": self.selection_mode,
            },
            "export": {"report_filter": self.report_filter,
                       "input_source": self.export_input_source},
            "train": dict(self.train),
            "descriptions": self.descriptions,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)


def _fraction(value: Any) -> bool:
    return positive(value) and value <= 1


def _count(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


def _path(value: Any) -> bool:
    return isinstance(value, Path) and bool(str(value).strip()) and str(value) != "."


_run_validator = FieldValidator({
    "corpus_dir": (_path, "must be a directory path"),
    "run_dir": (_path, "must be a directory path"),
    "manifest_path": (_path, "must be a file path"),
    "p": (_fraction, "must be in (0, 1]"),
    "k_rounds": (_count, "must be >= 1"),
    "base_seed": (lambda v: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
                  "must be a non-negative integer"),
    "max_in_flight": (_count, "must be >= 1"),
    "fetch_max_in_flight": (_count, "must be >= 1"),
    "selection_source": (lambda v: _choice(v, SELECTION_SOURCES), "must be report or code"),
    "selection_mode": (lambda v: _choice(v, SELECTION_MODES), "must be diverse or unseen_cwe"),
    "export_input_source": (lambda v: _choice(v, INPUT_SOURCES), "must be report or code"),
    "descriptions": (lambda v: _choice(v, DESCRIPTION_SOURCES), "must be yaml or nvd"),
    "report_filter": (lambda v: isinstance(v, str) and bool(v.strip()), "cannot be empty"),
})


def flag_overrides(*, mock: bool = False, seed: Optional[int] = None,
                   prompt: Optional[str] = None, rounds: Optional[int] = None,
                   p: Optional[float] = None, pair_lock: bool = False,
                   report_filter: Optional[str] = None) -> Dict[str, Any]:
    """Nested config fragment for the command-line flags that were given."""
    overrides: Dict[str, Any] = {}
    selection: Dict[str, Any] = {}
    if mock:
        overrides["mock_mode"] = True
    if seed is not None:
        overrides["base_seed"] = seed
    if prompt is not None:
        overrides["prompt_kind"] = prompt
    if rounds is not None:
        selection["k_rounds"] = rounds
    if p is not None:
        selection["p"] = p
    if pair_lock:
        selection["pair_lock"] = True
    if selection:
        overrides["selection"] = selection
    if report_filter is not None:
        overrides["export"] = {"report_filter": report_filter}
    return overrides


async def load_run_config(config_path: Optional[str] = None,
                          overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """File, then `HALU_` environment, then flag overrides.

    Only `HALU_` variables naming a known top-level key are read.

    Raises:
        ConfigurationError: unreadable file
        ConfigError: invalid field
    """
    if config_path is not None and not Path(config_path).is_file():
        raise ConfigError("config", f"{config_path} not found")
    provider = YAMLConfigProvider(config_path, env_keys=TOP_LEVEL_KEYS)
    await provider.initialize(config=overrides)
    return await RunConfig.from_provider(provider)
