"""Value types exchanged with model backends."""

from dataclasses import dataclass, asdict, field
from enum import Enum
from typing import Any, Dict, Optional

from ..core.errors import ConfigError, ValidationError
from ..core.validation import FieldValidator, first_failure, non_negative, positive
from ..corpus.samples import SampleKind
from ..prompts.engine import Phase, PromptKind

WORD_LIMIT = 500


class Label(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @classmethod
    def for_kind(cls, kind: SampleKind) -> "Label":
        return cls.POSITIVE if kind is SampleKind.VULNERABLE else cls.NEGATIVE


@dataclass(frozen=True)
class BackendSpec:
    """One model endpoint. Secrets stay in the environment variable named here."""
    name: str
    endpoint: str = ""
    model_id: str = ""
    api_key_env: str = ""
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 120.0
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        try:
            _spec_validator.validate(self)
        except ValidationError as e:
            field_name, message = first_failure(e)
            raise ConfigError(f"backends.{self.name}.{field_name}", message) from e

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BackendSpec":
        if "api_key" in data:
            raise ConfigError("api_key", "secrets belong in the environment, use api_key_env")
        known = {"name", "endpoint", "model_id", "api_key_env", "temperature",
                 "max_output_tokens", "timeout"}
        unknown = {k: v for k, v in data.items() if k not in known}
        if "name" not in data:
            raise ConfigError("backends.name", "is required")
        return cls(
            name=str(data["name"]),
            endpoint=str(data.get("endpoint", "")),
            model_id=str(data.get("model_id", data["name"])),
            api_key_env=str(data.get("api_key_env", "")),
            temperature=data.get("temperature", 0.0),
            max_output_tokens=data.get("max_output_tokens", 1024),
            timeout=data.get("timeout", 120.0),
            extra=unknown,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("extra")
        data.update(self.extra)
        return data


_spec_validator = FieldValidator({
    "name": (lambda v: isinstance(v, str) and bool(v.strip()), "must be a non-empty string"),
    "timeout": (positive, "must be > 0"),
    "temperature": (non_negative, "must be >= 0"),
    "max_output_tokens": (lambda v: isinstance(v, int) and positive(v), "must be a positive integer"),
})


def count_words(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class Report:
    """A generated analysis bound to its sample; the label follows the sample kind."""
    report_id: str
    sample_id: str
    backend_name: str
    prompt_kind: PromptKind
    text: str
    label: Label
    word_count: int = -1
    over_limit: bool = False
    phase: Phase = Phase.TRAINING

    def __post_init__(self):
        if self.word_count < 0:
            count = count_words(self.text)
            object.__setattr__(self, "word_count", count)
            object.__setattr__(self, "over_limit", count > WORD_LIMIT)

    @staticmethod
    def make_id(sample_id: str, backend_name: str, prompt_kind: PromptKind,
                phase: Phase = Phase.TRAINING) -> str:
        return f"{sample_id}|{backend_name}|{prompt_kind.value}|{phase.value}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "report_id": self.report_id,
            "sample_id": self.sample_id,
            "backend_name": self.backend_name,
            "prompt_kind": self.prompt_kind.value,
            "phase": self.phase.value,
            "text": self.text,
            "word_count": self.word_count,
            "over_limit": self.over_limit,
            "label": self.label.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Report":
        return cls(
            report_id=data["report_id"],
            sample_id=data["sample_id"],
            backend_name=data["backend_name"],
            prompt_kind=PromptKind(data["prompt_kind"]),
            text=data["text"],
            label=Label(data["label"]),
            word_count=int(data["word_count"]),
            over_limit=bool(data["over_limit"]),
            phase=Phase(data.get("phase", Phase.TRAINING.value)),
        )


@dataclass(frozen=True)
class Classification:
    """A classifier's decision about one sample's report."""
    sample_id: str
    predicted: Label
    backend_name: str
    score: Optional[float] = None
    report_id: str = ""

    def __post_init__(self):
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score {self.score} outside [0, 1]",
                                  details={"sample_id": self.sample_id})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sample_id": self.sample_id,
            "predicted": self.predicted.value,
            "score": self.score,
            "backend_name": self.backend_name,
            "report_id": self.report_id,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Classification":
        return cls(
            sample_id=data["sample_id"],
            predicted=Label(data["predicted"]),
            backend_name=data["backend_name"],
            score=data.get("score"),
            report_id=data.get("report_id", ""),
        )
