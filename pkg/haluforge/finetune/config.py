"""Training configuration handed to the external trainer."""

import json
from dataclasses import dataclass, asdict, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from ..core.errors import UnknownFieldError
from ..core.validation import FieldValidator, positive


@dataclass(frozen=True)
class TrainConfig:
    base_model: str = "gemma-7b"
    adapter: str = "lora"
    lora_rank: int = 8
    lora_targets: List[str] = field(default_factory=lambda: ["q_proj", "v_proj"])
    lr_schedule: str = "cosine"
    lr_init: float = 1e-6
    weight_decay: float = 1e-4
    batch_size: int = 2
    grad_accum_steps: int = 2
    precision: str = "fp16"
    epochs: int = 350

    def __post_init__(self):
        object.__setattr__(self, "lora_targets", list(self.lora_targets))
        _train_validator.validate(self)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_train_validator = FieldValidator({
    "lora_rank": (positive, "must be positive"),
    "lr_init": (positive, "must be positive"),
    "weight_decay": (positive, "must be positive"),
    "batch_size": (positive, "must be positive"),
    "grad_accum_steps": (positive, "must be positive"),
    "epochs": (positive, "must be positive"),
    "lora_targets": (lambda v: bool(v) and all(isinstance(t, str) and t for t in v),
                     "must list at least one parameter name"),
})

TRAIN_FIELDS = tuple(f.name for f in fields(TrainConfig))


def build_train_config(overrides: Optional[Mapping[str, Any]] = None) -> TrainConfig:
    """Defaults with `overrides` applied.

    Raises:
        UnknownFieldError: an override names no TrainConfig field
        ValidationError: an overridden value breaks a field constraint
    """
    overrides = dict(overrides or {})
    for name in overrides:
        if name not in TRAIN_FIELDS:
            raise UnknownFieldError(name)
    return replace(TrainConfig(), **overrides)


def emit_train_config(overrides: Optional[Mapping[str, Any]] = None) -> str:
    """Serialized config, sorted keys; equal overrides give equal bytes."""
    config = build_train_config(overrides)
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"


def write_train_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> TrainConfig:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_train_config(overrides), encoding="utf-8")
    return build_train_config(overrides)
