"""Fine-tuning dataset export, training config and LoRA arithmetic."""

from .config import TrainConfig, build_train_config, emit_train_config, write_train_config
from .export import ExportSet, TrainRecord, export_training_set, write_export
from .lora import LoraFactors, lora_effective_weight, lora_param_saving

__all__ = [
    "TrainConfig", "build_train_config", "emit_train_config", "write_train_config",
    "TrainRecord", "ExportSet", "export_training_set", "write_export",
    "LoraFactors", "lora_effective_weight", "lora_param_saving",
]
