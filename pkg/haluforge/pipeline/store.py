"""Run directory persistence."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from loguru import logger

from ..core.errors import DataNotFoundError, StorageError, VersionMismatchError
from ..core.interfaces import StageContext, StageStatus

PIPELINE_VERSION = "1"
STATE_FILE = "state.yaml"


class RunStore:
    """Artifacts under one directory, keyed by relative path.

    The key's extension picks the format: `.json` is indented JSON,
    `.jsonl` one record per line, `.yaml` a YAML document and anything
    else plain text. Keys are always written with sorted keys so equal data
    gives equal bytes.
    """

    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, key: str) -> Path:
        return self.root / key

    def exists(self, key: str) -> bool:
        return self.path(key).is_file()

    def store(self, key: str, data: Any, **options) -> None:
        path = self.path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if key.endswith(".jsonl"):
                text = "".join(json.dumps(record, sort_keys=True) + "\n" for record in data)
            elif key.endswith(".json"):
                text = json.dumps(data, sort_keys=True, indent=options.get("indent", 2)) + "\n"
            elif key.endswith((".yaml", ".yml")):
                text = yaml.safe_dump(data, sort_keys=True, default_flow_style=False)
            elif isinstance(data, bytes):
                path.write_bytes(data)
                return
            else:
                text = str(data)
            path.write_text(text, encoding="utf-8")
        except (OSError, TypeError, ValueError) as e:
            raise StorageError(f"Failed to store {key}: {e}", details={"key": key}) from e

    def retrieve(self, key: str) -> Any:
        path = self.path(key)
        if not path.is_file():
            raise DataNotFoundError(f"No artifact {key} in {self.root}", details={"key": key})
        text = path.read_text(encoding="utf-8")
        if key.endswith(".jsonl"):
            return [json.loads(line) for line in text.splitlines() if line.strip()]
        if key.endswith(".json"):
            return json.loads(text)
        if key.endswith((".yaml", ".yml")):
            return yaml.safe_load(text)
        return text

    def delete(self, key: str) -> None:
        path = self.path(key)
        if path.is_file():
            path.unlink()

    def list_keys(self, pattern: str = "*") -> List[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.relative_to(self.root).as_posix()
                      for p in self.root.glob(pattern) if p.is_file())

    def load_state(self) -> Dict[str, Any]:
        if not self.exists(STATE_FILE):
            return {"pipeline_version": PIPELINE_VERSION, "stages": {}}
        return self.retrieve(STATE_FILE) or {}

    def check_version(self) -> None:
        """Refuse a run directory written by another pipeline version.

        Raises:
            VersionMismatchError: stamp differs from PIPELINE_VERSION
        """
        found = str(self.load_state().get("pipeline_version", PIPELINE_VERSION))
        if found != PIPELINE_VERSION:
            raise VersionMismatchError(found, PIPELINE_VERSION)

    def record_stage(self, context: StageContext,
                     monitor: Optional[Dict[str, Any]] = None) -> None:
        state = self.load_state()
        state["pipeline_version"] = PIPELINE_VERSION
        entry: Dict[str, Any] = {"status": str(context.status),
                                 "metadata": dict(context.metadata)}
        if context.error is not None:
            entry["error"] = str(context.error)
        state.setdefault("stages", {})[context.stage] = entry
        if monitor is not None:
            state["monitor"] = monitor
        self.store(STATE_FILE, state)
        logger.debug("{}: {}", context.stage, context.status)

    def stage_status(self, stage: str) -> StageStatus:
        entry = self.load_state().get("stages", {}).get(stage)
        if not entry:
            return StageStatus.PENDING
        return StageStatus[str(entry["status"]).upper()]
