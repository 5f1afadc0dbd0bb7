"""Run configuration, artifact store, stage orchestration and the CLI."""

from .config import RunConfig, flag_overrides, load_run_config
from .orchestrator import COMMANDS, STAGES, Orchestrator
from .store import PIPELINE_VERSION, RunStore

__all__ = [
    "RunConfig", "flag_overrides", "load_run_config",
    "Orchestrator", "STAGES", "COMMANDS",
    "RunStore", "PIPELINE_VERSION",
]
