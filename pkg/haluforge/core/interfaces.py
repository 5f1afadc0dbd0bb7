from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Set, List
from dataclasses import dataclass, field
from enum import auto, IntFlag


class StageStatus(IntFlag):
    """Core states that every pipeline stage moves through"""
    PENDING = auto()
    RUNNING = auto()
    COMPLETED = auto()
    FAILED = auto()

    def __str__(self) -> str:
        return self.name.lower()

    def __repr__(self) -> str:
        return f"StageStatus.{self.name}"

    @classmethod
    def get_terminal_states(cls) -> Set['StageStatus']:
        """Returns states that represent end of a stage"""
        return {cls.COMPLETED, cls.FAILED}

    @classmethod
    def get_active_states(cls) -> Set['StageStatus']:
        """Returns states that represent an unfinished stage"""
        return {cls.PENDING, cls.RUNNING}


@dataclass
class StageContext:
    """State recorded for one stage of a run"""
    stage: str
    status: StageStatus = StageStatus.PENDING
    metadata: Dict[str, Any] = field(default_factory=dict)
    error: Optional[Exception] = None


@dataclass(frozen=True)
class FetchResponse:
    """Raw reply of a patch fetch"""
    status: int
    body: bytes
    url: str = ""


@dataclass(frozen=True)
class Verdict:
    """A classifier decision over one report"""
    positive: bool
    score: Optional[float] = None


class Backend(ABC):
    """Base interface for model backends

    A backend wraps one model endpoint (or a deterministic mock of it). It must
    manage its own lifecycle and be safe to share across concurrent requests.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Get the backend name used in reports and metrics"""
        pass

    async def initialize(self, config: Dict[str, Any]) -> None:
        """Initialize the backend with configuration"""
        pass

    async def shutdown(self) -> None:
        """Release connections held by the backend"""
        pass

    async def health_check(self) -> bool:
        """Check if the backend is operational

        Returns:
            True if backend is healthy
        """
        return True


class GeneratorBackend(Backend):
    """Backend that turns a rendered prompt into an analysis report"""

    @abstractmethod
    async def complete(self, prompt: str) -> str:
        """Generate a completion for the prompt

        Args:
            prompt: Full prompt text, code included

        Returns:
            The completion text

        Raises:
            TransientBackendError: If the request may succeed when retried
            BackendUnavailableError: If the backend rejects the request
        """
        pass


class ClassifierBackend(Backend):
    """Backend that judges whether a report describes a real vulnerability"""

    @abstractmethod
    async def judge(self, report_text: str) -> Verdict:
        """Classify a report

        Args:
            report_text: Report text to classify

        Returns:
            The verdict

        Raises:
            UnparseableVerdictError: If the reply matches no verdict
        """
        pass


class EmbeddingBackend(Backend):
    """Backend that encodes text into a fixed-size vector"""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Vector dimension produced by this backend"""
        pass

    @abstractmethod
    async def embed_text(self, text: str) -> List[float]:
        """Encode text

        Args:
            text: Non-empty text

        Returns:
            List of `dim` floats
        """
        pass


class PatchFetcher(ABC):
    """Base interface for patch retrieval

    Implementations may be network-backed or serve checked-in fixtures.
    """

    @abstractmethod
    async def fetch(self, url: str) -> FetchResponse:
        """Fetch the patch body at a URL

        Args:
            url: Commit or patch URL

        Returns:
            Status and raw body bytes
        """
        pass


class DescriptionSource(ABC):
    """Base interface for CVE description lookup"""

    @abstractmethod
    async def describe(self, cve_id: str) -> str:
        """Get the description text of a CVE, empty if unknown"""
        pass


class ConfigurationProvider(ABC):
    """Base interface for configuration management

    Responsible for the run configuration:
    - Configuration file values
    - Environment overrides
    - Values set at runtime from CLI flags
    """

    @abstractmethod
    async def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value

        Args:
            key: Configuration key (supports dot notation for nested configs)
            default: Default value if key doesn't exist

        Returns:
            Configuration value

        Raises:
            ConfigurationError: If provider is not initialized
        """
        pass

    @abstractmethod
    async def set(self, key: str, value: Any) -> None:
        """Set configuration value

        Args:
            key: Configuration key (supports dot notation for nested configs)
            value: Value to set
        """
        pass

    @abstractmethod
    async def has(self, key: str) -> bool:
        """Check if configuration exists"""
        pass

    @abstractmethod
    async def load(self, config_source: str) -> Dict[str, Any]:
        """Load configuration from source

        Args:
            config_source: Path of the configuration file

        Raises:
            ConfigurationError: If loading fails
        """
        pass

    @abstractmethod
    async def get_namespace(self, namespace: str) -> Dict[str, Any]:
        """Get all configurations under a namespace"""
        pass


class PipelineOrchestrator(ABC):
    """Base interface for pipeline orchestration

    Runs the stages of the pipeline in order and tracks their state.
    """

    @abstractmethod
    async def run_stage(self, stage: str) -> StageContext:
        """Run one stage

        Raises:
            MissingStageInputError: If upstream artifacts are missing
            StageError: If the stage fails
        """
        pass

    @abstractmethod
    def get_stage_status(self, stage: str) -> StageStatus:
        """Get the recorded status of a stage"""
        pass
