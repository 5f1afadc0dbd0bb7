"""Prompt selection and rendering."""

from dataclasses import dataclass, asdict, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..core.errors import MissingDescriptionError, UnknownTemplateError, ValidationError
from ..core.validation import TextValidator
from ..corpus.samples import Sample, SampleKind

PLACEHOLDER = "{{CONTEXT}}"
CODE_SEPARATOR = "--- CODE ---"
TEMPLATE_DIR = Path(__file__).parent / "templates"

GENERIC_CONTEXT = (
    "The Rust code is suspected to have a vulnerability, but no specific "
    "project details or past issues are known."
)
COSTAR_GENERIC_CONTEXT = (
    GENERIC_CONTEXT + " This absence of context necessitates a comprehensive "
    "and focused review to identify the most significant security concern, "
    "covering a wide range of common vulnerabilities in Rust."
)
COSTAR_MARKERS = ("#Context#", "#Objective#", "#Style#", "#Tone#", "#Audience#", "#Response#")
WORD_LIMIT_PHRASE = "word limit of 500 words"


class PromptKind(str, Enum):
    TASK_ORIENTED = "to"
    ROLE_ORIENTED = "ro"
    CO_STAR = "costar"


class ContextSource(str, Enum):
    CVE_DESCRIPTION = "cve_description"
    GENERIC_SUSPICION = "generic_suspicion"


class Phase(str, Enum):
    TRAINING = "training"
    EVALUATION = "evaluation"


@dataclass(frozen=True)
class RenderedPrompt:
    """Instructions with their context, plus the code they are about."""
    kind: PromptKind
    context_source: ContextSource
    text: str
    attached_code: str
    sample_id: str = ""
    phase: Phase = Phase.EVALUATION

    @property
    def message(self) -> str:
        """The single user message sent to a backend."""
        return f"{self.text}\n{CODE_SEPARATOR}\n{self.attached_code}"

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind.value
        data["context_source"] = self.context_source.value
        data["phase"] = self.phase.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RenderedPrompt":
        return cls(
            kind=PromptKind(data["kind"]),
            context_source=ContextSource(data["context_source"]),
            text=data["text"],
            attached_code=data["attached_code"],
            sample_id=data.get("sample_id", ""),
            phase=Phase(data.get("phase", Phase.EVALUATION.value)),
        )


class PromptTemplates:
    """Checked-in template files, one `{{CONTEXT}}` placeholder each."""

    def __init__(self, directory: Optional[Path] = None):
        self.directory = Path(directory) if directory else TEMPLATE_DIR
        self._cache: Dict[str, str] = {}

    def load_template(self, template_id: str) -> str:
        if template_id not in self._cache:
            path = self.directory / f"{template_id}.txt"
            if not path.is_file():
                raise UnknownTemplateError(template_id)
            text = path.read_text(encoding="utf-8").replace("\r\n", "\n")
            self._cache[template_id] = text.rstrip("\n")
        return self._cache[template_id]

    def validate_template(self, template: str) -> bool:
        return template.count(PLACEHOLDER) == 1

    def for_kind(self, kind: PromptKind) -> str:
        template = self.load_template(kind.value)
        if not self.validate_template(template):
            raise UnknownTemplateError(kind.value)
        return template


_default_templates = PromptTemplates()
_text_validator = TextValidator()


def _require_text(value: str, what: str) -> None:
    try:
        _text_validator.validate(value)
    except ValidationError as e:
        raise ValidationError(f"{what} cannot be empty", details=e.details) from e


def generic_context(kind: Optional[PromptKind] = None) -> str:
    return COSTAR_GENERIC_CONTEXT if kind is PromptKind.CO_STAR else GENERIC_CONTEXT


def select_context(sample: Sample, phase: Phase,
                   kind: Optional[PromptKind] = None) -> Tuple[ContextSource, str]:
    """Context block for a sample.

    Only vulnerable training samples see their CVE description; everything
    else gets the generic suspicion text, so evaluation prompts of a pair
    differ in their code alone.

    Raises:
        MissingDescriptionError: vulnerable training sample without description
    """
    if phase is Phase.TRAINING and sample.kind is SampleKind.VULNERABLE:
        if not sample.description.strip():
            raise MissingDescriptionError(sample.sample_id)
        return ContextSource.CVE_DESCRIPTION, sample.description.strip()
    return ContextSource.GENERIC_SUSPICION, generic_context(kind)


def render_prompt(kind: PromptKind, context_text: str, code: str,
                  context_source: ContextSource = ContextSource.GENERIC_SUSPICION,
                  templates: Optional[PromptTemplates] = None,
                  sample_id: str = "") -> RenderedPrompt:
    """Substitute the context into the kind's template and attach the code."""
    _require_text(context_text, "context_text")
    _require_text(code, "code")
    template = (templates or _default_templates).for_kind(kind)
    text = template.replace(PLACEHOLDER, context_text.replace("\r\n", "\n"))
    return RenderedPrompt(
        kind=kind,
        context_source=context_source,
        text=text,
        attached_code=code.replace("\r\n", "\n"),
        sample_id=sample_id,
    )


def render_for_sample(sample: Sample, kind: PromptKind, phase: Phase,
                      templates: Optional[PromptTemplates] = None) -> RenderedPrompt:
    source, context = select_context(sample, phase, kind)
    prompt = render_prompt(kind, context, sample.text, source, templates, sample.sample_id)
    return replace(prompt, phase=phase)


def render_classifier_prompt(report_text: str,
                             templates: Optional[PromptTemplates] = None) -> str:
    _require_text(report_text, "report_text")
    template = (templates or _default_templates).load_template("classifier")
    return template.replace(PLACEHOLDER, report_text)


def instruction_text(templates: Optional[PromptTemplates] = None) -> str:
    """Fixed instruction carried by every fine-tuning record."""
    return (templates or _default_templates).load_template("instruction")
