"""Wire and mock backend implementations."""

import asyncio
import hashlib
import re
from typing import List, Optional

import numpy as np

from ..core.errors import UnparseableVerdictError
from ..core.interfaces import ClassifierBackend, EmbeddingBackend, GeneratorBackend, Verdict
from ..prompts.engine import PromptTemplates, render_classifier_prompt
from .http import ChatCompletionClient
from .types import BackendSpec

REAL_MARKER = "REAL-VULN"
VERDICT_TOKEN = re.compile(r"\b(positive|negative)\b", re.IGNORECASE)


def parse_verdict(reply: str) -> Verdict:
    """Read the verdict from the reply's first non-empty line.

    The line must name exactly one of POSITIVE / NEGATIVE, in any case.

    Raises:
        UnparseableVerdictError: neither or both tokens present
    """
    lines = [line for line in reply.strip().splitlines() if line.strip()]
    first = lines[0] if lines else ""
    tokens = {t.lower() for t in VERDICT_TOKEN.findall(first)}
    if len(tokens) != 1:
        raise UnparseableVerdictError(reply)
    return Verdict(positive=tokens.pop() == "positive")


def _digest_seed(*parts: object) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class WireGenerator(GeneratorBackend):
    """Report generator behind a chat-completion endpoint."""

    def __init__(self, spec: BackendSpec, client: Optional[ChatCompletionClient] = None):
        self.spec = spec
        self._client = client or ChatCompletionClient(spec)

    @property
    def name(self) -> str:
        return self.spec.name

    async def complete(self, prompt: str) -> str:
        return await asyncio.to_thread(self._client.chat, prompt)


class WireClassifier(ClassifierBackend):
    """Fine-tuned classifier behind a chat-completion endpoint."""

    def __init__(self, spec: BackendSpec, model_id: Optional[str] = None,
                 client: Optional[ChatCompletionClient] = None,
                 templates: Optional[PromptTemplates] = None):
        self.spec = spec
        self.model_id = model_id or spec.model_id
        self._client = client or ChatCompletionClient(spec)
        self._templates = templates

    @property
    def name(self) -> str:
        return self.spec.name

    async def judge(self, report_text: str) -> Verdict:
        prompt = render_classifier_prompt(report_text, self._templates)
        reply = await asyncio.to_thread(self._client.chat, prompt, self.model_id)
        return parse_verdict(reply)


class WireEmbeddingBackend(EmbeddingBackend):
    """Embedding model behind an `/embeddings` endpoint."""

    def __init__(self, spec: BackendSpec, client: Optional[ChatCompletionClient] = None):
        self.spec = spec
        self._client = client or ChatCompletionClient(spec)
        self._dim = int(spec.extra.get("dim", 0))

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def dim(self) -> int:
        return self._dim

    async def embed_text(self, text: str) -> List[float]:
        values = await asyncio.to_thread(self._client.embed, text)
        if not self._dim:
            self._dim = len(values)
        return values


_MOCK_PHRASES = (
    "The function indexes a buffer with a length derived from caller input.",
    "An unchecked arithmetic operation may wrap before the bounds check.",
    "The unsafe block relies on an invariant that is not re-established.",
    "A raw pointer is dereferenced after the owning collection may reallocate.",
    "The capacity comparison uses a value that can be stale at this point.",
    "Error paths return early without restoring the length field.",
    "A lock guard is held across a call that can re-enter the same lock.",
    "The parser trusts a size prefix read from untrusted input.",
    "Iteration continues after the element count has been decremented.",
    "The conversion truncates a usize into a narrower integer type.",
)


class MockGenerator(GeneratorBackend):
    """Deterministic generator: text is a pure function of (name, seed, prompt).

    A `REAL-VULN` marker is included for a hash-determined share
    `real_rate` of prompts.
    """

    def __init__(self, name: str = "mock-generator", seed: int = 0, real_rate: float = 0.5,
                 min_sentences: int = 4, max_sentences: int = 9):
        self._name = name
        self.seed = seed
        self.real_rate = real_rate
        self.min_sentences = min_sentences
        self.max_sentences = max_sentences

    @property
    def name(self) -> str:
        return self._name

    def render(self, prompt: str) -> str:
        rng = np.random.default_rng(_digest_seed(self.seed, self._name, prompt))
        count = int(rng.integers(self.min_sentences, self.max_sentences + 1))
        picks = rng.integers(0, len(_MOCK_PHRASES), size=count)
        sentences = [_MOCK_PHRASES[i] for i in picks]
        if rng.random() < self.real_rate:
            sentences.insert(0, f"{REAL_MARKER}:")
        return "Vulnerability report. " + " ".join(sentences)

    async def complete(self, prompt: str) -> str:
        return self.render(prompt)


class MockKeywordClassifier(ClassifierBackend):
    """Positive exactly when the report carries the marker."""

    def __init__(self, name: str = "mock-classifier", marker: str = REAL_MARKER):
        self._name = name
        self.marker = marker

    @property
    def name(self) -> str:
        return self._name

    async def judge(self, report_text: str) -> Verdict:
        positive = self.marker in report_text
        return Verdict(positive=positive, score=1.0 if positive else 0.0)


class MockEmbeddingBackend(EmbeddingBackend):
    """Seeded hash of the text expanded to a normalized vector."""

    def __init__(self, name: str = "mock-embedding", dim: int = 64, seed: int = 0):
        self._name = name
        self._dim = dim
        self.seed = seed

    @property
    def name(self) -> str:
        return self._name

    @property
    def dim(self) -> int:
        return self._dim

    def vector(self, text: str) -> List[float]:
        rng = np.random.default_rng(_digest_seed(self.seed, text))
        values = rng.standard_normal(self._dim)
        return (values / np.linalg.norm(values)).tolist()

    async def embed_text(self, text: str) -> List[float]:
        return self.vector(text)
