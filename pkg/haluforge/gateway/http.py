"""OpenAI-compatible HTTP client."""

import os
from typing import Any, Dict, List, Optional

import requests

from ..core.errors import BackendUnavailableError, EmptyCompletionError, TransientBackendError
from .types import BackendSpec

RETRYABLE_STATUS = {408, 409, 425, 429}


class ChatCompletionClient:
    """Blocking client for `/chat/completions` and `/embeddings` endpoints.

    The bearer token is read from the variable named by `api_key_env`.
    """

    def __init__(self, spec: BackendSpec, session: Optional[requests.Session] = None):
        self.spec = spec
        self._session = session or requests.Session()

    @property
    def base_url(self) -> str:
        return self.spec.endpoint.rstrip("/")

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.spec.api_key_env:
            key = os.environ.get(self.spec.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, url: str, payload: Dict[str, Any], model_id: str) -> Dict[str, Any]:
        try:
            response = self._session.post(url, json=payload, headers=self._headers(),
                                          timeout=self.spec.timeout)
        except (requests.exceptions.Timeout, requests.exceptions.ConnectionError) as e:
            raise TransientBackendError(f"{self.spec.name}: {e}",
                                        details={"name": self.spec.name}) from e
        except requests.exceptions.RequestException as e:
            raise BackendUnavailableError(self.spec.name, str(e)) from e

        status = response.status_code
        if status in RETRYABLE_STATUS or status >= 500:
            raise TransientBackendError(f"{self.spec.name}: HTTP {status}",
                                        details={"name": self.spec.name, "status": status})
        if status >= 400:
            raise BackendUnavailableError(
                self.spec.name, f"HTTP {status} for model {model_id}: {response.text[:300]}")
        try:
            return response.json()
        except ValueError as e:
            raise TransientBackendError(f"{self.spec.name}: invalid JSON reply",
                                        details={"name": self.spec.name}) from e

    def chat(self, content: str, model_id: Optional[str] = None) -> str:
        model = model_id or self.spec.model_id
        payload = {
            "model": model,
            "messages": [{"role": "user", "content": content}],
            "temperature": self.spec.temperature,
            "max_tokens": self.spec.max_output_tokens,
        }
        data = self._post(f"{self.base_url}/chat/completions", payload, model)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            text = None
        if not text or not str(text).strip():
            raise EmptyCompletionError(self.spec.name)
        return str(text)

    def embed(self, text: str) -> List[float]:
        payload = {"model": self.spec.model_id, "input": text}
        data = self._post(f"{self.base_url}/embeddings", payload, self.spec.model_id)
        if "data" in data and data["data"]:
            return [float(x) for x in data["data"][0]["embedding"]]
        if "embedding" in data:
            return [float(x) for x in data["embedding"]]
        raise BackendUnavailableError(self.spec.name, "reply carries no embedding")
