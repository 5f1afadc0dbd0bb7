"""Retry policy for backend calls."""

import random
from dataclasses import dataclass
from typing import Awaitable, Callable, Optional, TypeVar

from loguru import logger
from tenacity import AsyncRetrying, RetryCallState, retry_if_exception_type, stop_after_attempt

from ..core.errors import TransientBackendError
from ..core.validation import FieldValidator, non_negative, positive

T = TypeVar("T")


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff: base_delay * multiplier**n, scaled by 1 ± jitter."""
    max_attempts: int = 3
    base_delay: float = 1.0
    multiplier: float = 2.0
    jitter: float = 0.2

    def __post_init__(self):
        _policy_validator.validate(self)

    def delay(self, attempt: int, rng: Optional[random.Random] = None) -> float:
        """Wait after the `attempt`-th failure (1-based)."""
        base = self.base_delay * self.multiplier ** (attempt - 1)
        if not self.jitter:
            return base
        spread = (rng or random).uniform(-self.jitter, self.jitter)
        return max(0.0, base * (1.0 + spread))

    @classmethod
    def from_dict(cls, data: dict) -> "RetryPolicy":
        return cls(**{k: data[k] for k in ("max_attempts", "base_delay", "multiplier", "jitter")
                      if k in data})


_policy_validator = FieldValidator({
    "max_attempts": (lambda v: isinstance(v, int) and positive(v), "must be a positive integer"),
    "base_delay": (non_negative, "must be >= 0"),
    "multiplier": (positive, "must be > 0"),
    "jitter": (lambda v: non_negative(v) and v < 1, "must be in [0, 1)"),
})


async def call_with_retry(fn: Callable[[], Awaitable[T]], policy: RetryPolicy,
                          label: str = "",
                          on_retry: Optional[Callable[[int], None]] = None) -> T:
    """Await `fn()`, retrying transient failures per the policy.

    Only `TransientBackendError` is retried; after the last attempt the
    final error is re-raised.
    """

    def wait(state: RetryCallState) -> float:
        return policy.delay(state.attempt_number)

    def before_sleep(state: RetryCallState) -> None:
        error = state.outcome.exception() if state.outcome else None
        logger.warning("{} attempt {}/{} failed: {}", label or "call",
                       state.attempt_number, policy.max_attempts, error)
        if on_retry:
            on_retry(state.attempt_number)

    retrying = AsyncRetrying(
        stop=stop_after_attempt(policy.max_attempts),
        wait=wait,
        retry=retry_if_exception_type(TransientBackendError),
        before_sleep=before_sleep,
        reraise=True,
    )
    async for attempt in retrying:
        with attempt:
            return await fn()
    raise AssertionError("unreachable")  # pragma: no cover
