"""Reference low-rank adaptation arithmetic."""

from dataclasses import dataclass
from typing import Dict, Sequence, Union

import numpy as np
from loguru import logger

from ..core.errors import InvalidRankError, ShapeMismatchError

Matrix = Union[np.ndarray, Sequence[Sequence[float]]]


def _matrix(value: Matrix, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.ndim == 0 or array.shape == (1,):
        array = array.reshape(1, 1)
    if array.ndim != 2:
        raise ShapeMismatchError(f"{name} must be a matrix, got {array.ndim} dims")
    return array


@dataclass(frozen=True, eq=False)
class LoraFactors:
    """Frozen W (d×k) with update factors A (d×r) and B (r×k)."""
    W: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        W = _matrix(self.W, "W")
        A = _matrix(self.A, "A")
        B = _matrix(self.B, "B")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

        d, k = W.shape
        if A.shape[0] != d or B.shape[1] != k or A.shape[1] != B.shape[0]:
            raise ShapeMismatchError(
                f"W {W.shape}, A {A.shape}, B {B.shape} do not conform",
                details={"W": W.shape, "A": A.shape, "B": B.shape})
        if A.shape[1] > min(d, k):
            raise InvalidRankError(d, k, A.shape[1])

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def k(self) -> int:
        return self.W.shape[1]

    @property
    def r(self) -> int:
        return self.A.shape[1]


def lora_effective_weight(factors: LoraFactors) -> np.ndarray:
    """W + AB."""
    return factors.W + factors.A @ factors.B


def lora_param_saving(d: int, k: int, r: int) -> Dict[str, Union[int, float]]:
    """Trainable r(d+k) against full d·k parameters.

    Raises:
        InvalidRankError: r > min(d, k)
    """
    if min(d, k, r) < 1:
        raise ShapeMismatchError(f"dimensions must be positive: d={d} k={k} r={r}")
    if r > min(d, k):
        raise InvalidRankError(d, k, r)
    trainable = r * (d + k)
    full = d * k
    ratio = trainable / full
    if ratio >= 1:
        logger.warning("rank {} saves nothing for a {}x{} weight (ratio {:.3f})", r, d, k, ratio)
    return {"trainable": trainable, "full": full, "ratio": ratio}
