"""Greedy diverse train/eval splitting."""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..core.errors import InvalidFractionError, MissingVectorError, ValidationError
from .partition import CwePartition
from .similarity import EmbeddingVector, cosine_similarity


@dataclass(frozen=True)
class SplitRound:
    """One seeded split: `selected_ids` in pick order, `held_out_ids` in input order."""
    round_index: int
    seed: int
    selected_ids: Tuple[str, ...]
    held_out_ids: Tuple[str, ...]
    p: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "round_index": self.round_index,
            "seed": self.seed,
            "p": self.p,
            "selected_ids": list(self.selected_ids),
            "held_out_ids": list(self.held_out_ids),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SplitRound":
        return cls(
            round_index=int(data["round_index"]),
            seed=int(data["seed"]),
            selected_ids=tuple(data["selected_ids"]),
            held_out_ids=tuple(data["held_out_ids"]),
            p=float(data["p"]),
        )


def _check_fraction(p: float) -> None:
    if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0 < p <= 1:
        raise InvalidFractionError(p)


def selection_target(n: int, p: float) -> int:
    """ceil(p * n), robust to float noise such as 0.8 * 162."""
    _check_fraction(p)
    return min(n, math.ceil(round(p * n, 9)))


def seeded_start(n: int, seed: int) -> int:
    """Index of the first pick."""
    return int(np.random.default_rng(seed).integers(n))


def diverse_select(ids: Sequence[str], vectors: Mapping[str, EmbeddingVector], p: float,
                   seed: int, round_index: int = 0,
                   partner: Optional[Mapping[str, str]] = None) -> SplitRound:
    """Pick ceil(p * N) ids, each the least similar to the previous pick.

    The first pick is drawn with `seed`. Every later pick is compared to the
    last selected id only; ties go to the earliest id in input order. With
    `partner`, an id's partner joins right after it, which can overshoot the
    target by one.

    Raises:
        InvalidFractionError: p outside (0, 1]
        MissingVectorError: an id without a vector
    """
    _check_fraction(p)
    if not ids:
        raise ValidationError("diverse_select needs at least one id")
    if len(set(ids)) != len(ids):
        raise ValidationError("ids must be unique")
    for item_id in ids:
        if item_id not in vectors:
            raise MissingVectorError(item_id)

    target = selection_target(len(ids), p)
    remaining: List[str] = list(ids)
    selected: List[str] = []

    def take(index: int) -> None:
        chosen = remaining.pop(index)
        selected.append(chosen)
        mate = partner.get(chosen) if partner else None
        if mate is not None and mate in remaining:
            remaining.remove(mate)
            selected.append(mate)

    take(seeded_start(len(ids), seed))
    while len(selected) < target and remaining:
        anchor = vectors[selected[-1]]
        min_sim = 1.0
        candidate = 0
        for index, item_id in enumerate(remaining):
            sim = cosine_similarity(vectors[item_id], anchor)
            if sim < min_sim:
                min_sim = sim
                candidate = index
        take(candidate)

    chosen = set(selected)
    held_out = tuple(item_id for item_id in ids if item_id not in chosen)
    return SplitRound(round_index, seed, tuple(selected), held_out, float(p))


def make_rounds(ids: Sequence[str], vectors: Mapping[str, EmbeddingVector],
                k_rounds: int = 5, p: float = 0.8, base_seed: int = 0,
                partner: Optional[Mapping[str, str]] = None) -> List[SplitRound]:
    """Independent diverse splits, round i seeded with base_seed + i."""
    if k_rounds < 1:
        raise ValidationError(f"k_rounds must be >= 1, got {k_rounds}")
    rounds = [diverse_select(ids, vectors, p, base_seed + i, i, partner)
              for i in range(k_rounds)]
    logger.info("{} round(s): {} selected, {} held out each", k_rounds,
                len(rounds[0].selected_ids), len(rounds[0].held_out_ids))
    return rounds


def make_unseen_split(ids: Sequence[str], cwe_map: Mapping[str, str],
                      partition: CwePartition, seed: int = 0) -> SplitRound:
    """Seen-CWE samples for fine-tuning, unseen-CWE samples for evaluation."""
    selected = tuple(i for i in ids if cwe_map[i] not in partition.unseen_cwes)
    held_out = tuple(i for i in ids if cwe_map[i] in partition.unseen_cwes)
    if not selected:
        raise InvalidFractionError(0.0)
    return SplitRound(0, seed, selected, held_out, len(selected) / len(ids))


def pair_partners(ids: Sequence[str]) -> Dict[str, str]:
    """`CVE:vuln` <-> `CVE:fixed` for ids whose partner is present."""
    present = set(ids)
    partners: Dict[str, str] = {}
    for item_id in ids:
        cve_id, _, kind = item_id.rpartition(":")
        other = f"{cve_id}:{'fixed' if kind == 'vuln' else 'vuln'}"
        if other in present:
            partners[item_id] = other
    return partners
