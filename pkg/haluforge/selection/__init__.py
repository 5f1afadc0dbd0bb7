"""Embeddings, diverse splitting and the unseen-CWE partition."""

from .diverse import SplitRound, diverse_select, make_rounds, make_unseen_split, seeded_start
from .partition import CwePartition, partition_unseen_cwe
from .similarity import EmbeddingStore, EmbeddingVector, cosine_similarity, embed, embed_all

__all__ = [
    "EmbeddingVector", "EmbeddingStore", "cosine_similarity", "embed", "embed_all",
    "SplitRound", "diverse_select", "make_rounds", "make_unseen_split", "seeded_start",
    "CwePartition", "partition_unseen_cwe",
]
