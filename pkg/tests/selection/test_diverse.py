import numpy as np
import pytest

from haluforge.core.errors import InvalidFractionError, MissingVectorError, ValidationError
from haluforge.corpus.manifest import CveEntry
from haluforge.selection.diverse import (
    SplitRound, diverse_select, make_rounds, make_unseen_split, pair_partners,
    seeded_start, selection_target,
)
from haluforge.selection.partition import partition_unseen_cwe
from haluforge.selection.similarity import EmbeddingVector


def random_vectors(ids, dim=16, seed=5, scale=1.0):
    rng = np.random.default_rng(seed)
    return {i: EmbeddingVector(i, tuple(rng.standard_normal(dim) * scale)) for i in ids}


def corpus_ids(n_cves=81):
    return [f"CVE-2020-{1000 + n}:{kind}" for n in range(n_cves) for kind in ("vuln", "fixed")]


def oracle(ids, vectors, p, seed):
    """Brute-force replay of the greedy least-similar-to-last procedure."""
    target = int(np.ceil(round(p * len(ids), 9)))
    remaining = list(ids)
    selected = [remaining.pop(int(np.random.default_rng(seed).integers(len(ids))))]
    while len(selected) < target:
        last = vectors[selected[-1]].array()
        sims = []
        for item in remaining:
            v = vectors[item].array()
            sim = v @ last / (np.linalg.norm(v) * np.linalg.norm(last))
            sims.append(min(1.0, max(-1.0, float(sim))))
        selected.append(remaining.pop(int(np.argmin(sims))))
    return selected


def random_instances(count=200, seed=2024):
    """(ids, vectors) pairs with 1-20 ids of 1-8 dimensions."""
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(count):
        n, dim = int(rng.integers(1, 21)), int(rng.integers(1, 9))
        ids = [f"s{i}" for i in range(n)]
        instances.append((ids, {i: EmbeddingVector(i, tuple(rng.standard_normal(dim))) for i in ids}))
    return instances


INSTANCES = random_instances()


@pytest.mark.parametrize("n,p,expected", [(162, 0.8, 130), (10, 0.5, 5), (7, 0.5, 4), (3, 1.0, 3)])
def test_selection_target(n, p, expected):
    assert selection_target(n, p) == expected


@pytest.mark.parametrize("p", [0, -0.1, 1.5, True])
def test_invalid_fraction(p):
    with pytest.raises(InvalidFractionError):
        selection_target(10, p)


def test_protocol_arithmetic():
    ids = corpus_ids()
    rounds = make_rounds(ids, random_vectors(ids), k_rounds=5, p=0.8, base_seed=0)
    assert [r.seed for r in rounds] == [0, 1, 2, 3, 4]
    for split in rounds:
        assert len(split.selected_ids) == 130
        assert len(split.held_out_ids) == 32
        assert set(split.selected_ids).isdisjoint(split.held_out_ids)
        assert set(split.selected_ids) | set(split.held_out_ids) == set(ids)
        assert list(split.held_out_ids) == [i for i in ids if i in set(split.held_out_ids)]


def test_matches_brute_force():
    ids = corpus_ids(20)
    vectors = random_vectors(ids, seed=9)
    for seed in range(4):
        split = diverse_select(ids, vectors, 0.8, seed)
        assert list(split.selected_ids) == oracle(ids, vectors, 0.8, seed)
        assert split.selected_ids[0] == ids[seeded_start(len(ids), seed)]


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("p", [0.25, 0.5, 0.8])
def test_random_instances_match_brute_force(p, seed):
    for ids, vectors in INSTANCES:
        split = diverse_select(ids, vectors, p, seed)
        assert list(split.selected_ids) == oracle(ids, vectors, p, seed)
        assert len(split.selected_ids) == selection_target(len(ids), p)
        assert sorted(split.selected_ids + split.held_out_ids) == sorted(ids)


def test_rounds_reproducible():
    ids = corpus_ids(10)
    vectors = random_vectors(ids)
    first = [r.to_dict() for r in make_rounds(ids, vectors, 3, 0.8, 42)]
    second = [r.to_dict() for r in make_rounds(ids, vectors, 3, 0.8, 42)]
    assert first == second
    assert SplitRound.from_dict(first[1]).to_dict() == first[1]


def test_scale_invariance():
    ids = corpus_ids(10)
    small = diverse_select(ids, random_vectors(ids, scale=1.0), 0.8, 3)
    large = diverse_select(ids, random_vectors(ids, scale=250.0), 0.8, 3)
    assert small.selected_ids == large.selected_ids


def test_ties_go_to_earliest():
    ids = ["a", "b", "c", "d"]
    vectors = {"a": EmbeddingVector("a", (1.0, 0.0)), "b": EmbeddingVector("b", (0.0, 1.0)),
               "c": EmbeddingVector("c", (0.0, 1.0)), "d": EmbeddingVector("d", (1.0, 0.0))}
    start = ids[seeded_start(4, 0)]
    split = diverse_select(ids, vectors, 0.5, 0)
    remaining = [i for i in ids if i != start]
    orthogonal = [i for i in remaining if vectors[i].values != vectors[start].values]
    assert split.selected_ids == (start, orthogonal[0])


def test_pair_lock_keeps_pairs_together():
    ids = corpus_ids()
    partner = pair_partners(ids)
    split = diverse_select(ids, random_vectors(ids), 0.8, 1, partner=partner)
    assert len(split.selected_ids) == 130
    selected = set(split.selected_ids)
    for item in ids:
        assert (item in selected) == (partner[item] in selected)


def test_pair_lock_overshoot_by_one():
    ids = corpus_ids(5)
    split = diverse_select(ids, random_vectors(ids), 0.5, 0, partner=pair_partners(ids))
    assert len(split.selected_ids) == 6


def test_pair_partners_skips_orphans():
    assert pair_partners(["CVE-1:vuln", "CVE-1:fixed", "CVE-2:vuln"]) == {
        "CVE-1:vuln": "CVE-1:fixed", "CVE-1:fixed": "CVE-1:vuln"}


def test_bad_inputs():
    vectors = random_vectors(["a", "b"])
    with pytest.raises(MissingVectorError):
        diverse_select(["a", "c"], vectors, 0.5, 0)
    with pytest.raises(ValidationError):
        diverse_select(["a", "a"], vectors, 0.5, 0)
    with pytest.raises(ValidationError):
        diverse_select([], vectors, 0.5, 0)
    with pytest.raises(ValidationError):
        make_rounds(["a", "b"], vectors, k_rounds=0)


def _entry(cve_id, cwe_id):
    return CveEntry(cve_id, cwe_id, "crate", "", f"https://example.com/{cve_id}")


def test_unseen_split():
    entries = [_entry("CVE-1", "CWE-416"), _entry("CVE-2", "CWE-416"), _entry("CVE-3", "CWE-190")]
    partition = partition_unseen_cwe(entries)
    ids = [f"{e.cve_id}:{k}" for e in entries for k in ("vuln", "fixed")]
    cwe_map = {i: e.cwe_id for e in entries for i in ids if i.startswith(e.cve_id + ":")}
    split = make_unseen_split(ids, cwe_map, partition, seed=7)
    assert split.held_out_ids == ("CVE-3:vuln", "CVE-3:fixed")
    assert len(split.selected_ids) == 4
    assert split.p == pytest.approx(4 / 6)
    assert split.seed == 7


def test_unseen_split_needs_seen_samples():
    entries = [_entry("CVE-1", "CWE-190")]
    with pytest.raises(InvalidFractionError):
        make_unseen_split(["CVE-1:vuln"], {"CVE-1:vuln": "CWE-190"}, partition_unseen_cwe(entries))
