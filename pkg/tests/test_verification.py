from __future__ import annotations

import json
import math
import shutil
from itertools import islice
from pathlib import Path

import pytest
from hypothesis import given, settings

from snapshot_lab import (
    CorpusError,
    GeneratorParams,
    MONOTONE_SEQUENTIAL,
    MONOTONE_SIMULTANEOUS,
    PLAIN_SEQUENTIAL,
    PLAIN_SIMULTANEOUS,
    SnapshotInstance,
    check_lemma,
    closed_neighborhood,
    feasible_snapshots,
    induced_subgraph,
    instance_stream,
    reachable_configs,
    replay_corpus,
    seed_distance,
    seed_feasible,
)
from snapshot_lab.serialize import instance_from_dict
from snapshot_lab.verification import CHECK_IDS, corpus_entry_instance, _load_corpus_dir

from conftest import small_instances

T4 = (1, 2, 1, 1)


def test_feasible_snapshots_star4_monotone_simultaneous(star4):
    got = feasible_snapshots(star4, T4, 1, MONOTONE_SIMULTANEOUS)
    expected = {
        frozenset(),
        frozenset({0}),
        frozenset({1}),
        frozenset({2}),
        frozenset({3}),
        frozenset(range(4)),
    }
    assert got == expected


def test_feasible_snapshots_star4_plain_simultaneous(star4):
    got = feasible_snapshots(star4, T4, 1, PLAIN_SIMULTANEOUS)
    assert frozenset({0, 2, 3}) in got  # the center seeds the three leaves and drops out
    assert frozenset(range(4)) not in got


def test_feasible_snapshots_budget_zero(star4):
    assert feasible_snapshots(star4, T4, 0, PLAIN_SEQUENTIAL) == {frozenset()}


def test_feasible_snapshots_rejects_large_graphs():
    from snapshot_lab import Graph

    big = Graph.from_edges(20, [])
    with pytest.raises(ValueError):
        feasible_snapshots(big, (1,) * 20, 1, PLAIN_SEQUENTIAL)


@given(small_instances(max_n=5))
@settings(max_examples=40, deadline=None)
def test_feasible_snapshots_monotone_in_budget(instance):
    g, t = instance.graph, instance.thresholds
    for mode in (MONOTONE_SIMULTANEOUS, PLAIN_SEQUENTIAL):
        smaller = feasible_snapshots(g, t, 1, mode)
        larger = feasible_snapshots(g, t, 2, mode)
        assert smaller <= larger


def fixed_stream(instance):
    while True:
        yield instance


def test_check_lemma_star4_all_clean(star4_instance):
    inst = star4_instance({0, 1}, 2, MONOTONE_SIMULTANEOUS)
    for lemma in CHECK_IDS:
        verdict = check_lemma(lemma, fixed_stream(inst), 1)
        assert verdict.ok and verdict.trials == 1, lemma


def test_check_lemma_unknown_id(star4_instance):
    with pytest.raises(ValueError):
        check_lemma("mystery", fixed_stream(star4_instance({0}, 1, MONOTONE_SIMULTANEOUS)), 1)


def test_check_lemma_batch_is_clean():
    params = GeneratorParams(n_min=3, n_max=6, rng_seed=2024)
    for lemma in CHECK_IDS:
        verdict = check_lemma(lemma, instance_stream(params), 40)
        assert verdict.ok, (lemma, verdict.violations[:1])


def test_neighbor_prune_is_unsound_for_simultaneous_dynamics(double_diamond):
    # the sequential neighborhood prune must not be applied to simultaneous
    # dynamics: here the only working seed sits at distance 2 from S
    t = (5, 1, 1, 2, 1, 1, 2)
    snapshot = frozenset({3, 6})
    assert snapshot in reachable_configs(double_diamond, t, {0}, PLAIN_SIMULTANEOUS)
    for u in sorted(closed_neighborhood(double_diamond, snapshot)):
        assert snapshot not in reachable_configs(double_diamond, t, {u}, PLAIN_SIMULTANEOUS)
    assert snapshot not in reachable_configs(double_diamond, t, set(), PLAIN_SIMULTANEOUS)
    assert 0 not in closed_neighborhood(double_diamond, snapshot)
    assert seed_distance(double_diamond, {0}, snapshot) == 2


def test_clearing_restriction_fails_for_budget_two(hub_pair):
    # with two seeds, the only ordering that works routes through nodes that
    # are in neither the snapshot nor the seed, so the restriction to
    # S + seed loses feasibility: the restricted arena is edgeless
    graph, thresholds = hub_pair(corrected=True)
    snapshot = frozenset({8, 9, 10})
    seed = frozenset({0, 1})
    inst = SnapshotInstance(graph, thresholds, snapshot, 2, PLAIN_SEQUENTIAL)
    assert seed_feasible(inst, seed) is not None

    arena = sorted(snapshot | seed)
    sub, sub_t, idmap = induced_subgraph(graph, thresholds, arena)
    assert sub.edges() == []
    restricted = SnapshotInstance(
        sub, sub_t, frozenset(idmap.sub(v) for v in snapshot), 2, PLAIN_SEQUENTIAL
    )
    assert seed_feasible(restricted, {idmap.sub(0), idmap.sub(1)}) is None


def test_seed_distance_examples(double_diamond, hub_pair):
    assert seed_distance(double_diamond, {0}, {3, 6}) == 2
    graph, _ = hub_pair(corrected=True)
    assert seed_distance(graph, {0, 1}, {8, 9, 10}) == 2
    assert seed_distance(graph, {8, 9}, {8, 9, 10}) == 0


def test_seed_distance_aggregates_and_edge_cases(star4):
    assert seed_distance(star4, set(), {0}) == 0
    assert seed_distance(star4, {0}, set()) == math.inf
    assert seed_distance(star4, {0, 1}, {0}) == 1  # max aggregation
    assert seed_distance(star4, {0, 1}, {0}, aggregate="min") == 0
    with pytest.raises(ValueError):
        seed_distance(star4, {0}, {1}, aggregate="median")


def test_seed_distance_disconnected():
    from snapshot_lab import Graph

    g = Graph.from_edges(3, [(0, 1)])
    assert seed_distance(g, {2}, {0}) == math.inf
    assert seed_distance(g, {1, 2}, {0}, aggregate="min") == 1


def test_replay_corpus_all_pass():
    report = replay_corpus()
    assert report.all_passed
    assert len(report.rows) >= 15
    table = report.format_table()
    assert "PASS" in table and "FAIL" not in table


def test_replay_corpus_negative_control(tmp_path):
    src = Path(str(_corpus_src()))
    work = tmp_path / "corpus"
    shutil.copytree(src, work)
    doc = json.loads((work / "star4.json").read_text())
    doc["thresholds"][1] = 1  # corrupt the center threshold
    (work / "star4.json").write_text(json.dumps(doc))
    report = replay_corpus(corpus_dir=work)
    assert not report.all_passed
    failed = [r for r in report.rows if not r.passed]
    assert failed and any("expected" in r.details for r in failed)


def _corpus_src():
    from importlib import resources

    return resources.files("snapshot_lab").joinpath("corpus")


def test_replay_corpus_missing_directory(tmp_path):
    with pytest.raises(CorpusError, match="corpus missing"):
        replay_corpus(corpus_dir=tmp_path / "nowhere")


def test_corpus_entries_revalidate():
    from snapshot_lab.serialize import instance_to_dict

    loaded = _load_corpus_dir(None)
    for entry in loaded["entries"]:
        instance = corpus_entry_instance(entry, loaded["documents"])
        assert instance_from_dict(json.loads(json.dumps(instance_to_dict(instance)))) == instance
