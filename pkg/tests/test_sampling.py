import os
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclation.exact import CycleType, exact_distributions
from cyclation.harness.oracle import all_pairings, cycles_union_find
from cyclation.sampling import (
    WORKERS_ENV,
    Moments,
    Pairing,
    StructureError,
    batch_stats,
    cycle_type_of,
    cycles_of,
    default_workers,
    delete_interval,
    insert_interval,
    sample_cycle_lengths,
    sample_cyclation,
    sample_permutation_cycles,
    split_reps,
)


def test_n2_pairings_by_hand():
    # {0-1, 2-3}: each interval closes on itself
    assert cycles_of(Pairing.from_edges(2, [(0, 1), (2, 3)])) == (1, 1)
    assert cycles_of(Pairing.from_edges(2, [(0, 2), (1, 3)])) == (2,)
    assert cycles_of(Pairing.from_edges(2, [(0, 3), (1, 2)])) == (2,)


def test_structure_validation():
    with pytest.raises(StructureError):
        Pairing(np.array([0, 1])).validate()
    with pytest.raises(StructureError):
        Pairing(np.array([1, 2, 0, 3])).validate()
    with pytest.raises(StructureError):
        Pairing(np.array([1, 0, 3])).validate()
    with pytest.raises(StructureError):
        Pairing.from_line("2 1 0 3")


def test_pairing_is_read_only_and_hashable():
    p = Pairing.from_edges(2, [(0, 3), (1, 2)])
    with pytest.raises(ValueError):
        p.partner[0] = 1
    q = Pairing.from_line(p.to_line())
    assert p == q and hash(p) == hash(q)
    assert p.to_line() == "2 3 2 1 0"
    assert p.edges() == [(0, 3), (1, 2)]


@pytest.mark.parametrize("method", ["sequential", "shuffle"])
def test_sampler_output_is_valid(method):
    rng = np.random.default_rng(0)
    for n in (1, 2, 7, 50):
        p = sample_cyclation(n, rng, method).validate()
        assert sum(cycles_of(p)) == n


def test_sampler_rejects_bad_input():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_cyclation(0, rng)
    with pytest.raises(ValueError):
        sample_cyclation(3, rng, "bogus")


def test_traversal_matches_union_find_on_all_n4_pairings():
    for p in all_pairings(4):
        assert sorted(cycles_of(p)) == sorted(cycles_union_find(p))


def test_insert_outcomes_cover_n_plus_one_pairings_once():
    # every (n+1)-pairing arises from exactly one (pairing, choice)
    seen = Counter()
    for p in all_pairings(3):
        for c in range(7):
            seen[insert_interval(p, choice=c).key()] += 1
    assert len(seen) == 105 and set(seen.values()) == {1}


def test_delete_undoes_insert():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = sample_cyclation(int(rng.integers(1, 8)), rng)
        q = insert_interval(p, rng)
        assert delete_interval(q) == p


def test_delete_relabels_intervals():
    p = Pairing.from_edges(3, [(0, 1), (2, 5), (3, 4)])
    q = delete_interval(p, 0)
    assert q == Pairing.from_edges(2, [(0, 3), (1, 2)])
    with pytest.raises(IndexError):
        delete_interval(p, 3)


def test_insert_choice_range():
    p = Pairing.from_edges(1, [(0, 1)])
    with pytest.raises(ValueError):
        insert_interval(p, choice=3)
    with pytest.raises(ValueError):
        insert_interval(p)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 2**32 - 1), which=st.integers(0, 1000))
def test_properties_insert_delete(n, seed, which):
    rng = np.random.default_rng(seed)
    p = sample_cyclation(n, rng)
    lengths = cycles_of(p)
    assert sum(lengths) == n
    q = insert_interval(p, rng).validate()
    assert q.n == n + 1
    assert sum(cycles_of(q)) == n + 1
    # a deletion removes one interval and never changes the number of cycles by more than one
    r = delete_interval(q, which % (n + 1)).validate()
    assert abs(len(cycles_of(r)) - len(cycles_of(q))) <= 1


def test_close_or_extend_lengths():
    rng = np.random.default_rng(2)
    for n in (1, 5, 1000):
        ls = sample_cycle_lengths(n, rng)
        assert ls.sum() == n and ls.min() >= 1
    assert sum(sample_permutation_cycles(20, rng)) == 20


def test_close_or_extend_mean_matches_exact():
    n, reps = 12, 20_000
    s = batch_stats(n, reps, seed=4, workers=1)
    d = exact_distributions(n)
    for name, ex in (("K", d.ExK), ("M", d.ExM), ("T", d.ExT)):
        assert abs(s.mean(name) - float(ex)) < 5 * s.stderr(name)


def test_moments_are_exact_integers():
    m = Moments()
    m.add(np.array([1, 2, 3]))
    assert (m.count, m.total, m.total_sq) == (3, 6, 14)
    assert m.mean == 2 and m.variance == 1.0
    assert m.merge(Moments(1, 4, 16)).total == 10


def test_split_reps():
    assert split_reps(10, 3) == [4, 3, 3]
    assert sum(split_reps(2001, 8)) == 2001


def test_batch_stats_deterministic_and_worker_dependent():
    a = batch_stats(500, 300, seed=9, workers=1).as_dict()
    b = batch_stats(500, 300, seed=9, workers=1).as_dict()
    assert a == b
    c = batch_stats(500, 300, seed=9, workers=2).as_dict()
    d = batch_stats(500, 300, seed=9, workers=2).as_dict()
    assert c == d and c["workers"] == 2


def test_batch_stats_validation():
    with pytest.raises(ValueError):
        batch_stats(10, 0, 1)
    with pytest.raises(ValueError):
        batch_stats(10, 5, 1, mode="graph")


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "lots")
    assert default_workers() == 1
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() == 1


def test_permutation_mode_names():
    s = batch_stats(30, 50, seed=1, mode="permutation", workers=1)
    assert set(s.moments) == {"K", "L", "S"}
    assert cycle_type_of(Pairing.from_edges(1, [(0, 1)])) == CycleType((1,))
