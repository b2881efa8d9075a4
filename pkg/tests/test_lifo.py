import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wmgraph import (
    WeightSeq,
    assemble_graph,
    height_of_path,
    resolve_pinch,
    sample_pinches,
    simulate_lifo,
)


@pytest.fixture
def hand_trace():
    # client 1 (w=1) at 0.2, client 2 (w=0.5) at 0.4
    return simulate_lifo(WeightSeq([1.0, 0.5]), forced_arrivals=[0.2, 0.4])


def test_hand_example_schedule(hand_trace):
    tr = hand_trace
    assert tr.departure[2] == pytest.approx(0.9)   # preempts, leaves first
    assert tr.departure[1] == pytest.approx(1.7)
    assert tr.pre_level[1] == pytest.approx(-0.2)
    assert tr.pre_level[2] == pytest.approx(0.6)
    assert tr.parent.tolist() == [0, 0, 1]         # 2 served-at-arrival by 1
    assert tr.H.times == pytest.approx([0.0, 0.2, 0.4, 0.9, 1.7], abs=1e-12)
    assert tr.H.values.tolist() == [0.0, 1.0, 2.0, 1.0, 0.0]
    assert tr.served_at(0.5) == 2 and tr.served_at(1.0) == 1
    assert tr.stack_at(0.5) == [1, 2]
    assert len(tr.busy_periods) == 1
    start, work, members = tr.busy_periods[0]
    assert (start, work, members) == (0.2, 1.5, (1, 2))


def test_load_path_and_height_agree(hand_trace):
    tr = hand_trace
    assert tr.Y.value(0.5) == pytest.approx(1.0)
    h2 = height_of_path(tr.Y)
    grid = np.linspace(0, 2.0, 101)
    assert np.all(h2(grid) == tr.H(grid))


def test_service_intervals_partition_busy_time(hand_trace):
    tr = hand_trace
    # client 1 serves [0.2,0.4) and [0.9,1.7); client 2 serves [0.4,0.9)
    flat0 = [x for iv in tr.service_intervals[0] for x in iv]
    assert flat0 == pytest.approx([0.2, 0.4, 0.9, 1.7], abs=1e-12)
    assert tr.service_intervals[1] == ((0.4, 0.9),)
    total = sum(b - a for ivs in tr.service_intervals for a, b in ivs)
    assert total == pytest.approx(tr.weights.sigma(1.0))


def test_pinch_resolution_examples(hand_trace):
    tr = hand_trace
    # low level: deepest band, endpoints are clients 1 (start) and 2 (serving)
    s, u, v, loop, tie = resolve_pinch(tr, 0.5, 0.3)
    assert (s, u, v, loop, tie) == (0.2, 1, 2, False, False)
    # high level: inside client 2's band -> self loop starting at 0.4
    s, u, v, loop, tie = resolve_pinch(tr, 0.5, 0.9)
    assert (s, u, v, loop) == (0.4, 2, 2, True)
    # exact band boundary flags a tie
    assert resolve_pinch(tr, 0.5, 0.8)[4] is True


def test_pinch_validation(hand_trace):
    with pytest.raises(ValueError):
        resolve_pinch(hand_trace, 0.1, 0.1)   # idle server
    with pytest.raises(ValueError):
        resolve_pinch(hand_trace, 0.5, 5.0)   # above the reflected load


def test_forced_pinches_assembly(hand_trace):
    ps = sample_pinches(hand_trace, forced_points=[(0.5, 0.3), (0.5, 0.9)])
    assert ps.size == 2
    g = assemble_graph(hand_trace, ps)
    assert g.edges == frozenset({(1, 2)})
    assert g.n_self_loops_dropped == 1
    assert g.n_duplicates_dropped == 1   # (1,2) already a tree edge


def test_pinch_sampling_statistics():
    # expected pinch count = E[area under reflected load] / sigma_1;
    # for a single client of weight v arriving once, area = v^2/2
    w = WeightSeq([1.0])
    counts = []
    for r in range(4000):
        tr = simulate_lifo(w, forced_arrivals=[0.3])
        ps = sample_pinches(tr, rng_seed=np.random.SeedSequence([17, r]))
        counts.append(ps.size)
        assert np.all(ps.u == 1) and np.all(ps.v == 1)  # only one client
    mean = np.mean(counts)
    target = 0.5  # (v^2/2)/sigma_1 = 0.5
    assert abs(mean - target) < 4 * np.std(counts) / math.sqrt(len(counts))


def test_departures_after_arrivals_random():
    rng = np.random.default_rng(11)
    for r in range(25):
        n = int(rng.integers(1, 30))
        w = WeightSeq(rng.uniform(0.1, 3.0, size=n))
        tr = simulate_lifo(w, rng_seed=np.random.SeedSequence([13, r]))
        assert np.all(tr.departure[1:] > tr.arrival[1:])
        # LIFO nesting: interval [arrival, departure] of a child lies
        # inside its parent's interval
        for j in range(1, n + 1):
            p = int(tr.parent[j])
            if p:
                assert tr.arrival[p] < tr.arrival[j]
                assert tr.departure[j] < tr.departure[p]
        # busy-period work adds up to sigma_1 exactly (fsum over members)
        assert math.fsum(bp[1] for bp in tr.busy_periods) == pytest.approx(
            w.sigma(1.0), abs=1e-12)


def test_tree_edges_connect_busy_period():
    w = WeightSeq([2.0, 1.5, 1.0, 0.5])
    tr = simulate_lifo(w, forced_arrivals=[0.1, 0.2, 5.0, 5.1])
    g = assemble_graph(tr)
    # first busy period holds clients 1,2; second 3,4
    assert (1, 2) in g.edges and (3, 4) in g.edges
    assert len(g.edges) == 2


def test_trace_csv_roundtrip(tmp_path, hand_trace):
    path = tmp_path / "trace.csv"
    hand_trace.write_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "time,event,client,Y,H"
    assert len(rows) == 5  # header + 2 arrivals + 2 departures
