import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixedadc.topology import (
    InfeasibleGuardError,
    NetworkTopology,
    collocate,
    generate_topology,
    pairwise_distances,
)


def test_default_layout_counts_and_guard():
    topo = generate_topology(1.0, 20, 80, 20, 0.05, seed=7)
    assert topo.m_total == 100 and topo.m_full == 20 and topo.m_low == 80
    assert topo.k_users == 20
    assert topo.rrh_tags.count("F") == 20 and topo.rrh_tags.count("L") == 80
    d = pairwise_distances(topo)
    assert d.shape == (100, 20)
    assert d.min() >= 0.05
    topo.check()


def test_single_pair_without_guard():
    topo = generate_topology(1.0, 1, 0, 1, 0.0, seed=0)
    assert topo.m_total == 1 and topo.k_users == 1
    topo.check()


def test_same_seed_same_layout():
    a = generate_topology(1.0, 10, 10, 5, 0.05, seed=42)
    b = generate_topology(1.0, 10, 10, 5, 0.05, seed=42)
    assert a == b
    assert a.to_text() == b.to_text()
    assert generate_topology(1.0, 10, 10, 5, 0.05, seed=43) != a


def test_guard_holds_over_many_seeds():
    worst = min(
        pairwise_distances(generate_topology(1.0, 20, 80, 20, 0.05, seed=s)).min() for s in range(100)
    )
    assert worst >= 0.05


def test_points_inside_area():
    topo = generate_topology(2.5, 5, 5, 30, 0.1, seed=3)
    pts = np.vstack([topo.rrh_positions, topo.user_positions])
    assert pts.min() >= 0 and pts.max() <= 2.5


def test_full_heads_do_not_move_when_adding_low_heads():
    a = generate_topology(1.0, 20, 0, 5, 0.05, seed=11)
    b = generate_topology(1.0, 20, 60, 5, 0.05, seed=11)
    assert np.array_equal(a.rrh_positions, b.rrh_positions[:20])


@pytest.mark.parametrize(
    "args",
    [
        (1.0, 0, 0, 5, 0.05),  # no heads
        (1.0, 1, 1, 0, 0.05),  # no users
        (0.0, 1, 1, 1, 0.0),  # empty area
        (1.0, 1, 1, 1, 0.5),  # guard too large
    ],
)
def test_parameter_errors(args):
    with pytest.raises(ValueError):
        generate_topology(*args, seed=0)


def test_infeasible_guard_is_reported():
    # heads everywhere make a 0.45 km guard unsatisfiable
    with pytest.raises(InfeasibleGuardError):
        generate_topology(1.0, 200, 0, 1, 0.45, seed=0, max_redraws=200)


def test_three_four_five():
    topo = NetworkTopology(10.0, [[0.0, 0.0]], 1, [[3.0, 4.0]])
    assert pairwise_distances(topo).values[0, 0] == 5.0


def test_coincident_nodes_give_zero_distance():
    topo = NetworkTopology(1.0, [[0.5, 0.5]], 1, [[0.5, 0.5]])
    assert pairwise_distances(topo).values[0, 0] == 0.0


def test_rows_full_first():
    topo = generate_topology(1.0, 3, 4, 2, 0.0, seed=5)
    d = pairwise_distances(topo)
    assert d.m_full == 3
    expected = np.hypot(*(topo.rrh_positions[4] - topo.user_positions[1]))
    assert d.values[4, 1] == expected
    assert topo.rrh_tags == ("F",) * 3 + ("L",) * 4


def test_collocate():
    topo = generate_topology(1.0, 5, 7, 4, 0.05, seed=9)
    c = collocate(topo)
    assert np.all(c.rrh_positions == 0.5)
    assert np.array_equal(c.user_positions, topo.user_positions)
    assert (c.m_full, c.m_low, c.rrh_tags) == (topo.m_full, topo.m_low, topo.rrh_tags)
    assert collocate(c) == c
    d = pairwise_distances(c).values
    assert np.all(np.ptp(d, axis=0) == 0)


def test_text_round_trip(tmp_path):
    topo = generate_topology(1.0, 4, 6, 3, 0.05, seed=1)
    path = tmp_path / "topo.tsv"
    topo.save(path)
    back = NetworkTopology.load(path)
    assert back == topo
    assert path.read_text().splitlines()[1] == "kind\tx_km\ty_km"


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32),
    m_full=st.integers(0, 6),
    m_low=st.integers(0, 6),
    k=st.integers(1, 6),
    guard=st.floats(0.0, 0.1),
)
def test_generated_layouts_are_valid(seed, m_full, m_low, k, guard):
    if m_full + m_low == 0:
        m_low = 1
    topo = generate_topology(1.0, m_full, m_low, k, guard, seed)
    topo.check()
    assert pairwise_distances(topo).min() >= guard
