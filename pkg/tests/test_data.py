import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyadreg import (AgentTable, BadRange, DuplicateDyad, Partition, SelfLoop, SubvectorSpec,
                     UnknownAgent, build_panel, complete_panel, make_grid, subvector_values)
from dyadreg.data import read_panel, write_panel
from dyadreg.montecarlo import simulate_dgp


def _full_records(N, rng):
    return [(a, b, float(rng.normal())) for a in range(1, N + 1) for b in range(1, N + 1) if a != b]


def test_complete_three_agent_panel():
    rng = np.random.default_rng(0)
    agents = AgentTable.from_array(rng.normal(size=(3, 2)))
    panel = build_panel(agents, _full_records(3, rng))
    assert panel.n == 6
    assert panel.complete


def test_hundred_agent_panel_has_9900_dyads():
    assert simulate_dgp(100, 0).n == 9900


def test_incomplete_panel_accepted():
    agents = AgentTable.from_array([0.0, 1.0, 2.0])
    panel = build_panel(agents, [(1, 2, 0.1), (3, 1, 0.2)])
    assert panel.n == 2
    assert not panel.complete


@pytest.mark.parametrize("records, err", [
    ([(2, 2, 1.0)], SelfLoop),
    ([(1, 2, 1.0), (1, 2, 3.0)], DuplicateDyad),
    ([(1, 9, 1.0)], UnknownAgent),
])
def test_bad_records(records, err):
    agents = AgentTable.from_array([0.0, 1.0, 2.0])
    with pytest.raises(err):
        build_panel(agents, records)


def test_no_diagonal_is_ever_stored():
    panel = simulate_dgp(12, 3)
    assert not np.any(panel.i == panel.j)
    assert len(set(zip(panel.i.tolist(), panel.j.tolist()))) == 12 * 11


def test_subvector_values():
    agents = AgentTable.from_array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    panel = build_panel(agents, [(1, 2, 0.0)])
    assert subvector_values(panel, SubvectorSpec((2,)), 0).tolist() == [3.0]
    assert subvector_values(panel, SubvectorSpec((0, 1, 2)), 1).tolist() == [4.0, 5.0, 6.0]
    # against an explicit permutation of the row
    row = panel.X[0]
    perm = [1, 0]
    assert subvector_values(panel, SubvectorSpec(perm), 0).tolist() == [row[k] for k in perm]
    with pytest.raises(UnknownAgent):
        subvector_values(panel, SubvectorSpec((0,)), 5)


def test_subvector_and_partition_validation():
    with pytest.raises(ValueError):
        SubvectorSpec(())
    with pytest.raises(ValueError):
        SubvectorSpec((1, 1))
    with pytest.raises(ValueError):
        Partition((0,), (0, 1))
    with pytest.raises(ValueError):
        Partition((0,), ())
    with pytest.raises(ValueError):
        Partition((0,), (2,))
    assert Partition.from_x0([1], 3) == Partition((1,), (0, 2))


def test_make_grid():
    g = make_grid(4, 8, 100, "uniform-random", seed=11)
    assert g.size == 100 and np.all(np.diff(g) >= 0) and g.min() >= 4 and g.max() <= 8
    assert np.array_equal(g, make_grid(4, 8, 100, "uniform-random", seed=11))
    assert make_grid(0, 1, 2).tolist() == [0.0, 1.0]
    steps = np.diff(make_grid(-8, -4, 100))
    assert np.allclose(steps, 4 / 99, rtol=0, atol=1e-14)
    with pytest.raises(BadRange):
        make_grid(1, 1, 5)


def test_csv_round_trip_is_bit_exact(tmp_path):
    panel = simulate_dgp(15, 4)
    write_panel(panel, tmp_path / "agents.csv", tmp_path / "dyads.csv")
    back = read_panel(tmp_path / "agents.csv", tmp_path / "dyads.csv")
    assert back.agents.ids == panel.agents.ids
    assert np.array_equal(back.X, panel.X)
    assert back.records() == panel.records()


def test_csv_self_loop_reports_line(tmp_path):
    (tmp_path / "a.csv").write_text("agent_id,x_1\n1,0.5\n2,1.5\n")
    (tmp_path / "d.csv").write_text("i,j,y\n1,2,0.3\n2,2,0.1\n")
    with pytest.raises(SelfLoop, match=r"d\.csv:3"):
        read_panel(tmp_path / "a.csv", tmp_path / "d.csv")


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=3, max_value=7))
def test_relabeling_leaves_the_panel_unchanged(seed, N):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(N, 2))
    Y = rng.normal(size=(N, N))
    base = complete_panel(AgentTable.from_array(X), Y)
    perm = rng.permutation(N)
    ids = [f"a{k}" for k in rng.permutation(N)]
    agents = AgentTable(tuple(ids), X[perm])
    records = [(ids[p], ids[q], Y[perm[p], perm[q]])
               for p, q in itertools.permutations(range(N), 2)]
    rng.shuffle(records)
    other = build_panel(agents, records)
    assert np.array_equal(base.y, other.y)
    assert np.array_equal(base.X[base.i], other.X[other.i])
    assert np.array_equal(base.X[base.j], other.X[other.j])
