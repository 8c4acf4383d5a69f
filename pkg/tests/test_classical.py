import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qramsim import classical, tree
from qramsim.qstate import WAIT


@st.composite
def n_and_address(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    return n, draw(st.integers(0, 2**n - 1))


def test_fanout_n3():
    t = classical.simulate_fanout_classical(3, 5)
    assert (t.total_elements, t.activated_count, t.on_path) == (14, 7, 3)


def test_fanout_small_and_large():
    t = classical.simulate_fanout_classical(1, 0)
    assert (t.total_elements, t.activated_count, t.on_path) == (2, 1, 1)
    assert classical.simulate_fanout_classical(10, 0).activated_count == 1023


def test_modified_examples():
    assert classical.simulate_modified_fanout(3, 2).activated_count == 7
    assert classical.simulate_modified_fanout(1, 1).activated_count == 3
    t = classical.simulate_modified_fanout(5, 19)
    assert t.activated_count == 11
    assert t.fanout_load[-1] >= 2**4


def test_modified_netlist_shape():
    net = classical.modified_fanout_netlist(3)
    ids = [t["id"] for t in net]
    assert len(ids) == len(set(ids)) == 2 * 7 + 8
    # every node pair and every cell switch sits on a distinct wire
    assert {t["source"] for t in net if t["id"][0] == "node"} == {("node", v) for v in range(7)}


def test_bucket_examples():
    t = classical.simulate_bucket_classical(3, 5)
    assert (t.activated_count, t.waiting_trits, t.leaf) == (3, 4, 5)
    t = classical.simulate_bucket_classical(1, 0)
    assert (t.activated_count, t.waiting_trits) == (1, 0)
    for k in range(16):
        assert classical.simulate_bucket_classical(4, k).leaf == k


def test_trit_tree_state_machine():
    tt = classical.TritTree(2)
    assert tt.send(1) == 0
    assert tt.send(0) == 2
    assert tt.probe() == 2
    with pytest.raises(RuntimeError, match="fell out"):
        tt.send(1)
    tt.reset()
    assert tt.trits == [WAIT] * 3
    with pytest.raises(RuntimeError, match="WAIT"):
        tt.probe()


@given(n_and_address())
def test_counts_closed_forms(nk):
    n, k = nk
    fan = classical.simulate("fanout", n, k)
    mod = classical.simulate("modified", n, k)
    bb = classical.simulate("bucket", n, k)
    assert fan.activated_count == 2**n - 1 and fan.total_elements == 2 * (2**n - 1) and fan.on_path == n
    assert mod.activated_count == 2 * n + 1
    assert bb.activated_count == n and bb.waiting_trits == 2**n - (n + 1)
    assert bb.time_steps == 2 * n and bb.reset_ok
    # every architecture lands on the addressed leaf
    assert fan.leaf == mod.leaf == bb.leaf == k
    # stored trits are exactly the path nodes
    assert list(bb.activated_elements) == tree.path_for_address(n, k)[1]


@pytest.mark.parametrize("arch", classical.ARCHITECTURES)
def test_address_validation(arch):
    with pytest.raises(ValueError, match="out of range"):
        classical.simulate(arch, 3, 8)
    with pytest.raises(ValueError, match="n must be"):
        classical.simulate(arch, 0, 0)


def test_unknown_architecture():
    with pytest.raises(ValueError, match="unknown architecture"):
        classical.simulate("crossbar", 2, 0)


def test_trace_invariants():
    with pytest.raises(ValueError, match="distinct"):
        classical.ActivationTrace("x", 1, 0, ((0, 1), (0, 1)), 2, 1, 0)
    with pytest.raises(ValueError, match="more activated"):
        classical.ActivationTrace("x", 1, 0, (1, 2, 3), 2, 1, 0)


@pytest.mark.parametrize("n,one,two", [(4, 15, 6), (10, 1023, 62)])
def test_elements_2d(n, one, two):
    assert classical.elements_2d(n) == {"elements_1d": one, "elements_2d": two}


def test_elements_2d_square_root_scaling():
    e = classical.elements_2d(20)
    ratio = e["elements_2d"] / e["elements_1d"]
    target = 2 / 2**10
    assert target / 4 <= ratio <= target * 4
    with pytest.raises(ValueError):
        classical.elements_2d(1)


def test_elements_2d_odd_split():
    assert classical.elements_2d(5)["elements_2d"] == (2**3 - 1) + (2**2 - 1)


def test_export_csv_json_agree():
    traces = [classical.simulate(a, 3, 5) for a in classical.ARCHITECTURES]
    csv_text = classical.traces_to_csv(traces)
    lines = csv_text.strip().split("\n")
    assert lines[0] == ",".join(classical.TRACE_COLUMNS)
    doc = json.loads(classical.traces_to_json(traces))
    for line, d in zip(lines[1:], doc):
        fields = dict(zip(classical.TRACE_COLUMNS, line.split(",")))
        assert int(fields["activated"]) == d["activated_count"]
        assert int(fields["total"]) == d["total_elements"]
