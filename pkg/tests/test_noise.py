import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qramsim.gates import Engine
from qramsim.noise import (
    FaultInjector,
    NoiseModel,
    analytic_error,
    error_scaling_table,
    error_sites,
    monte_carlo_failure,
    run_protocol,
    wilson_half_width,
)
from qramsim.noise import _address_state
from qramsim.oracle import MemoryArray, ideal_qram_oracle, memory_from_pattern
from qramsim.qstate import fidelity

eps_open = st.floats(1e-6, 1 - 1e-6)


def _within(row, k):
    return abs(row.fail_rate - row.analytic) <= k * row.sigma


@pytest.mark.parametrize(
    "eps,n,expected,tol",
    [(0.01, 10, 0.0956, 5e-5), (0.001, 100, 0.0952, 5e-5), (0.01, 20, 0.1821, 5e-5), (0.01, 30, 0.2603, 5e-5)],
)
def test_analytic_bucket(eps, n, expected, tol):
    assert analytic_error(eps, n, "bucket") == pytest.approx(expected, abs=tol)
    # the first-order reading n * eps
    assert analytic_error(eps, n, "bucket") <= n * eps


def test_analytic_fanout_n10():
    assert analytic_error(0.01, 10, "fanout") == pytest.approx(1 - 0.99**1023, rel=1e-12)
    assert analytic_error(0.01, 10, "fanout") > 0.9999


@given(st.integers(1, 64), st.sampled_from(["bucket", "fanout"]))
def test_analytic_zero_and_one(n, arch):
    assert analytic_error(0.0, n, arch) == 0.0
    assert analytic_error(1.0, n, arch) == 1.0


def test_analytic_rejections():
    for bad in (-0.1, 1.5):
        with pytest.raises(ValueError, match="epsilon"):
            analytic_error(bad, 3, "bucket")
    with pytest.raises(ValueError):
        analytic_error(0.1, 0, "bucket")
    with pytest.raises(ValueError, match="architecture"):
        analytic_error(0.1, 3, "crossbar")


def test_n1_architectures_coincide():
    assert analytic_error(0.05, 1, "bucket") == analytic_error(0.05, 1, "fanout")


@given(eps_open, eps_open, st.integers(1, 40), st.sampled_from(["bucket", "fanout"]))
def test_monotone_in_epsilon(e1, e2, n, arch):
    lo, hi = sorted((e1, e2))
    assert analytic_error(lo, n, arch) <= analytic_error(hi, n, arch)


@given(eps_open, st.integers(1, 40), st.sampled_from(["bucket", "fanout"]), st.sampled_from(["per-active-switch", "per-gate-event"]))
def test_monotone_in_n(eps, n, arch, counting):
    assert analytic_error(eps, n, arch, counting) <= analytic_error(eps, n + 1, arch, counting)


@given(st.floats(1e-4, 0.5), st.integers(2, 30))
def test_fanout_dominates(eps, n):
    assert analytic_error(eps, n, "fanout") > analytic_error(eps, n, "bucket")


def test_error_sites():
    assert error_sites(10, "bucket") == 10
    assert error_sites(6, "fanout") == 63
    assert error_sites(3, "bucket", "per-gate-event") == 12 + 7
    assert error_sites(3, "fanout", "per-gate-event") == 14 + 7
    assert error_sites(3, "fanout", "per-gate-event", d=2) == 42


def test_error_scaling_table():
    table = error_scaling_table([0.01], [10, 20, 30], ["bucket"])
    assert [round(r.analytic, 3) for r in table.rows] == [0.096, 0.182, 0.26]
    with pytest.raises(ValueError):
        error_scaling_table([], [1])


def _wilson_by_roots(k, n, z=1.959963984540054):
    # solve (p_hat - p)^2 = z^2 p (1 - p) / n for p
    p_hat = k / n
    a = 1 + z * z / n
    b = -(2 * p_hat + z * z / n)
    c = p_hat * p_hat
    disc = math.sqrt(b * b - 4 * a * c)
    return ((-b + disc) - (-b - disc)) / (4 * a)


@given(st.integers(1, 5000), st.data())
def test_wilson_matches_quadratic_roots(trials, data):
    k = data.draw(st.integers(0, trials))
    assert wilson_half_width(k, trials) == pytest.approx(_wilson_by_roots(k, trials), rel=1e-9, abs=1e-15)


def test_noise_model_validation():
    with pytest.raises(ValueError, match="epsilon"):
        NoiseModel(1.2)
    with pytest.raises(ValueError, match="channel"):
        NoiseModel(0.1, channel="bitflip")
    with pytest.raises(ValueError, match="counting"):
        NoiseModel(0.1, counting="per-call")
    with pytest.raises(ValueError, match="per-gate-event"):
        NoiseModel(0.1, channel="payload-flip")


def test_zero_epsilon_never_fails():
    row = monte_carlo_failure("bucket", 5, NoiseModel(0.0), 100)
    assert row.failures == 0 and row.fail_rate == 0.0


def test_certain_failure():
    row = monte_carlo_failure("fanout", 3, NoiseModel(1.0), 20)
    assert row.fail_rate == 1.0


def test_trials_rejected():
    with pytest.raises(ValueError, match="trials"):
        monte_carlo_failure("bucket", 2, NoiseModel(0.1), 0)


def test_memory_shape_checked():
    with pytest.raises(ValueError, match="2\\*\\*3"):
        monte_carlo_failure("bucket", 2, NoiseModel(0.1), 5, memory=memory_from_pattern(3, "zeros"))


@settings(max_examples=8)
@given(st.sampled_from(["bucket", "fanout"]), st.integers(1, 4), st.integers(0, 2**63), st.sampled_from(["route-flip", "qutrit-depolarize", "payload-flip"]))
def test_seeded_reproducibility(arch, n, seed, channel):
    model = NoiseModel(0.05, channel, "per-gate-event", seed)
    a = monte_carlo_failure(arch, n, model, 60)
    b = monte_carlo_failure(arch, n, model, 60)
    assert a == b


def test_serial_and_parallel_agree():
    model = NoiseModel(0.03, counting="per-gate-event", seed=11)
    serial = monte_carlo_failure("bucket", 4, model, 300)
    parallel = monte_carlo_failure("bucket", 4, model, 300, workers=3)
    assert serial.failures == parallel.failures


@settings(max_examples=6)
@given(st.integers(2, 10), st.sampled_from([0.001, 0.01, 0.1]), st.integers(0, 2**32))
def test_bucket_calibration(n, eps, seed):
    row = monte_carlo_failure("bucket", n, NoiseModel(eps, seed=seed), 1500)
    assert _within(row, 4)


@pytest.mark.slow
def test_fanout_n6_per_active_switch():
    row = monte_carlo_failure("fanout", 6, NoiseModel(0.01, seed=6), 10_000)
    assert row.analytic == pytest.approx(1 - 0.99**63)
    assert _within(row, 3)


@pytest.mark.slow
def test_fanout_n6_per_gate_event():
    row = monte_carlo_failure("fanout", 6, NoiseModel(0.01, counting="per-gate-event", seed=6), 5000)
    assert row.analytic == pytest.approx(1 - 0.99 ** (2 * 63 + 13))
    assert _within(row, 3)


@pytest.mark.parametrize("arch,n", [("bucket", 5), ("fanout", 4)])
def test_route_flip_per_gate_event_calibration(arch, n):
    row = monte_carlo_failure(arch, n, NoiseModel(0.02, counting="per-gate-event", seed=9), 3000)
    assert _within(row, 4)


@pytest.mark.parametrize("arch,n", [("bucket", 4), ("fanout", 3)])
@pytest.mark.parametrize("channel,counting", [("qutrit-depolarize", "per-active-switch"), ("qutrit-depolarize", "per-gate-event"), ("payload-flip", "per-gate-event")])
def test_other_channels_bounded_by_analytic(arch, n, channel, counting):
    # phase-only faults and cancelling pairs can go unseen, never the reverse
    row = monte_carlo_failure(arch, n, NoiseModel(0.03, channel, counting, seed=2), 1500)
    assert 0 < row.fail_rate <= row.analytic + 4 * row.sigma


@pytest.mark.parametrize("arch", ["bucket", "fanout"])
@pytest.mark.parametrize("channel,counting", [("route-flip", "per-active-switch"), ("route-flip", "per-gate-event"), ("payload-flip", "per-gate-event")])
def test_every_single_fault_is_detected(arch, channel, counting):
    n = 4
    model = NoiseModel(0.02, channel, counting, seed=5)
    memory = memory_from_pattern(n, "random", seed=5)
    singles = 0
    for t in range(400):
        rng = np.random.default_rng([model.seed, t])
        state = _address_state(n, 1, "basis", rng)
        injector = FaultInjector(model, rng, n)
        final = run_protocol(arch, state, memory, "copy", Engine(injector))
        if len(injector.faults) == 1:
            singles += 1
            assert fidelity(final, ideal_qram_oracle(state, memory)) < 1 - 1e-9, injector.faults
    assert singles > 10


def test_address_distributions():
    mem = memory_from_pattern(3, "random", seed=1)
    for spec in ("basis", "uniform", 5, [(0, 0.6), (7, 0.8)]):
        row = monte_carlo_failure("bucket", 3, NoiseModel(0.05, seed=1), 40, mem, spec)
        assert 0.0 <= row.fail_rate <= 1.0


def test_quantum_memory_swap_trials():
    mem = MemoryArray.quantum([{0: 0.6, 1: 0.8}, 1, 0, 1])
    row = monte_carlo_failure("bucket", 2, NoiseModel(0.0), 10, mem, "uniform", mode="swap")
    assert row.failures == 0


def test_sweep_csv_json_mirror():
    table = error_scaling_table([0.01, 0.001], [2, 10])
    table.rows.append(monte_carlo_failure("bucket", 3, NoiseModel(0.1, seed=3), 50))
    lines = table.to_csv().strip().split("\n")
    assert lines[0] == "architecture,n,epsilon,trials,fail_rate,ci_half,analytic"
    doc = json.loads(table.to_json())
    for line, row in zip(lines[1:], doc):
        fields = line.split(",")
        assert fields[0] == row["architecture"] and int(fields[1]) == row["n"]
        for col, text in zip(("epsilon", "fail_rate", "ci_half", "analytic"), (fields[2], fields[4], fields[5], fields[6])):
            assert (row[col] is None and text == "") or float(text) == row[col]
