"""Switching-error injection and failure-rate estimation.

A trial runs the full protocol on the sparse state and samples faults as the
trajectory unfolds.  ``per-active-switch`` gives each switch that is set
during the call one chance to fail (n for the bucket brigade, 2**n - 1 for
fanout); ``per-gate-event`` gives every timed two-body event one chance.  A
call fails when its output differs from the ideal qRAM output at all.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .bucket import run_bucket
from .fanout import run_fanout
from .gates import Engine, Gate, GateEvent
from .oracle import COPY, MemoryArray, ideal_qram_oracle, memory_from_pattern, prepare
from .qstate import WAIT, Configuration, QuantumState, fidelity, make_address_state

CHANNELS = ("route-flip", "qutrit-depolarize", "payload-flip")
COUNTINGS = ("per-active-switch", "per-gate-event")
QUANTUM_ARCHITECTURES = ("bucket", "fanout")
FAILURE_TOL = 1e-9
SWEEP_COLUMNS = ("architecture", "n", "epsilon", "trials", "fail_rate", "ci_half", "analytic")

_OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class NoiseModel:
    epsilon: float
    channel: str = "route-flip"
    counting: str = "per-active-switch"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}; choose from {CHANNELS}")
        if self.counting not in COUNTINGS:
            raise ValueError(f"unknown counting {self.counting!r}; choose from {COUNTINGS}")
        if self.channel == "payload-flip" and self.counting == "per-active-switch":
            raise ValueError("payload-flip acts on carried bits; use counting='per-gate-event'")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _check_arch(architecture: str) -> None:
    if architecture not in QUANTUM_ARCHITECTURES:
        raise ValueError(f"architecture must be 'bucket' or 'fanout', got {architecture!r}")


def error_sites(n: int, architecture: str, counting: str = "per-active-switch", d: int = 1) -> int:
    """Fault opportunities in one basis-state call."""
    _check_arch(architecture)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if counting == "per-active-switch":
        return n if architecture == "bucket" else (2**n - 1) * d
    if counting != "per-gate-event":
        raise ValueError(f"unknown counting {counting!r}")
    if architecture == "bucket":
        return n * (n + 1) + d * (2 * n + 1)
    return d * (2 * (2**n - 1) + 2 * n + 1)


def analytic_error(epsilon: float, n: int, architecture: str, counting: str = "per-active-switch", d: int = 1) -> float:
    """Probability that at least one of the call's fault opportunities fires."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    sites = error_sites(n, architecture, counting, d)
    if epsilon == 0.0:
        return 0.0
    if epsilon == 1.0:
        return 1.0
    return -math.expm1(sites * math.log1p(-epsilon))


def wilson_half_width(failures: int, trials: int, z: float = 1.959963984540054) -> float:
    if trials < 1:
        raise ValueError("need at least one trial")
    p = failures / trials
    denom = 1 + z * z / trials
    return z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom


# -- single-site error operators (all monomial, hence unitary on the basis) --

def _flip_switch(v: int):
    def op(c: Configuration):
        t = c.qutrits[v]
        if t == WAIT:
            return c
        q = bytearray(c.qutrits)
        q[v] = t ^ 1
        return c._replace(qutrits=bytes(q))

    return op


def _weyl(v: int, shift: int, clock: int):
    def op(c: Configuration):
        t = c.qutrits[v]
        q = bytearray(c.qutrits)
        q[v] = (t + shift) % 3
        return c._replace(qutrits=bytes(q)), _OMEGA ** (clock * t)

    return op


def _pauli_payload(where: set, which: str):
    def op(c: Configuration):
        bus = c.bus
        if bus is None or (bus.kind, bus.index) not in where:
            return c
        p = bus.payload
        if which == "X":
            return c._replace(bus=bus._replace(payload=p ^ 1))
        if which == "Z":
            return c, (-1) ** p
        return c._replace(bus=bus._replace(payload=p ^ 1)), (1j if p == 0 else -1j)

    return op


def _near(site: tuple[str, int], n: int) -> set:
    kind, idx = site
    if kind == "leaf":
        return {site}
    out = {site}
    for b in (0, 1):
        w = 2 * idx + 1 + b
        out.add(("node", w) if w < 2**n - 1 else ("leaf", w - (2**n - 1)))
    return out


class FaultInjector:
    """Samples faults for one trial from its own generator."""

    def __init__(self, model: NoiseModel, rng: np.random.Generator, n: int):
        self.model = model
        self.rng = rng
        self.n = n
        self.faults: list[tuple] = []

    def _fires(self, count: int) -> np.ndarray:
        if self.model.epsilon == 0.0 or count == 0:
            return np.zeros(count, dtype=bool)
        return self.rng.random(count) < self.model.epsilon

    def _depolarize(self, site):
        shift, clock = divmod(int(self.rng.integers(1, 9)), 3)
        if site[0] == "leaf":
            return _pauli_payload({site}, "XYZ"[int(self.rng.integers(0, 3))])
        return _weyl(site[1], shift, clock)

    def plan(self, gate: Gate, events: list[GateEvent]):
        if self.model.counting != "per-gate-event":
            return frozenset(), []
        flipped, post = set(), []
        for event, fired in zip(events, self._fires(len(events))):
            if not fired:
                continue
            self.faults.append((event.kind, event.site))
            site, kind, channel = event.site, event.kind, self.model.channel
            if channel == "qutrit-depolarize":
                post.append(self._depolarize(site))
            elif kind == "fanout" or (channel == "route-flip" and kind == "route"):
                # a fanout event carries q_j to the switch: any corruption means the wrong control value
                flipped.add(site[1])
            elif kind == "store":
                post.append(_flip_switch(site[1]))
            else:
                # unstore, memory, and payload-flip on hops: corrupt the carried bit
                post.append(_pauli_payload(_near(site, self.n), "X"))
        return frozenset(flipped), post

    def at_checkpoint(self, state: QuantumState, name: str) -> QuantumState:
        if self.model.counting != "per-active-switch" or name != "switches_ready":
            return state
        active = sorted({v for c in state.amplitudes for v, t in enumerate(c.qutrits) if t != WAIT})
        for v, fired in zip(active, self._fires(len(active))):
            if not fired:
                continue
            self.faults.append(("switch", ("node", v)))
            op = self._depolarize(("node", v)) if self.model.channel == "qutrit-depolarize" else _flip_switch(v)
            state = state.map_basis(op)
        return state


def run_protocol(architecture: str, state: QuantumState, memory: MemoryArray | None, mode: str, engine: Engine) -> QuantumState:
    _check_arch(architecture)
    state, memory = prepare(state, memory, mode)
    if architecture == "bucket":
        return run_bucket(state, memory, mode, engine)[0]
    return run_fanout(state, memory, mode, engine)[0]


def _address_state(n: int, d: int, spec, rng: np.random.Generator) -> QuantumState:
    if spec == "basis":
        return make_address_state(n, [(int(rng.integers(0, 2**n)), 1.0)], d)
    if spec == "uniform":
        amp = 1 / math.sqrt(2**n)
        return make_address_state(n, [(k, amp) for k in range(2**n)], d)
    if isinstance(spec, (int, np.integer)):
        return make_address_state(n, [(int(spec), 1.0)], d)
    return make_address_state(n, spec, d)


def run_trial(architecture: str, n: int, model: NoiseModel, memory: MemoryArray, address_distribution, trial: int, mode: str = COPY) -> bool:
    """One noisy call; True when it failed."""
    rng = np.random.default_rng([model.seed, trial])
    state = _address_state(n, memory.d, address_distribution, rng)
    ideal = ideal_qram_oracle(state, memory, mode)
    injector = FaultInjector(model, rng, n)
    final = run_protocol(architecture, state, memory, mode, Engine(injector))
    return fidelity(final, ideal) < 1 - FAILURE_TOL


def _run_chunk(args) -> int:
    architecture, n, model, memory, address_distribution, mode, indices = args
    return sum(run_trial(architecture, n, model, memory, address_distribution, t, mode) for t in indices)


@dataclass
class SweepRow:
    architecture: str
    n: int
    epsilon: float
    trials: int
    failures: int | None
    fail_rate: float | None
    ci_half: float | None
    analytic: float

    @property
    def sigma(self) -> float | None:
        return None if self.ci_half is None else self.ci_half / 1.959963984540054


@dataclass
class NoiseSweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            writer.writerow(["" if getattr(r, c) is None else repr(getattr(r, c)) if isinstance(getattr(r, c), float) else getattr(r, c) for c in SWEEP_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([{c: getattr(r, c) for c in SWEEP_COLUMNS} for r in self.rows], indent=2)

    def as_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.rows]


def monte_carlo_failure(
    architecture: str,
    n: int,
    model: NoiseModel,
    trials: int,
    memory: MemoryArray | None = None,
    address_distribution="basis",
    mode: str = COPY,
    workers: int = 1,
) -> SweepRow:
    """Estimate the failure rate of noisy calls.

    ``address_distribution`` is ``"basis"`` (a fresh uniformly random basis
    address each trial), ``"uniform"`` (equal superposition), a fixed int,
    or an explicit list of (address, amplitude) pairs.  Trial t draws from
    ``default_rng([seed, t])`` so any split across workers gives the same
    failure count.
    """
    _check_arch(architecture)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if memory is None:
        memory = memory_from_pattern(n, "random", seed=model.seed)
    if memory.n != n:
        raise ValueError(f"memory has 2**{memory.n} cells, expected 2**{n}")
    if workers <= 1:
        failures = _run_chunk((architecture, n, model, memory, address_distribution, mode, range(trials)))
    else:
        chunks = [range(i, trials, workers) for i in range(workers)]
        args = [(architecture, n, model, memory, address_distribution, mode, c) for c in chunks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(_run_chunk, args))
    return SweepRow(
        architecture=architecture,
        n=n,
        epsilon=model.epsilon,
        trials=trials,
        failures=failures,
        fail_rate=failures / trials,
        ci_half=wilson_half_width(failures, trials),
        analytic=analytic_error(model.epsilon, n, architecture, model.counting, memory.d),
    )


def error_scaling_table(epsilons: Sequence[float], ns: Sequence[int], architectures: Sequence[str] = QUANTUM_ARCHITECTURES) -> NoiseSweepResult:
    if not epsilons or not ns:
        raise ValueError("need at least one epsilon and one n")
    rows = [
        SweepRow(arch, n, eps, 0, None, None, None, analytic_error(eps, n, arch))
        for arch in architectures
        for eps in epsilons
        for n in ns
    ]
    return NoiseSweepResult(rows)
