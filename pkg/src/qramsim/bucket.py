"""Quantum bucket-brigade qRAM.

Index qubits are sent into the tree one at a time and absorbed by the first
WAIT node they meet; the loaded switches carve a single path for the bus.
After the bus round trip the loading is undone last level first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .gates import BUS_PORT, Engine, GateEvent, MemoryCoupling, chain_end, hop, inject_index, output_swap, store
from .oracle import COPY, MemoryArray, check_address_state, prepare
from .qstate import WAIT, QuantumState, dump_state


@dataclass
class BucketCallReport:
    final_state: QuantumState
    active_switches_per_branch: int
    gate_events: list[GateEvent]
    time_steps: int
    timing: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "architecture": "bucket",
            "final_state": dump_state(self.final_state),
            "counts": {
                "active_switches_per_branch": self.active_switches_per_branch,
                "time_steps": self.time_steps,
                "gate_events": len(self.gate_events),
            },
            "timing": self.timing,
            "gate_events": [e.as_dict() for e in self.gate_events],
        }


def bb_step_count(n: int) -> int:
    """Sequential two-body steps in one call with d = 1.

    Loading qubit j takes j hops plus one storage, unloading mirrors it, and
    the bus makes n hops down, one memory interaction and n hops up.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n * (n + 1) + 2 * n + 1


def _load(state: QuantumState, engine: Engine, timing: list) -> QuantumState:
    n = state.n
    for j in range(n):
        start = engine.time_steps
        state = engine.apply(state, inject_index(j))
        for i in range(j):
            state = engine.apply(state, hop(n, i))
        state = engine.apply(state, store(n, j))
        timing.append({"phase": "load", "level": j, "steps": engine.time_steps - start})
    return state


def _unload(state: QuantumState, engine: Engine, timing: list) -> QuantumState:
    n = state.n
    for j in reversed(range(n)):
        start = engine.time_steps
        state = engine.apply(state, store(n, j, kind="unstore"))
        for i in reversed(range(j)):
            state = engine.apply(state, hop(n, i))
        state = engine.apply(state, inject_index(j))
        timing.append({"phase": "unload", "level": j, "steps": engine.time_steps - start})
    return state


def _check_loadable(state: QuantumState) -> None:
    for c, _ in state:
        if c.bus is not None:
            raise ValueError("cannot load the index while a carrier is in the tree")
        if c.qutrits.count(WAIT) != len(c.qutrits):
            raise ValueError("every node must be WAIT before loading the index")


def _check_loaded(state: QuantumState) -> None:
    n = state.n
    for c, _ in state:
        if c.bus is not None:
            raise ValueError("cannot unload while a carrier is in the tree")
        active = [v for v, t in enumerate(c.qutrits) if t != WAIT]
        last, first_wait = chain_end(n, c.qutrits)
        if first_wait is not None or len(active) != n:
            raise ValueError(
                f"invalid switch pattern {c.render(state.d)['qutrits']!r}: expected exactly {n} active "
                f"switches on one root-to-leaf path, found {len(active)} active"
            )
        if any(q != 0 for q in c.q):
            raise ValueError("index register must be empty (all 0) while the index is loaded")


def load_index(state: QuantumState, engine: Engine | None = None) -> QuantumState:
    _check_loadable(state)
    return _load(state, engine or Engine(), [])


def unload_index(state: QuantumState, engine: Engine | None = None) -> QuantumState:
    _check_loaded(state)
    return _unload(state, engine or Engine(), [])


def bus_round_trip(state: QuantumState, engine: Engine, bit: int, mode: str, cells) -> QuantumState:
    """Bus in, down to the addressed leaf, memory interaction, back out.

    The bus first picks up bit ``bit`` of A and deposits the result back into
    A at the leaf, so it always returns empty.
    """
    n = state.n
    state = engine.apply(state, BUS_PORT)
    state = engine.apply(state, output_swap(bit))
    for i in range(n):
        state = engine.apply(state, hop(n, i))
    state = engine.apply(state, MemoryCoupling(n, bit, mode, cells))
    state = engine.apply(state, output_swap(bit))
    for i in reversed(range(n)):
        state = engine.apply(state, hop(n, i))
    return engine.apply(state, BUS_PORT)


def run_bucket(state: QuantumState, memory: MemoryArray | None, mode: str, engine: Engine) -> tuple[QuantumState, int, list]:
    timing: list[dict] = []
    state = _load(state, engine, timing)
    active = max((sum(t != WAIT for t in c.qutrits) for c in state.amplitudes), default=0)
    state = engine.checkpoint(state, "switches_ready")
    cells = None if memory is None else memory.cells
    for b in range(state.d):
        start = engine.time_steps
        state = bus_round_trip(state, engine, b, mode, cells)
        timing.append({"phase": "bus", "level": None, "bit": b, "steps": engine.time_steps - start})
    state = _unload(state, engine, timing)
    return state, active, timing


def bb_call(state: QuantumState, memory: MemoryArray | None, mode: str = COPY, engine: Engine | None = None) -> BucketCallReport:
    state, memory = prepare(state, memory, mode)
    check_address_state(state)
    engine = engine or Engine()
    final, active, timing = run_bucket(state, memory, mode, engine)
    return BucketCallReport(final, active, engine.events, engine.time_steps, timing)
