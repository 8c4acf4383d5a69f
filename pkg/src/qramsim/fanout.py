"""Quantum fanout qRAM.

Index qubit j drives all 2**j switches of level j at once; the bus then
follows the single conducting path, so its position becomes a unary copy of
the address.  Running the translation backwards returns the bus to the
entrance and releases the switches.
"""
from __future__ import annotations

from dataclasses import dataclass

from .gates import BUS_PORT, Engine, GateEvent, MemoryCoupling, fanout_set, hop, output_swap
from .oracle import COPY, MemoryArray, check_address_state, prepare
from .qstate import WAIT, QuantumState, dump_state
from .tree import path_for_address


@dataclass
class FanoutCallReport:
    final_state: QuantumState
    gate_events: list[GateEvent]
    index_bus_interactions: int
    routing_nodes_traversed_per_branch: int
    time_steps: int

    def to_dict(self) -> dict:
        return {
            "architecture": "fanout",
            "final_state": dump_state(self.final_state),
            "counts": {
                "index_bus_interactions": self.index_bus_interactions,
                "routing_nodes_traversed_per_branch": self.routing_nodes_traversed_per_branch,
                "time_steps": self.time_steps,
                "gate_events": len(self.gate_events),
                **fanout_gate_counts(self.final_state.n),
            },
            "gate_events": [e.as_dict() for e in self.gate_events],
        }


def fanout_gate_counts(n: int) -> dict:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return {
        "total_routing_gates": 2**n - 1,
        "controls_of_index_bit": [2**k for k in range(n)],
        "bus_interactions": n,
    }


def _check_bus_at_root(state: QuantumState) -> None:
    for c, _ in state:
        if c.bus is None or c.bus.kind != "node" or c.bus.index != 0:
            raise ValueError("binary-to-unary translation needs the bus at the tree entrance")
        if c.qutrits.count(WAIT) != len(c.qutrits):
            raise ValueError("switches must be released (WAIT) before the translation")


def _translate(state: QuantumState, engine: Engine) -> QuantumState:
    n = state.n
    for j in range(n):
        state = engine.apply(state, fanout_set(j))
    state = engine.checkpoint(state, "switches_ready")
    for j in range(n):
        state = engine.apply(state, hop(n, j))
    return state


def _untranslate(state: QuantumState, engine: Engine) -> QuantumState:
    n = state.n
    for j in reversed(range(n)):
        state = engine.apply(state, hop(n, j))
    for j in reversed(range(n)):
        state = engine.apply(state, fanout_set(j))
    return state


def binary_to_unary(state: QuantumState, engine: Engine | None = None) -> QuantumState:
    """Move a bus waiting at the entrance to leaf k in every branch |k>."""
    _check_bus_at_root(state)
    return _translate(state, engine or Engine())


def unary_to_binary(state: QuantumState, engine: Engine | None = None) -> QuantumState:
    """Inverse of :func:`binary_to_unary`."""
    return _untranslate(state, engine or Engine())


def inject_bus(state: QuantumState) -> QuantumState:
    return Engine().apply(state, BUS_PORT)


def run_fanout(state: QuantumState, memory: MemoryArray | None, mode: str, engine: Engine) -> tuple[QuantumState, list[GateEvent]]:
    """Run all d passes; returns the final state and the first descent's route events."""
    n = state.n
    cells = None if memory is None else memory.cells
    descent: list[GateEvent] = []
    for b in range(state.d):
        state = engine.apply(state, BUS_PORT)
        state = engine.apply(state, output_swap(b))
        mark = len(engine.events)
        state = _translate(state, engine)
        if b == 0:
            descent = [e for e in engine.events[mark:] if e.kind == "route"]
        state = engine.apply(state, MemoryCoupling(n, b, mode, cells))
        state = engine.apply(state, output_swap(b))
        state = _untranslate(state, engine)
        state = engine.apply(state, BUS_PORT)
    return state, descent


def fanout_call(state: QuantumState, memory: MemoryArray | None, mode: str = COPY, engine: Engine | None = None) -> FanoutCallReport:
    state, memory = prepare(state, memory, mode)
    check_address_state(state)
    engine = engine or Engine()
    addresses = {c.address() for c in state.amplitudes}
    final, descent = run_fanout(state, memory, mode, engine)
    n = state.n
    descent_nodes = {e.site[1] for e in descent}
    all_route_events = [e.site[1] for e in engine.events if e.kind == "route"]
    # the log holds one route event per (level, node); a branch meets exactly
    # the events sitting on its own path
    per_branch, traversed = set(), set()
    for k in addresses:
        path = set(path_for_address(n, k)[1])
        per_branch.add(len(path & descent_nodes))
        traversed.add(sum(v in path for v in all_route_events) // state.d)
    return FanoutCallReport(
        final_state=final,
        gate_events=engine.events,
        index_bus_interactions=max(per_branch),
        routing_nodes_traversed_per_branch=max(traversed),
        time_steps=engine.time_steps,
    )
