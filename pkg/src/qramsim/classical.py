"""Event-level simulation of the classical addressing circuits.

Three architectures are simulated element by element so that activation
counts come out of the circuit rather than from closed forms:

* ``fanout``: two transistors per node, each gated by one rail of the index
  bit of that level.  A transistor is activated when its gate rail is high.
* ``modified``: the same two transistors per node, but a node's pair is
  energized only when the signal reaches the node; the last stage adds one
  access transistor per memory cell.  Activated = energized.
* ``bucket``: one trit per node; index bits are routed by already-set trits
  and stored in the first WAIT trit they meet.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from . import tree
from .qstate import WAIT, ZERO, ONE

ARCHITECTURES = ("fanout", "modified", "bucket")
TRACE_COLUMNS = ("architecture", "n", "k", "total", "activated", "on_path", "waiting", "steps")


@dataclass
class ActivationTrace:
    architecture: str
    n: int
    k: int
    activated_elements: tuple
    total_elements: int
    on_path: int
    leaf: int
    waiting_trits: int = 0
    time_steps: int = 0
    fanout_load: list[int] = field(default_factory=list)
    reset_ok: bool = True

    def __post_init__(self):
        if len(set(self.activated_elements)) != len(self.activated_elements):
            raise ValueError("activated elements must be distinct")
        if self.activated_count > self.total_elements:
            raise ValueError("more activated elements than exist")

    @property
    def activated_count(self) -> int:
        return len(self.activated_elements)

    def row(self) -> dict:
        return {
            "architecture": self.architecture,
            "n": self.n,
            "k": self.k,
            "total": self.total_elements,
            "activated": self.activated_count,
            "on_path": self.on_path,
            "waiting": self.waiting_trits,
            "steps": self.time_steps,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["activated_elements"] = [list(e) if isinstance(e, tuple) else e for e in self.activated_elements]
        d["activated_count"] = self.activated_count
        return d


def traces_to_csv(traces) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TRACE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for t in traces:
        writer.writerow(t.row())
    return buf.getvalue()


def traces_to_json(traces) -> str:
    return json.dumps([t.to_dict() for t in traces], indent=2)


def _check(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= k < 2**n:
        raise ValueError(f"address {k} out of range for n={n}")


def simulate_fanout_classical(n: int, k: int) -> ActivationTrace:
    _check(n, k)
    rails = tree.address_bits(n, k)
    # transistor (v, b) conducts towards child b; its gate hangs on rail b of
    # the level's index bit
    activated = []
    for v in range(2**n - 1):
        bit = rails[tree.level_of(v)]
        activated.append((v, bit))
    conducting = set(activated)
    v, on_path = 0, 0
    while v < 2**n - 1:
        for b in (0, 1):
            if (v, b) in conducting:
                on_path += 1
                v = tree.child(v, b)
                break
        else:
            raise RuntimeError(f"no conducting transistor at node {v}")
    return ActivationTrace(
        architecture="fanout",
        n=n,
        k=k,
        activated_elements=tuple(activated),
        total_elements=2 * (2**n - 1),
        on_path=on_path,
        leaf=v - (2**n - 1),
        time_steps=n,
        fanout_load=[2 * 2**j for j in range(n)],
    )


def modified_fanout_netlist(n: int) -> list[dict]:
    """Transistors of the O(n)-activation circuit.

    Each record has ``id``, ``gate`` (the control wire: ``("q", j, rail)`` or
    ``("read",)``), ``source`` (the wire that energizes it) and ``drain``.
    Wires are ``("node", v)`` for the input of node v and ``("leaf", k)``.
    """
    nodes = 2**n - 1
    netlist = []
    for v in range(nodes):
        j = tree.level_of(v)
        for b in (0, 1):
            w = tree.child(v, b)
            drain = ("node", w) if w < nodes else ("leaf", w - nodes)
            netlist.append({"id": ("node", v, b), "gate": ("q", j, b), "source": ("node", v), "drain": drain})
    for leaf in range(2**n):
        netlist.append({"id": ("cell", leaf), "gate": ("read",), "source": ("leaf", leaf), "drain": ("cell", leaf)})
    return netlist


def simulate_modified_fanout(n: int, k: int) -> ActivationTrace:
    _check(n, k)
    netlist = modified_fanout_netlist(n)
    rails = tree.address_bits(n, k)
    high = {("q", j, rails[j]) for j in range(n)} | {("read",)}
    by_source: dict = {}
    for t in netlist:
        by_source.setdefault(t["source"], []).append(t)
    fanout_load = [sum(t["gate"][:2] == ("q", j) for t in netlist) for j in range(n)]

    energized, activated, steps = [("node", 0)], [], 0
    reached_cell = None
    while energized:
        steps += 1
        nxt = []
        for wire in energized:
            for t in by_source.get(wire, ()):
                activated.append(t["id"])
                if t["gate"] in high:
                    if t["drain"][0] == "cell":
                        reached_cell = t["drain"][1]
                    else:
                        nxt.append(t["drain"])
        energized = nxt
    return ActivationTrace(
        architecture="modified",
        n=n,
        k=k,
        activated_elements=tuple(activated),
        total_elements=len(netlist),
        on_path=n + 1,
        leaf=reached_cell,
        time_steps=steps,
        fanout_load=fanout_load,
    )


class TritTree:
    """Array of node trits for the classical bucket brigade."""

    def __init__(self, n: int):
        self.n = n
        self.trits = [WAIT] * (2**n - 1)
        self.hops = 0

    def send(self, bit: int) -> int:
        """Route ``bit`` from the root; returns the node that stored it."""
        v = 0
        while True:
            state = self.trits[v]
            if state == WAIT:
                self.trits[v] = ONE if bit else ZERO
                return v
            self.hops += 1
            v = tree.child(v, state)
            if v >= len(self.trits):
                raise RuntimeError("bit fell out of the tree: more bits sent than levels")

    def probe(self) -> int:
        v = 0
        while v < len(self.trits):
            state = self.trits[v]
            if state == WAIT:
                raise RuntimeError(f"probe absorbed at WAIT node {v}")
            v = tree.child(v, state)
        return v - len(self.trits)

    def reset(self) -> None:
        self.trits = [WAIT] * len(self.trits)


def simulate_bucket_classical(n: int, k: int) -> ActivationTrace:
    _check(n, k)
    trits = TritTree(n)
    stored = [trits.send(bit) for bit in tree.address_bits(n, k)]
    active = [v for v, t in enumerate(trits.trits) if t != WAIT]
    waiting = sum(t == WAIT for t in trits.trits)
    leaf = trits.probe()
    trits.reset()
    return ActivationTrace(
        architecture="bucket",
        n=n,
        k=k,
        activated_elements=tuple(stored),
        total_elements=2**n - 1,
        on_path=len(active),
        leaf=leaf,
        waiting_trits=waiting,
        time_steps=2 * n,
        reset_ok=all(t == WAIT for t in trits.trits),
    )


SIMULATORS = {
    "fanout": simulate_fanout_classical,
    "modified": simulate_modified_fanout,
    "bucket": simulate_bucket_classical,
}


def simulate(architecture: str, n: int, k: int) -> ActivationTrace:
    try:
        return SIMULATORS[architecture](n, k)
    except KeyError:
        raise ValueError(f"unknown architecture {architecture!r}; choose from {ARCHITECTURES}") from None


def elements_2d(n: int) -> dict:
    """Tree elements for a 1D array versus a row/column split of the address."""
    if n < 2:
        raise ValueError(f"a 2D arrangement needs n >= 2, got {n}")
    rows, cols = math.ceil(n / 2), n // 2
    return {"elements_1d": 2**n - 1, "elements_2d": (2**rows - 1) + (2**cols - 1)}
