"""Elementary two-body gates of the routing tree and the engine that applies them.

Every gate is an involution on basis configurations, so each one is unitary
on its own and any schedule is undone by replaying it backwards.  The engine
applies a gate to the whole sparse state in one pass, logs one
:class:`GateEvent` per distinct site it acted on, and gives an optional fault
injector the chance to corrupt the step.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, NamedTuple, Protocol, Sequence

from . import tree
from .qstate import WAIT, Bus, Configuration, QuantumState

ROOT = ("node", 0)
_EMPTY_BUS = Bus("node", 0, 0)
_NO_FLIPS: frozenset = frozenset()

# kinds counted as one time step / one error opportunity
TIMED_KINDS = frozenset({"fanout", "route", "store", "unstore", "memory"})


class GateEvent(NamedTuple):
    """One two-body interaction. ``port`` names the register a transfer touches."""

    kind: str
    level: int | None
    site: tuple[str, int]
    port: str | None = None

    @property
    def timed(self) -> bool:
        return self.kind in TIMED_KINDS

    @property
    def controls(self) -> tuple[str, ...]:
        kind, idx = self.site
        if self.kind == "route":
            return (f"node:{idx}",)
        if self.kind == "fanout":
            return (f"q[{self.level}]",)
        if self.kind == "memory":
            return (f"memory[{idx}]",)
        if self.kind == "transfer":
            # index injection is driven by q[j]; output swaps by the bus; the port by nothing
            if self.port.startswith("q["):
                return (self.port,)
            return ("bus",) if self.port.startswith("a[") else ()
        return ("bus",)

    @property
    def targets(self) -> tuple[str, ...]:
        kind, idx = self.site
        if self.kind in ("store", "unstore", "fanout"):
            return (f"node:{idx}",)
        if self.kind == "transfer" and self.port.startswith("a["):
            return (self.port,)
        return ("bus",)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "site": _site_name(self.site),
            "controls": list(self.controls),
            "targets": list(self.targets),
        }


def _site_name(site: tuple[str, int]) -> str:
    kind, idx = site
    if kind == "node" and idx == 0:
        return "node:0"
    return f"{kind}:{idx}"


def _bus_site(bus: Bus) -> tuple[str, int]:
    return (bus.kind, bus.index)


def chain_end(n: int, qutrits: Sequence[int]) -> tuple[int | None, int | None]:
    """Walk from the root through active switches.

    Returns (last active node or None, first WAIT node reached or None when
    the walk falls off into a leaf).
    """
    last = None
    v = 0
    n_nodes = 2**n - 1
    while v < n_nodes:
        t = qutrits[v]
        if t == WAIT:
            return last, v
        last = v
        v = 2 * v + 1 + t
    return last, None


class Gate:
    kind = "gate"
    level: int | None = None
    port: str | None = None

    def sites(self, c: Configuration) -> tuple:
        raise NotImplementedError

    def act(self, c: Configuration, flipped: frozenset = frozenset()) -> Configuration:
        raise NotImplementedError

    def event(self, site) -> GateEvent:
        return GateEvent(self.kind, self.level, site, self.port)


class Hop(Gate):
    """Carrier at node v  <->  carrier at the child selected by v's switch.

    Moves the carrier down one level, or back up when it sits at the selected
    child.  A node listed in ``flipped`` selects the other child for this
    application only.
    """

    kind = "route"

    def __init__(self, n: int, level: int):
        self.n = n
        self.level = level
        self._lo = 2**level - 1
        self._hi = 2 ** (level + 1) - 1
        self._last = level == n - 1




    def _locate(self, c: Configuration) -> tuple[int | None, bool]:
        bus = c.bus
        if bus is None:
            return None, False
        if bus.kind == "node":
            if self._lo <= bus.index < self._hi:
                return bus.index, True
            if bus.index == 0:
                return None, False
            v = (bus.index - 1) // 2
        else:
            if not self._last:
                return None, False
            v = (bus.index + 2**self.n - 2) // 2
        if self._lo <= v < self._hi:
            return v, False
        return None, False

    def _child(self, v: int, bit: int) -> tuple[str, int]:
        w = 2 * v + 1 + bit
        if self._last:
            return ("leaf", w - (2**self.n - 1))
        return ("node", w)

    def sites(self, c):
        v, at_node = self._locate(c)
        if v is None or c.qutrits[v] == WAIT:
            return ()
        if at_node or (c.bus.kind, c.bus.index) == self._child(v, c.qutrits[v]):
            return (("node", v),)
        return ()

    def act(self, c, flipped=frozenset()):
        v, at_node = self._locate(c)
        if v is None:
            return c
        t = c.qutrits[v]
        if t == WAIT:
            return c
        if v in flipped:
            t ^= 1
        target = self._child(v, t)
        bus = c.bus
        if at_node:
            return Configuration(c.q, Bus(target[0], target[1], bus.payload), c.qutrits, c.memory, c.a)
        if (bus.kind, bus.index) == target:
            return Configuration(c.q, Bus("node", v, bus.payload), c.qutrits, c.memory, c.a)
        return c


class Store(Gate):
    """U_s at one level: a carrier reaching the first WAIT node is absorbed.

    Pairs (carrier at v, v WAIT) with (no carrier, v holding the payload),
    where v ends the active chain from the root.  Applied again it releases
    the stored qubit, so the same gate also implements U_s^dagger.
    """

    def __init__(self, n: int, level: int, kind: str = "store"):
        self.n = n
        self.level = level
        self.kind = kind



    def _match(self, c: Configuration):
        q = c.qutrits
        bus = c.bus
        if bus is None:
            last, _ = chain_end(self.n, q)
            if last is not None and tree.level_of(last) == self.level:
                return last, False
            return None, False
        if bus.kind != "node" or tree.level_of(bus.index) != self.level:
            return None, False
        v = bus.index
        if q[v] != WAIT:
            return None, False
        _, first_wait = chain_end(self.n, q)
        if first_wait != v:
            return None, False
        if self.level < self.n - 1 and q[2 * v + 1 + bus.payload] != WAIT:
            return None, False
        return v, True

    def sites(self, c):
        v, _ = self._match(c)
        return () if v is None else (("node", v),)

    def act(self, c, flipped=frozenset()):
        v, absorbing = self._match(c)
        if v is None:
            return c
        q = bytearray(c.qutrits)
        if absorbing:
            q[v] = c.bus.payload
            return Configuration(c.q, None, bytes(q), c.memory, c.a)
        payload = q[v]
        q[v] = WAIT
        return Configuration(c.q, Bus("node", v, payload), bytes(q), c.memory, c.a)


class InjectIndex(Gate):
    """Swap index qubit j into a carrier at the tree entrance (and back)."""

    kind = "transfer"

    def __init__(self, j: int):
        self.j = j
        self.port = f"q[{j}]"

    def sites(self, c):
        bus = c.bus
        if bus is None or (bus.kind, bus.index) == ROOT and c.q[self.j] == 0:
            return (ROOT,)
        return ()

    def act(self, c, flipped=frozenset()):
        j = self.j
        bus = c.bus
        if bus is None:
            q = list(c.q)
            p, q[j] = q[j], 0
            return Configuration(tuple(q), Bus("node", 0, p), c.qutrits, c.memory, c.a)
        if bus.kind == "node" and bus.index == 0 and c.q[j] == 0:
            q = list(c.q)
            q[j] = bus.payload
            return Configuration(tuple(q), None, c.qutrits, c.memory, c.a)
        return c


class BusPort(Gate):
    """Create an empty bus (payload 0) at the entrance, or remove one."""

    kind = "transfer"
    port = "port"

    def sites(self, c):
        bus = c.bus
        if bus is None or (bus.kind == "node" and bus.index == 0 and bus.payload == 0):
            return (ROOT,)
        return ()

    def act(self, c, flipped=frozenset()):
        bus = c.bus
        if bus is None:
            return Configuration(c.q, _EMPTY_BUS, c.qutrits, c.memory, c.a)
        if bus.kind == "node" and bus.index == 0 and bus.payload == 0:
            return Configuration(c.q, None, c.qutrits, c.memory, c.a)
        return c


class MemoryCoupling(Gate):
    """Bus at leaf k interacts with bit ``bit`` of cell k (C-NOT or swap)."""

    kind = "memory"

    def __init__(self, n: int, bit: int, mode: str, cells: Sequence[int] | None):
        self.level = n
        self.bit = bit
        self.mode = mode
        self.cells = cells



    def sites(self, c):
        bus = c.bus
        if bus is not None and bus.kind == "leaf":
            return (("leaf", bus.index),)
        return ()

    def act(self, c, flipped=frozenset()):
        bus = c.bus
        if bus is None or bus.kind != "leaf":
            return c
        k, b = bus.index, self.bit
        if self.cells is not None:
            return Configuration(c.q, Bus("leaf", k, bus.payload ^ ((self.cells[k] >> b) & 1)), c.qutrits, c.memory, c.a)
        cell = c.memory[k]
        if self.mode == "copy":
            return Configuration(c.q, Bus("leaf", k, bus.payload ^ ((cell >> b) & 1)), c.qutrits, c.memory, c.a)
        cell_bit = (cell >> b) & 1
        memory = list(c.memory)
        memory[k] = (cell & ~(1 << b)) | (bus.payload << b)
        return Configuration(c.q, Bus("leaf", k, cell_bit), c.qutrits, tuple(memory), c.a)


class OutputSwap(Gate):
    """Exchange the bus payload with bit ``bit`` of the output register."""

    kind = "transfer"

    def __init__(self, bit: int):
        self.bit = bit
        self.port = f"a[{bit}]"

    def sites(self, c):
        return () if c.bus is None else (_bus_site(c.bus),)

    def act(self, c, flipped=frozenset()):
        bus = c.bus
        if bus is None:
            return c
        b = self.bit
        a_bit = (c.a >> b) & 1
        a = (c.a & ~(1 << b)) | (bus.payload << b)
        return Configuration(c.q, Bus(bus.kind, bus.index, a_bit), c.qutrits, c.memory, a)


def _toggle(t: int, bit: int) -> int:
    return bit if t == WAIT else (WAIT if t == bit else t)


_TOGGLE = [bytes(_toggle(t, bit) if t < 3 else t for t in range(256)) for bit in (0, 1)]


class FanoutSet(Gate):
    """Index qubit j drives every switch on level j: WAIT <-> (value of q_j).

    This is the high-fanout control of the conventional architecture; one
    event per switch, 2**j per level.  A flipped node sees the wrong control
    value, so it is set wrongly or fails to release.
    """

    kind = "fanout"

    def __init__(self, level: int):
        self.level = level
        self._nodes = tree.nodes_at_level(level)



    def sites(self, c):
        return tuple(("node", v) for v in self._nodes)

    def act(self, c, flipped=frozenset()):
        bit = c.q[self.level]
        lo, hi = self._nodes.start, self._nodes.stop
        seg = c.qutrits[lo:hi]
        if flipped:
            new = bytes(_toggle(t, bit ^ (v in flipped)) for v, t in zip(self._nodes, seg))
        else:
            new = seg.translate(_TOGGLE[bit])
        return Configuration(c.q, c.bus, c.qutrits[:lo] + new + c.qutrits[hi:], c.memory, c.a)


# gates hold no per-call state, so protocol schedules share instances
@lru_cache(maxsize=None)
def hop(n: int, level: int) -> Hop:
    return Hop(n, level)


@lru_cache(maxsize=None)
def store(n: int, level: int, kind: str = "store") -> Store:
    return Store(n, level, kind)


@lru_cache(maxsize=None)
def inject_index(j: int) -> InjectIndex:
    return InjectIndex(j)


@lru_cache(maxsize=None)
def output_swap(bit: int) -> OutputSwap:
    return OutputSwap(bit)


@lru_cache(maxsize=None)
def fanout_set(level: int) -> FanoutSet:
    return FanoutSet(level)


BUS_PORT = BusPort()


class Injector(Protocol):
    def plan(self, gate: Gate, events: list[GateEvent]) -> tuple[frozenset, list[Callable]]: ...

    def at_checkpoint(self, state: QuantumState, name: str) -> QuantumState: ...


class Engine:
    """Applies gates to a state, keeping the event log and the step count."""

    def __init__(self, injector: Injector | None = None, check: bool = True):
        self.injector = injector
        self.check = check
        self.events: list[GateEvent] = []
        self.time_steps = 0

    def apply(self, state: QuantumState, gate: Gate) -> QuantumState:
        amps = state.amplitudes
        if len(amps) == 1:
            sites = gate.sites(next(iter(amps)))
        else:
            found = set()
            for c in amps:
                found.update(gate.sites(c))
            sites = sorted(found)
        events = [gate.event(s) for s in sites]
        self.events.extend(events)
        flipped, post = _NO_FLIPS, ()
        if events and gate.kind in TIMED_KINDS:
            self.time_steps += 1
            if self.injector is not None:
                flipped, post = self.injector.plan(gate, events)
        before = len(state)
        act = gate.act
        new = state.map_basis(lambda c: act(c, flipped), check=self.check)
        for op in post:
            new = new.map_basis(op, check=self.check)
        if self.check and len(new) != before:
            raise AssertionError(f"{gate.kind} gate changed the support size {before} -> {len(new)}")
        return new

    def checkpoint(self, state: QuantumState, name: str) -> QuantumState:
        if self.injector is None:
            return state
        return self.injector.at_checkpoint(state, name)
