"""Sparse basis-state quantum states over the qRAM registers.

A configuration is one computational basis assignment of every register:
the index register ``q``, the mobile carrier ``bus`` (absent, or at a tree
node / leaf with a one-bit payload), one three-level register per tree node,
the memory cells (only when memory is quantum) and the output register
``a``.  A :class:`QuantumState` maps configurations to complex amplitudes.
"""
from __future__ import annotations

import json
import math
from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np

ZERO, ONE, WAIT = 0, 1, 2
QUTRIT_SYMBOLS = "01."

PRUNE = 1e-12
NORM_TOL = 1e-9

REGISTERS = ("q", "bus", "qutrits", "memory", "a")


class Bus(NamedTuple):
    """Mobile carrier. ``kind`` is "node" (waiting at a node's input) or "leaf".

    ``Bus("node", 0, p)`` is the tree entrance (the root edge).
    """

    kind: str
    index: int
    payload: int

    def location(self) -> str:
        if self.kind == "node":
            return "root" if self.index == 0 else f"node:{self.index}"
        return f"leaf:{self.index}"


class Configuration(NamedTuple):
    """One basis assignment. ``qutrits`` is a bytes string over {0, 1, 2=WAIT}."""

    q: tuple[int, ...]
    bus: Bus | None
    qutrits: bytes
    memory: tuple[int, ...] | None
    a: int

    def address(self) -> int:
        k = 0
        for b in self.q:
            k = (k << 1) | b
        return k

    def register(self, name: str):
        return getattr(self, name)

    def render(self, d: int) -> dict:
        out = {
            "q": "".join(map(str, self.q)),
            "bus": None if self.bus is None else {"position": self.bus.location(), "payload": self.bus.payload},
            "qutrits": "".join(QUTRIT_SYMBOLS[t] for t in self.qutrits),
            "a": format(self.a, f"0{d}b"),
        }
        if self.memory is not None:
            out["memory"] = [format(m, f"0{d}b") for m in self.memory]
        return out


def blank_configuration(n: int, k: int, quantum_memory: tuple[int, ...] | None = None, a: int = 0) -> Configuration:
    q = tuple((k >> (n - 1 - j)) & 1 for j in range(n))
    return Configuration(q, None, bytes([WAIT]) * (2**n - 1), quantum_memory, a)


class NormalizationError(ValueError):
    pass


class QuantumState:
    """Immutable sparse state. Gate application returns a new instance."""

    __slots__ = ("n", "d", "quantum_memory", "_amps")

    def __init__(self, n: int, d: int, amplitudes: Mapping[Configuration, complex], quantum_memory: bool = False):
        self.n = n
        self.d = d
        self.quantum_memory = quantum_memory
        self._amps = {c: complex(v) for c, v in amplitudes.items() if abs(v) >= PRUNE}

    @classmethod
    def _trusted(cls, n: int, d: int, amps: dict, quantum_memory: bool) -> "QuantumState":
        # caller guarantees complex values; prune without rehashing survivors
        small = [c for c, v in amps.items() if abs(v) < PRUNE]
        for c in small:
            del amps[c]
        obj = cls.__new__(cls)
        obj.n, obj.d, obj.quantum_memory, obj._amps = n, d, quantum_memory, amps
        return obj

    @property
    def amplitudes(self) -> Mapping[Configuration, complex]:
        return self._amps

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps.items())

    def __repr__(self) -> str:
        return f"QuantumState(n={self.n}, d={self.d}, support={len(self._amps)}, quantum_memory={self.quantum_memory})"

    def amplitude(self, config: Configuration) -> complex:
        return self._amps.get(config, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._amps.values()))

    def shape(self) -> tuple[int, int, bool]:
        return self.n, self.d, self.quantum_memory

    def map_basis(self, fn: Callable[[Configuration], Configuration | tuple[Configuration, complex]], check: bool = True) -> "QuantumState":
        """Apply a monomial operator given by its action on basis configurations."""
        pairs = []
        permutation = True
        for c, amp in self._amps.items():
            out = fn(c)
            if isinstance(out, Configuration):
                pairs.append((out, amp))
            else:
                permutation = False
                pairs.append((out[0], amp * out[1]))
        new = dict(pairs)
        if len(new) != len(pairs):
            permutation = False
            new = {}
            for c2, amp in pairs:
                new[c2] = new.get(c2, 0j) + amp
        result = QuantumState._trusted(self.n, self.d, new, self.quantum_memory)
        # a plain relabelling of basis states cannot change the norm
        if check and not permutation:
            result.check_norm()
        return result

    def check_norm(self, tol: float = NORM_TOL) -> None:
        total = sum(abs(v) ** 2 for v in self._amps.values())
        if abs(total - 1.0) > tol:
            raise NormalizationError(f"state norm drifted: sum |amp|^2 = {total!r}")

    def configurations(self) -> list[Configuration]:
        return list(self._amps)

    def to_vector(self, basis: list[Configuration]) -> np.ndarray:
        return np.array([self._amps.get(c, 0j) for c in basis], dtype=complex)


def make_address_state(n: int, amplitudes: Iterable[tuple[int, complex]], d: int = 1) -> QuantumState:
    """Address superposition sum_k alpha_k |k>_Q with every other register idle."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    amps: dict[Configuration, complex] = {}
    seen = set()
    total = 0.0
    for k, amp in amplitudes:
        if not 0 <= k < 2**n:
            raise ValueError(f"address {k} out of range for n={n}")
        if k in seen:
            raise ValueError(f"duplicate address {k}")
        seen.add(k)
        total += abs(amp) ** 2
        amps[blank_configuration(n, k)] = complex(amp)
    if abs(total - 1.0) > NORM_TOL:
        raise NormalizationError(f"address amplitudes are not normalized: sum |amp|^2 = {total:.12g}")
    return QuantumState(n, d, amps)


def uniform_address_state(n: int, d: int = 1) -> QuantumState:
    amp = 1 / math.sqrt(2**n)
    return make_address_state(n, [(k, amp) for k in range(2**n)], d)


def _check_same_shape(a: QuantumState, b: QuantumState) -> None:
    if a.shape() != b.shape():
        raise ValueError(f"register shapes differ: {a.shape()} vs {b.shape()}")


def inner(a: QuantumState, b: QuantumState) -> complex:
    _check_same_shape(a, b)
    keys = a.amplitudes if len(a) <= len(b) else b.amplitudes
    return sum((a.amplitude(c).conjugate() * b.amplitude(c) for c in keys), 0j)


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """|<a|b>|^2, clipped to [0, 1] against rounding."""
    return min(1.0, max(0.0, abs(inner(a, b)) ** 2))


def max_amplitude_error(a: QuantumState, b: QuantumState) -> float:
    _check_same_shape(a, b)
    keys = set(a.amplitudes) | set(b.amplitudes)
    return max((abs(a.amplitude(c) - b.amplitude(c)) for c in keys), default=0.0)


def schmidt_rank(state: QuantumState, partition: Iterable[str], tol: float = 1e-10) -> int:
    """Schmidt rank of ``state`` across (partition | rest).

    ``partition`` names registers from ``REGISTERS``.  The coefficient matrix
    is built only over the distinct sub-configurations in the support.
    """
    part = set(partition)
    unknown = part - set(REGISTERS)
    if unknown:
        raise ValueError(f"unknown registers {sorted(unknown)}")
    present = set(REGISTERS) if state.quantum_memory else set(REGISTERS) - {"memory"}
    part &= present
    if not part or part == present:
        raise ValueError("partition must select a nonempty proper subset of the registers")
    left_names = [r for r in REGISTERS if r in part]
    right_names = [r for r in REGISTERS if r in present and r not in part]
    rows: dict[tuple, int] = {}
    cols: dict[tuple, int] = {}
    entries = []
    for c, amp in state:
        lk = tuple(c.register(r) for r in left_names)
        rk = tuple(c.register(r) for r in right_names)
        i = rows.setdefault(lk, len(rows))
        j = cols.setdefault(rk, len(cols))
        entries.append((i, j, amp))
    m = np.zeros((len(rows), len(cols)), dtype=complex)
    for i, j, amp in entries:
        m[i, j] += amp
    sv = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(sv > tol))


def dump_state(state: QuantumState) -> list[dict]:
    rows = []
    for c, amp in state:
        rows.append({"configuration": c.render(state.d), "re": amp.real, "im": amp.imag})
    rows.sort(key=lambda r: json.dumps(r["configuration"], sort_keys=True))
    return rows


def _parse_location(text: str) -> tuple[str, int]:
    if text == "root":
        return "node", 0
    kind, idx = text.split(":")
    return kind, int(idx)


def load_state(rows: list[dict], n: int, d: int) -> QuantumState:
    """Inverse of :func:`dump_state`."""
    amps = {}
    quantum_memory = False
    for row in rows:
        cfg = row["configuration"]
        bus = None
        if cfg["bus"] is not None:
            kind, idx = _parse_location(cfg["bus"]["position"])
            bus = Bus(kind, idx, int(cfg["bus"]["payload"]))
        memory = None
        if "memory" in cfg:
            quantum_memory = True
            memory = tuple(int(m, 2) for m in cfg["memory"])
        c = Configuration(
            tuple(int(b) for b in cfg["q"]),
            bus,
            bytes(QUTRIT_SYMBOLS.index(t) for t in cfg["qutrits"]),
            memory,
            int(cfg["a"], 2),
        )
        amps[c] = complex(row["re"], row["im"])
    return QuantumState(n, d, amps, quantum_memory)
