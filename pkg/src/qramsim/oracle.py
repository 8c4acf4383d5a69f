"""Memory arrays and the brute-force reference qRAM transformation.

The reference never touches the tree: it rewrites each basis term
``|k>_Q |a>_A`` directly, which makes it an independent check of the
routing protocols.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .qstate import NORM_TOL, WAIT, Configuration, NormalizationError, QuantumState

COPY, SWAP = "copy", "swap"
MODES = (COPY, SWAP)


@dataclass(frozen=True)
class MemoryArray:
    """2**n cells of d bits.

    Classical cells are ints.  Quantum cells are single-cell pure states,
    stored as tuples of ``(value, amplitude)`` pairs; the array is their
    product state.
    """

    n: int
    d: int
    cells: tuple
    mode: str = "classical"

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if len(self.cells) != 2**self.n:
            raise ValueError(f"memory has {len(self.cells)} cells, expected 2**{self.n} = {2**self.n}")
        if self.mode == "classical":
            for k, v in enumerate(self.cells):
                if not 0 <= v < 2**self.d:
                    raise ValueError(f"cell {k} value {v} does not fit in d={self.d} bits")
        elif self.mode == "quantum":
            for k, cell in enumerate(self.cells):
                total = 0.0
                for v, amp in cell:
                    if not 0 <= v < 2**self.d:
                        raise ValueError(f"cell {k} component {v} does not fit in d={self.d} bits")
                    total += abs(amp) ** 2
                if abs(total - 1) > NORM_TOL:
                    raise NormalizationError(f"quantum cell {k} is not normalized (sum |amp|^2 = {total:.12g})")
        else:
            raise ValueError(f"memory mode must be 'classical' or 'quantum', got {self.mode!r}")

    @classmethod
    def classical(cls, cells: Sequence[int], d: int = 1) -> "MemoryArray":
        n = _width(len(cells))
        return cls(n, d, tuple(int(c) for c in cells), "classical")

    @classmethod
    def quantum(cls, cells: Sequence[int | Mapping[int, complex]], d: int = 1) -> "MemoryArray":
        n = _width(len(cells))
        norm_cells = []
        for cell in cells:
            if isinstance(cell, Mapping):
                norm_cells.append(tuple(sorted((int(v), complex(a)) for v, a in cell.items() if a != 0)))
            else:
                norm_cells.append(((int(cell), 1 + 0j),))
        return cls(n, d, tuple(norm_cells), "quantum")

    @property
    def is_quantum(self) -> bool:
        return self.mode == "quantum"

    def value(self, k: int) -> int:
        if self.is_quantum:
            raise TypeError("quantum cells have no single classical value")
        return self.cells[k]


def _width(size: int) -> int:
    n = size.bit_length() - 1
    if size < 2 or 2**n != size:
        raise ValueError(f"memory length {size} is not a power of two >= 2")
    return n


def memory_from_pattern(n: int, pattern: str, d: int = 1, seed: int | None = None, quantum: bool = False) -> MemoryArray:
    if pattern == "zeros":
        cells = [0] * 2**n
    elif pattern == "ones":
        cells = [2**d - 1] * 2**n
    elif pattern == "random":
        rng = np.random.default_rng(seed)
        cells = [int(x) for x in rng.integers(0, 2**d, size=2**n)]
    else:
        raise ValueError(f"unknown memory pattern {pattern!r} (zeros|ones|random)")
    return MemoryArray.quantum(cells, d) if quantum else MemoryArray.classical(cells, d)


def load_memory(path: str | Path, n: int | None = None, d: int | None = None) -> MemoryArray:
    """Read a JSON ``{n, d, cells}`` file or a flat text file (one value per line)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict):
        file_n, file_d, cells = doc["n"], doc.get("d", 1), doc["cells"]
        if n is not None and n != file_n:
            raise ValueError(f"memory file declares n={file_n}, run uses n={n}")
        if d is not None and d != file_d:
            raise ValueError(f"memory file declares d={file_d}, run uses d={d}")
        if len(cells) != 2**file_n:
            raise ValueError(f"memory file has {len(cells)} cells, expected 2**{file_n}")
        return MemoryArray(file_n, file_d, tuple(int(c) for c in cells))
    cells = [int(line, 0) for line in text.split() if line.strip()]
    mem = MemoryArray.classical(cells, d or 1)
    if n is not None and mem.n != n:
        raise ValueError(f"memory file has {len(cells)} cells, expected 2**{n} = {2**n}")
    return mem


def save_memory(memory: MemoryArray, path: str | Path) -> None:
    if memory.is_quantum:
        raise TypeError("only classical memories have a file format")
    Path(path).write_text(json.dumps({"n": memory.n, "d": memory.d, "cells": list(memory.cells)}))


def check_compatible(state: QuantumState, memory: MemoryArray | None) -> None:
    if memory is None:
        if not state.quantum_memory:
            raise ValueError("classical-memory state needs a MemoryArray")
        return
    if memory.n != state.n:
        raise ValueError(f"memory size mismatch: memory has 2**{memory.n} cells, state addresses 2**{state.n}")
    if memory.d != state.d:
        raise ValueError(f"memory cell width d={memory.d} differs from state d={state.d}")


def fold_memory(state: QuantumState, memory: MemoryArray) -> QuantumState:
    """Tensor a quantum memory array into every configuration of ``state``."""
    if not memory.is_quantum:
        raise ValueError("only quantum memories are folded into the state")
    if state.quantum_memory:
        raise ValueError("state already carries quantum memory")
    check_compatible(state, memory)
    amps = {}
    for c, amp in state:
        for combo in product(*memory.cells):
            values = tuple(v for v, _ in combo)
            weight = math.prod(a for _, a in combo)
            amps[c._replace(memory=values)] = amp * weight
    return QuantumState(state.n, state.d, amps, quantum_memory=True)


def prepare(state: QuantumState, memory: MemoryArray | None, mode: str) -> tuple[QuantumState, MemoryArray | None]:
    """Validate call arguments; fold quantum memory in. Returns (state, classical memory or None)."""
    if mode not in MODES:
        raise ValueError(f"mode must be 'copy' or 'swap', got {mode!r}")
    check_compatible(state, memory)
    if memory is not None and memory.is_quantum:
        state = fold_memory(state, memory)
        memory = None
    if mode == SWAP and not state.quantum_memory:
        raise ValueError("swap mode needs quantum memory (cells must live inside the state)")
    return state, memory


def check_address_state(state: QuantumState) -> None:
    for c, _ in state:
        if c.bus is not None:
            raise ValueError("address state must not contain a bus")
        if c.qutrits.count(WAIT) != len(c.qutrits):
            raise ValueError("address state must have every node register in WAIT")


def ideal_qram_oracle(state: QuantumState, memory: MemoryArray | None, mode: str = COPY) -> QuantumState:
    """Sum_k alpha_k |k>|a> -> sum_k alpha_k |k>|a xor f_k> (copy) or A <-> cell k (swap)."""
    state, memory = prepare(state, memory, mode)
    check_address_state(state)

    def apply(c: Configuration) -> Configuration:
        k = c.address()
        if memory is not None:
            return c._replace(a=c.a ^ memory.cells[k])
        if mode == COPY:
            return c._replace(a=c.a ^ c.memory[k])
        cells = list(c.memory)
        cells[k], a = c.a, cells[k]
        return c._replace(memory=tuple(cells), a=a)

    return state.map_basis(apply)
