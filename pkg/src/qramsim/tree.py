"""Binary-tree topology shared by every addressing architecture.

Nodes are numbered level-order (root = 0, children of ``v`` are ``2v+1`` and
``2v+2``).  Leaves are numbered 0 .. 2**n - 1 and coincide with memory
addresses.  Address bit ``k_0`` is the most significant bit of ``k`` and is
the routing decision taken at the root; bit value 0 routes "up", 1 routes
"down".
"""
from __future__ import annotations

from dataclasses import dataclass

UP, DOWN = 0, 1


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"address width n must be an integer >= 1, got {n!r}")


def _check_address(n: int, k: int) -> None:
    _check_n(n)
    if not 0 <= k < 2**n:
        raise ValueError(f"address {k} out of range for n={n} (0 <= k < {2**n})")


def node_count(n: int) -> int:
    _check_n(n)
    return 2**n - 1


def leaf_count(n: int) -> int:
    _check_n(n)
    return 2**n


def level_of(node: int) -> int:
    return (node + 1).bit_length() - 1


def first_node(level: int) -> int:
    return 2**level - 1


def nodes_at_level(level: int) -> range:
    return range(2**level - 1, 2 ** (level + 1) - 1)


def child(node: int, bit: int) -> int:
    """Level-order id of the child reached by routing ``bit`` at ``node``."""
    return 2 * node + 1 + bit


def parent(node: int) -> int:
    if node <= 0:
        raise ValueError("the root has no parent")
    return (node - 1) // 2


def address_bits(n: int, k: int) -> tuple[int, ...]:
    """Bits k_0 .. k_{n-1} of ``k``, most significant first."""
    _check_address(n, k)
    return tuple((k >> (n - 1 - j)) & 1 for j in range(n))


def bits_to_address(bits) -> int:
    k = 0
    for b in bits:
        k = (k << 1) | b
    return k


def leaf_of(n: int, node: int, bit: int) -> int:
    """Leaf reached by routing ``bit`` at a last-level ``node``."""
    return child(node, bit) - (2**n - 1)


def path_for_address(n: int, k: int) -> tuple[list[int], list[int]]:
    """Routing directions and root-to-leaf node ids for address ``k``.

    >>> path_for_address(3, 6)
    ([1, 1, 0], [0, 2, 6])
    """
    directions = list(address_bits(n, k))
    nodes = []
    v = 0
    for bit in directions:
        nodes.append(v)
        v = child(v, bit)
    return directions, nodes


def follow(n: int, directions) -> int:
    """Leaf reached from the root by taking ``directions`` at each level."""
    v = 0
    for bit in directions:
        v = child(v, bit)
    return v - (2**n - 1)


def divergence_node(n: int, k1: int, k2: int) -> int | None:
    """Node at which the paths to ``k1`` and ``k2`` split (None if equal)."""
    if k1 == k2:
        return None
    _, nodes = path_for_address(n, k1)
    depth = n - (k1 ^ k2).bit_length()
    return nodes[depth]


@dataclass(frozen=True)
class TreeTopology:
    n: int

    def __post_init__(self):
        _check_n(self.n)

    @property
    def node_count(self) -> int:
        return 2**self.n - 1

    @property
    def leaf_count(self) -> int:
        return 2**self.n

    def child(self, node: int, bit: int) -> int:
        return child(node, bit)

    def parent(self, node: int) -> int:
        return parent(node)

    def level(self, node: int) -> int:
        return level_of(node)

    def path(self, k: int) -> tuple[list[int], list[int]]:
        return path_for_address(self.n, k)

    def is_node(self, node: int) -> bool:
        return 0 <= node < self.node_count
