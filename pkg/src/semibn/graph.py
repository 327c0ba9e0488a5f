"""Directed acyclic graphs over integer node ids, plus node-type maps.

Every mutation re-checks acyclicity, so a Dag instance can never hold a
cycle. Parent sets are reported in ascending index order; that order also
fixes the column layout of kernel-density blocks downstream.
"""

from __future__ import annotations

import enum

from .errors import CycleError


class NodeType(enum.Enum):
    """Conditional distribution family assigned to a node."""

    LG = "lg"
    CKDE = "ckde"

    def other(self) -> "NodeType":
        return NodeType.CKDE if self is NodeType.LG else NodeType.LG


def parse_type_map(n_nodes: int, tags) -> tuple[NodeType, ...]:
    """Build a per-node type tuple from 'lg', 'ckde', or an explicit sequence."""
    if tags == "lg" or tags is NodeType.LG:
        return (NodeType.LG,) * n_nodes
    if tags == "ckde" or tags is NodeType.CKDE:
        return (NodeType.CKDE,) * n_nodes
    types = tuple(NodeType(t) if not isinstance(t, NodeType) else t for t in tags)
    if len(types) != n_nodes:
        raise ValueError(f"{len(types)} types for {n_nodes} nodes")
    return types


class Dag:
    """A DAG on nodes 0..n-1 with arc-level mutation and cycle rejection."""

    def __init__(self, n_nodes: int, arcs=()):
        if n_nodes < 1:
            raise ValueError("need at least one node")
        self.n_nodes = n_nodes
        self._parents = [set() for _ in range(n_nodes)]
        self._children = [set() for _ in range(n_nodes)]
        for s, d in arcs:
            self.add_arc(s, d)

    def copy(self) -> "Dag":
        out = Dag(self.n_nodes)
        for i in range(self.n_nodes):
            out._parents[i] = set(self._parents[i])
            out._children[i] = set(self._children[i])
        return out

    def _check_node(self, i: int) -> None:
        if not (0 <= i < self.n_nodes):
            raise ValueError(f"node {i} out of range")

    def arcs(self) -> list[tuple[int, int]]:
        return sorted(
            (s, d) for d in range(self.n_nodes) for s in self._parents[d]
        )

    def parents(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self._parents[i]))

    def children(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self._children[i]))

    def has_arc(self, s: int, d: int) -> bool:
        return s in self._parents[d]

    def has_path(self, s: int, d: int) -> bool:
        """True if a directed path s -> ... -> d exists (including s == d)."""
        if s == d:
            return True
        stack = [s]
        seen = {s}
        while stack:
            u = stack.pop()
            for v in self._children[u]:
                if v == d:
                    return True
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    def add_arc(self, s: int, d: int) -> None:
        self._check_node(s)
        self._check_node(d)
        if s == d:
            raise CycleError(f"self loop {s} -> {d}")
        if s in self._parents[d]:
            raise ValueError(f"duplicate arc {s} -> {d}")
        if self.has_path(d, s):
            raise CycleError(f"adding {s} -> {d} would close a cycle")
        self._parents[d].add(s)
        self._children[s].add(d)

    def remove_arc(self, s: int, d: int) -> None:
        if s not in self._parents[d]:
            raise ValueError(f"no arc {s} -> {d}")
        self._parents[d].remove(s)
        self._children[s].remove(d)

    def flip_arc(self, s: int, d: int) -> None:
        """Replace s -> d with d -> s, rejecting flips that close a cycle."""
        if s not in self._parents[d]:
            raise ValueError(f"no arc {s} -> {d}")
        self.remove_arc(s, d)
        try:
            self.add_arc(d, s)
        except CycleError:
            self.add_arc(s, d)
            raise CycleError(f"flipping {s} -> {d} would close a cycle") from None

    def can_add(self, s: int, d: int) -> bool:
        return (
            s != d
            and s not in self._parents[d]
            and d not in self._parents[s]
            and not self.has_path(d, s)
        )

    def can_flip(self, s: int, d: int) -> bool:
        if s not in self._parents[d]:
            return False
        self.remove_arc(s, d)
        ok = not self.has_path(s, d)
        self._parents[d].add(s)
        self._children[s].add(d)
        return ok

    def topological_order(self) -> list[int]:
        indeg = [len(self._parents[i]) for i in range(self.n_nodes)]
        ready = sorted(i for i in range(self.n_nodes) if indeg[i] == 0)
        order = []
        while ready:
            u = ready.pop(0)
            order.append(u)
            for v in sorted(self._children[u]):
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
        if len(order) != self.n_nodes:
            raise CycleError("graph holds a directed cycle")
        return order

    def skeleton(self) -> set[frozenset[int]]:
        return {frozenset((s, d)) for s, d in self.arcs()}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dag)
            and self.n_nodes == other.n_nodes
            and self._parents == other._parents
        )

    def __repr__(self) -> str:
        return f"Dag(n_nodes={self.n_nodes}, arcs={self.arcs()})"
