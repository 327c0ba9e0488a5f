"""Structure and family-assignment distances between learned and
reference networks."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NodeMismatch
from .graph import Dag


def _check_nodes(g1: Dag, g2: Dag) -> None:
    if g1.n_nodes != g2.n_nodes:
        raise NodeMismatch(f"{g1.n_nodes} nodes vs {g2.n_nodes}")


def hamming_distance(g1: Dag, g2: Dag) -> int:
    """Edges present in exactly one skeleton, ignoring orientation."""
    _check_nodes(g1, g2)
    return len(g1.skeleton() ^ g2.skeleton())


def structural_hamming_distance(g1: Dag, g2: Dag) -> int:
    """Skeleton differences plus orientation disagreements on shared edges.

    Equals the fewest arc additions, removals, and reversals that turn g1
    into g2.
    """
    _check_nodes(g1, g2)
    skel1, skel2 = g1.skeleton(), g2.skeleton()
    flipped = 0
    for edge in skel1 & skel2:
        i, j = tuple(edge)
        if g1.has_arc(i, j) != g2.has_arc(i, j):
            flipped += 1
    return len(skel1 ^ skel2) + flipped


def type_hamming_distance(t1, t2) -> int:
    """Count of nodes whose family tags differ."""
    t1, t2 = tuple(t1), tuple(t2)
    if len(t1) != len(t2):
        raise NodeMismatch(f"{len(t1)} tags vs {len(t2)}")
    return sum(1 for a, b in zip(t1, t2) if a != b)


@dataclass(frozen=True)
class StructureDistanceReport:
    hmd: int
    shd: int
    thmd: int
    missing_edges: tuple[tuple[int, int], ...]
    extra_edges: tuple[tuple[int, int], ...]
    reversed_arcs: tuple[tuple[int, int], ...]
    type_mismatches: tuple[int, ...]

    def describe(self, names) -> str:
        lines = [
            "metric  value",
            f"hmd     {self.hmd}",
            f"shd     {self.shd}",
            f"thmd    {self.thmd}",
        ]
        fmt = lambda pairs: ", ".join(f"{names[s]}-{names[d]}" for s, d in pairs)
        if self.missing_edges:
            lines.append(f"missing edges: {fmt(self.missing_edges)}")
        if self.extra_edges:
            lines.append(f"extra edges: {fmt(self.extra_edges)}")
        if self.reversed_arcs:
            lines.append(f"reversed arcs: {fmt(self.reversed_arcs)}")
        if self.type_mismatches:
            lines.append(
                "type mismatches: "
                + ", ".join(names[i] for i in self.type_mismatches)
            )
        return "\n".join(lines)


def compare_structures(
    learned: Dag, learned_types, reference: Dag, reference_types
) -> StructureDistanceReport:
    """Distances of a learned (dag, types) pair from a reference pair.

    Edge listings are oriented relative to the reference: missing edges are
    in the reference only, extra edges in the learned structure only.
    """
    _check_nodes(learned, reference)
    skel_l, skel_r = learned.skeleton(), reference.skeleton()
    missing = sorted(
        (s, d) for s, d in reference.arcs() if frozenset((s, d)) not in skel_l
    )
    extra = sorted(
        (s, d) for s, d in learned.arcs() if frozenset((s, d)) not in skel_r
    )
    flipped = sorted(
        (s, d)
        for s, d in learned.arcs()
        if frozenset((s, d)) in skel_r and not reference.has_arc(s, d)
    )
    mismatches = tuple(
        i
        for i, (a, b) in enumerate(zip(tuple(learned_types), tuple(reference_types)))
        if a != b
    )
    return StructureDistanceReport(
        hamming_distance(learned, reference),
        structural_hamming_distance(learned, reference),
        type_hamming_distance(learned_types, reference_types),
        tuple(missing),
        tuple(extra),
        tuple(flipped),
        mismatches,
    )
