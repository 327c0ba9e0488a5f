"""Tests for the DAG container: legality checks, mutation, ordering."""

import numpy as np
import pytest

from semibn.errors import CycleError
from semibn.graph import Dag, NodeType, parse_type_map


class TestNodeType:
    def test_other_is_an_involution(self):
        assert NodeType.LG.other() is NodeType.CKDE
        assert NodeType.CKDE.other() is NodeType.LG

    def test_parse_type_map_forms(self):
        assert parse_type_map(3, "lg") == (NodeType.LG,) * 3
        assert parse_type_map(2, ("ckde", NodeType.LG)) == (
            NodeType.CKDE,
            NodeType.LG,
        )
        with pytest.raises(ValueError):
            parse_type_map(2, ("lg",))
        with pytest.raises(ValueError):
            parse_type_map(1, "gaussian")


class TestDagBasics:
    def test_arcs_and_parents_sorted(self):
        dag = Dag(4, [(2, 0), (1, 0), (0, 3)])
        assert dag.arcs() == [(0, 3), (1, 0), (2, 0)]
        assert dag.parents(0) == (1, 2)
        assert dag.parents(3) == (0,)

    def test_cycles_rejected(self):
        dag = Dag(3, [(0, 1), (1, 2)])
        with pytest.raises(CycleError):
            dag.add_arc(2, 0)
        with pytest.raises(CycleError):
            dag.add_arc(1, 1)

    def test_duplicate_arc_rejected(self):
        dag = Dag(2, [(0, 1)])
        with pytest.raises(ValueError):
            dag.add_arc(0, 1)

    def test_flip_restores_on_failure(self):
        # flipping 0->1 would close the cycle through 2
        dag = Dag(3, [(0, 1), (1, 2), (0, 2)])
        assert not dag.can_flip(0, 2)
        with pytest.raises(CycleError):
            dag.flip_arc(0, 2)
        assert dag.arcs() == [(0, 1), (0, 2), (1, 2)]

    def test_topological_order(self):
        dag = Dag(4, [(3, 1), (1, 0), (0, 2)])
        order = dag.topological_order()
        pos = {node: k for k, node in enumerate(order)}
        for s, d in dag.arcs():
            assert pos[s] < pos[d]

    def test_skeleton(self):
        dag = Dag(3, [(0, 1), (2, 1)])
        assert dag.skeleton() == {frozenset((0, 1)), frozenset((1, 2))}

    def test_copy_is_independent(self):
        dag = Dag(3, [(0, 1)])
        other = dag.copy()
        other.add_arc(1, 2)
        assert dag.arcs() == [(0, 1)]
        assert other.arcs() == [(0, 1), (1, 2)]


class TestRandomMutations:
    def test_legal_mutations_never_create_cycles(self):
        """Property: any mix of guarded add/remove/flip keeps a valid DAG."""
        rng = np.random.default_rng(11)
        dag = Dag(6)
        for _ in range(400):
            s, d = rng.integers(0, 6, 2)
            if s == d:
                continue
            move = rng.integers(0, 3)
            if move == 0 and dag.can_add(s, d):
                dag.add_arc(s, d)
            elif move == 1 and (s, d) in dag.arcs():
                dag.remove_arc(s, d)
            elif move == 2 and dag.can_flip(s, d):
                dag.flip_arc(s, d)
            order = dag.topological_order()  # raises if a cycle slipped in
            assert sorted(order) == list(range(6))

    def test_can_add_matches_actual_add(self):
        rng = np.random.default_rng(3)
        for trial in range(50):
            arcs = []
            dag = Dag(5)
            for _ in range(6):
                s, d = rng.integers(0, 5, 2)
                if s != d and dag.can_add(s, d):
                    dag.add_arc(s, d)
                    arcs.append((s, d))
            for s in range(5):
                for d in range(5):
                    fresh = Dag(5, arcs)
                    if fresh.can_add(s, d):
                        fresh.add_arc(s, d)
                        fresh.topological_order()
                    else:
                        with pytest.raises((CycleError, ValueError)):
                            fresh.add_arc(s, d)
