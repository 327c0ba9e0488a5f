"""Greedy structure search with tabu, patience, and validation snapshots.

Each pass scores every legal operator against the pass-start structure
using the cached deltas, commits the best one that clears the epsilon
screen, and then checks the held-out validation score: an improvement
snapshots the structure and clears the tabu set, otherwise the operator
joins the tabu set and the patience counter grows. The committed operator
stays in the working structure either way; the best snapshot is what the
search finally returns.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import ContinuousData
from .graph import Dag, NodeType, parse_type_map
from .model import SemiparametricBn, fit_model
from .scoring import (
    BicScorer,
    CvScorer,
    FoldAssignment,
    ScoreCache,
    TrainValidationSplit,
    ValidationScorer,
)


class OpKind(enum.IntEnum):
    ADD_ARC = 0
    REMOVE_ARC = 1
    FLIP_ARC = 2
    TYPE_CHANGE = 3


@dataclass(frozen=True, order=True)
class Operator:
    """One structure move; TYPE_CHANGE stores the node in both slots."""

    kind: OpKind
    source: int
    dest: int

    @staticmethod
    def add(s: int, d: int) -> "Operator":
        return Operator(OpKind.ADD_ARC, s, d)

    @staticmethod
    def remove(s: int, d: int) -> "Operator":
        return Operator(OpKind.REMOVE_ARC, s, d)

    @staticmethod
    def flip(s: int, d: int) -> "Operator":
        return Operator(OpKind.FLIP_ARC, s, d)

    @staticmethod
    def type_change(node: int) -> "Operator":
        return Operator(OpKind.TYPE_CHANGE, node, node)

    def inverse(self) -> "Operator":
        if self.kind is OpKind.ADD_ARC:
            return Operator(OpKind.REMOVE_ARC, self.source, self.dest)
        if self.kind is OpKind.REMOVE_ARC:
            return Operator(OpKind.ADD_ARC, self.source, self.dest)
        if self.kind is OpKind.FLIP_ARC:
            return Operator(OpKind.FLIP_ARC, self.dest, self.source)
        return self

    def touched_nodes(self) -> tuple[int, ...]:
        if self.kind is OpKind.FLIP_ARC:
            return (self.source, self.dest)
        if self.kind is OpKind.TYPE_CHANGE:
            return (self.source,)
        return (self.dest,)

    def apply(self, dag: Dag, node_types: list) -> None:
        if self.kind is OpKind.ADD_ARC:
            dag.add_arc(self.source, self.dest)
        elif self.kind is OpKind.REMOVE_ARC:
            dag.remove_arc(self.source, self.dest)
        elif self.kind is OpKind.FLIP_ARC:
            dag.flip_arc(self.source, self.dest)
        else:
            node_types[self.source] = node_types[self.source].other()

    def describe(self, names) -> str:
        if self.kind is OpKind.TYPE_CHANGE:
            return f"type-change({names[self.source]})"
        verb = {
            OpKind.ADD_ARC: "add",
            OpKind.REMOVE_ARC: "remove",
            OpKind.FLIP_ARC: "flip",
        }[self.kind]
        return f"{verb}({names[self.source]} -> {names[self.dest]})"


def enumerate_operators(
    dag: Dag,
    tabu: set[Operator],
    arc_ops: bool = True,
    type_ops: bool = True,
) -> list[Operator]:
    """All legal moves in canonical order, minus tabu-undoing ones."""
    forbidden = {member.inverse() for member in tabu}
    out: list[Operator] = []
    if arc_ops:
        for s in range(dag.n_nodes):
            for d in range(dag.n_nodes):
                if s != d and dag.can_add(s, d):
                    out.append(Operator.add(s, d))
        for s, d in dag.arcs():
            out.append(Operator.remove(s, d))
        for s, d in dag.arcs():
            if dag.can_flip(s, d):
                out.append(Operator.flip(s, d))
    if type_ops:
        for node in range(dag.n_nodes):
            out.append(Operator.type_change(node))
    return sorted(op for op in out if op not in forbidden)


@dataclass
class IterationRecord:
    iteration: int
    operator: Operator | None
    cv_before: float
    cv_after: float
    validation: float
    improved: bool
    patience_used: int

    def to_json(self, names) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "operator": None
                if self.operator is None
                else self.operator.describe(names),
                "cv_before": self.cv_before,
                "cv_after": self.cv_after,
                "validation": self.validation,
                "improved": self.improved,
                "patience_used": self.patience_used,
            }
        )


@dataclass
class HcConfig:
    folds: int = 10
    patience: int = 5
    epsilon: float = 0.0
    validation_fraction: float = 0.2
    seed: int = 0
    start_types: object = "ckde"
    refit_full_data: bool = False


@dataclass
class SearchResult:
    model: SemiparametricBn
    dag: Dag
    node_types: tuple[NodeType, ...]
    trace: list[IterationRecord] = field(default_factory=list)
    split: TrainValidationSplit | None = None


def write_trace(trace, names, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        for record in trace:
            fh.write(record.to_json(names) + "\n")


def _climb(
    scorer,
    val_scorer: ValidationScorer,
    dag: Dag,
    node_types: list,
    patience: int,
    epsilon: float,
    arc_ops: bool,
    type_ops: bool,
):
    """Run the operator loop in place; returns (best_dag, best_types, trace)."""
    cache = ScoreCache(scorer, dag, node_types, allow_types=type_ops)
    best_dag = dag.copy()
    best_types = tuple(node_types)
    best_val = val_scorer.total(dag, node_types)
    tabu: set[Operator] = set()
    trace: list[IterationRecord] = []
    p = 0
    iteration = 0
    while True:
        iteration += 1
        cv_before = cache.total()
        chosen = None
        best_delta = 0.0
        for op in enumerate_operators(dag, tabu, arc_ops, type_ops):
            if op.kind is OpKind.ADD_ARC:
                delta = cache.add_delta[(op.source, op.dest)]
            elif op.kind is OpKind.REMOVE_ARC:
                delta = cache.remove_delta[(op.source, op.dest)]
            elif op.kind is OpKind.FLIP_ARC:
                delta = cache.remove_delta[(op.source, op.dest)] + cache.add_delta[
                    (op.dest, op.source)
                ]
            else:
                delta = cache.type_delta[op.source]
            if delta > epsilon and delta > best_delta:
                chosen, best_delta = op, delta
        if chosen is None:
            # no move clears the screen; further passes would repeat verbatim
            trace.append(
                IterationRecord(
                    iteration, None, cv_before, cv_before, best_val, False, p
                )
            )
            break
        chosen.apply(dag, node_types)
        validation = val_scorer.total(dag, node_types)
        improved = validation > best_val
        if improved:
            best_dag = dag.copy()
            best_types = tuple(node_types)
            best_val = validation
            tabu.clear()
            p = 0
        else:
            tabu.add(chosen)
            p += 1
        cache.refresh(chosen)
        trace.append(
            IterationRecord(
                iteration,
                chosen,
                cv_before,
                cv_before + best_delta,
                validation,
                improved,
                p,
            )
        )
        if p >= patience:
            break
    return best_dag, best_types, trace


def _prepare(data: ContinuousData, config: HcConfig):
    split = TrainValidationSplit(
        data.n_rows, config.validation_fraction, config.seed
    )
    train = data.values[split.train_rows]
    val = data.values[split.validation_rows]
    return split, train, val


def _finish(
    data: ContinuousData,
    config: HcConfig,
    split: TrainValidationSplit,
    best_dag: Dag,
    best_types,
    trace,
) -> SearchResult:
    rows = None if config.refit_full_data else split.train_rows
    model = fit_model(data, best_dag, best_types, rows=rows)
    return SearchResult(model, best_dag, tuple(best_types), trace, split)


def hc_learn(
    data: ContinuousData,
    config: HcConfig | None = None,
    start_dag: Dag | None = None,
) -> SearchResult:
    """Full search over arcs and node families with the CV score."""
    config = config or HcConfig()
    split, train, val = _prepare(data, config)
    dag = start_dag.copy() if start_dag else Dag(data.n_vars)
    node_types = list(parse_type_map(data.n_vars, config.start_types))
    folds = FoldAssignment(train.shape[0], config.folds, config.seed)
    scorer = CvScorer(train, folds)
    val_scorer = ValidationScorer(train, val)
    best_dag, best_types, trace = _climb(
        scorer,
        val_scorer,
        dag,
        node_types,
        config.patience,
        config.epsilon,
        arc_ops=True,
        type_ops=True,
    )
    return _finish(data, config, split, best_dag, best_types, trace)


def hc_learn_kdebn(
    data: ContinuousData,
    config: HcConfig | None = None,
    start_dag: Dag | None = None,
) -> SearchResult:
    """Arc-only search with every node kept as a kernel density estimate."""
    config = config or HcConfig()
    split, train, val = _prepare(data, config)
    dag = start_dag.copy() if start_dag else Dag(data.n_vars)
    node_types = list(parse_type_map(data.n_vars, "ckde"))
    folds = FoldAssignment(train.shape[0], config.folds, config.seed)
    scorer = CvScorer(train, folds)
    val_scorer = ValidationScorer(train, val)
    best_dag, best_types, trace = _climb(
        scorer,
        val_scorer,
        dag,
        node_types,
        config.patience,
        config.epsilon,
        arc_ops=True,
        type_ops=False,
    )
    return _finish(data, config, split, best_dag, best_types, trace)


def hc_learn_gbn_bic(
    data: ContinuousData,
    config: HcConfig | None = None,
    start_dag: Dag | None = None,
) -> SearchResult:
    """Arc-only search over linear Gaussian nodes scored by BIC."""
    config = config or HcConfig()
    split, train, val = _prepare(data, config)
    dag = start_dag.copy() if start_dag else Dag(data.n_vars)
    node_types = list(parse_type_map(data.n_vars, "lg"))
    scorer = BicScorer(train)
    val_scorer = ValidationScorer(train, val)
    best_dag, best_types, trace = _climb(
        scorer,
        val_scorer,
        dag,
        node_types,
        config.patience,
        config.epsilon,
        arc_ops=True,
        type_ops=False,
    )
    return _finish(data, config, split, best_dag, best_types, trace)


def hc_type_change_only(
    data: ContinuousData,
    dag: Dag,
    config: HcConfig | None = None,
) -> tuple[tuple[NodeType, ...], list[IterationRecord]]:
    """Family assignment for a fixed DAG; arcs are provably untouched."""
    config = config or HcConfig()
    _, train, val = _prepare(data, config)
    working = dag.copy()
    node_types = list(parse_type_map(data.n_vars, config.start_types))
    folds = FoldAssignment(train.shape[0], config.folds, config.seed)
    scorer = CvScorer(train, folds)
    val_scorer = ValidationScorer(train, val)
    _, best_types, trace = _climb(
        scorer,
        val_scorer,
        working,
        node_types,
        config.patience,
        config.epsilon,
        arc_ops=False,
        type_ops=True,
    )
    assert working.arcs() == dag.arcs()
    return best_types, trace
