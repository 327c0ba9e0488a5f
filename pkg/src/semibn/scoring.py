"""Structure scores: cross-validated log-likelihood, held-out validation,
and penalized-likelihood (BIC) for the all-Gaussian baseline.

Scores decompose over nodes, so the search keeps a cache of per-node local
scores plus one-sided deltas (add one parent, drop one parent, switch the
node's family). Fold and split membership is frozen up front from a seed,
which keeps every candidate comparison on identical data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cpds import (
    LOG_2PI,
    VARIANCE_FLOOR,
    fit_cpd,
)
from .dataset import ContinuousData
from .errors import FoldFitFailure, SemibnError, SingularDesign
from .graph import Dag, NodeType


@dataclass(frozen=True)
class FoldAssignment:
    """Round-robin deal of shuffled row indices into k folds."""

    n_rows: int
    k: int
    seed: int
    labels: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 folds")
        if self.n_rows < self.k:
            raise ValueError(f"{self.n_rows} rows cannot fill {self.k} folds")
        order = np.random.default_rng(self.seed).permutation(self.n_rows)
        labels = np.empty(self.n_rows, dtype=int)
        labels[order] = np.arange(self.n_rows) % self.k
        object.__setattr__(self, "labels", labels)

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.labels == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.labels != fold)


@dataclass(frozen=True)
class TrainValidationSplit:
    """Seeded shuffle split into training and held-out validation rows."""

    n_rows: int
    validation_fraction: float = 0.2
    seed: int = 0
    train_rows: np.ndarray = field(repr=False, default=None)
    validation_rows: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation fraction must lie in (0, 1)")
        n_val = int(round(self.n_rows * self.validation_fraction))
        if n_val < 1 or self.n_rows - n_val < 1:
            raise ValueError("both split parts need at least one row")
        order = np.random.default_rng(self.seed).permutation(self.n_rows)
        object.__setattr__(self, "validation_rows", np.sort(order[:n_val]))
        object.__setattr__(self, "train_rows", np.sort(order[n_val:]))


_FIT_ERRORS = (SemibnError, np.linalg.LinAlgError, ValueError)


class CvScorer:
    """Per-node k-fold cross-validated log-likelihood with memoization.

    A configuration whose fold fit fails scores -inf instead of aborting,
    so the search simply never prefers it.
    """

    def __init__(self, values: np.ndarray, folds: FoldAssignment):
        if values.shape[0] != folds.n_rows:
            raise ValueError("fold assignment does not match data")
        self.values = values
        self.folds = folds
        self.failures: list[FoldFitFailure] = []
        self._memo: dict = {}
        self._slices = [
            (values[folds.train_rows(m)], values[folds.test_rows(m)])
            for m in range(folds.k)
        ]

    def local_score(
        self, node: int, parents: tuple[int, ...], node_type: NodeType
    ) -> float:
        key = (node, tuple(sorted(parents)), node_type)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        score = 0.0
        for fold, (train, test) in enumerate(self._slices):
            try:
                cpd = fit_cpd(train, node, key[1], node_type)
            except _FIT_ERRORS as exc:
                self.failures.append(FoldFitFailure(fold, exc))
                score = float("-inf")
                break
            score += float(cpd.logpdf(test).sum())
        self._memo[key] = score
        return score


class ValidationScorer:
    """Per-node log-likelihood on held-out rows, fit on the training rows."""

    def __init__(self, train_values: np.ndarray, validation_values: np.ndarray):
        self.train_values = train_values
        self.validation_values = validation_values
        self._memo: dict = {}

    def local_score(
        self, node: int, parents: tuple[int, ...], node_type: NodeType
    ) -> float:
        key = (node, tuple(sorted(parents)), node_type)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        try:
            cpd = fit_cpd(self.train_values, node, key[1], node_type)
            score = float(cpd.logpdf(self.validation_values).sum())
        except _FIT_ERRORS:
            score = float("-inf")
        self._memo[key] = score
        return score

    def total(self, dag: Dag, node_types) -> float:
        return sum(
            self.local_score(i, dag.parents(i), node_types[i])
            for i in range(dag.n_nodes)
        )


class BicScorer:
    """Gaussian BIC from a cached cross-moment matrix.

    The augmented moment matrix [1 X]'[1 X] is computed once; any
    (node, parents) regression then reduces to solving a small subsystem,
    which is what makes the all-Gaussian baseline fast.
    """

    def __init__(self, values: np.ndarray):
        n_rows = values.shape[0]
        design = np.column_stack([np.ones(n_rows), values])
        self.moments = design.T @ design
        self.n_rows = n_rows
        self._memo: dict = {}

    def local_score(
        self, node: int, parents: tuple[int, ...], node_type: NodeType = NodeType.LG
    ) -> float:
        if node_type is not NodeType.LG:
            raise SingularDesign("BIC score is defined for linear Gaussian nodes")
        key = (node, tuple(sorted(parents)))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        idx = [0] + [p + 1 for p in key[1]]
        a = self.moments[np.ix_(idx, idx)]
        b = self.moments[idx, node + 1]
        try:
            beta = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            self._memo[key] = float("-inf")
            return float("-inf")
        rss = self.moments[node + 1, node + 1] - beta @ b
        variance = max(float(rss) / self.n_rows, VARIANCE_FLOOR)
        loglik = -0.5 * self.n_rows * (LOG_2PI + np.log(variance) + 1.0)
        penalty = 0.5 * np.log(self.n_rows) * (len(key[1]) + 2)
        score = float(loglik - penalty)
        self._memo[key] = score
        return score


class ScoreCache:
    """Current local scores plus one-sided deltas for a search state.

    Stored entries, all relative to the live (dag, types) state:
      local[i]                   score of node i as configured
      add_delta[(s, d)]          gain from giving d the extra parent s
      remove_delta[(s, d)]       gain from dropping parent s of d
      type_delta[i]              gain from switching node i's family
    Arc flips are evaluated as remove_delta[(s, d)] + add_delta[(d, s)],
    so refreshing the entries rooted at the touched nodes keeps every
    operator delta exact.
    """

    def __init__(self, scorer, dag: Dag, node_types: list, allow_types: bool = True):
        self.scorer = scorer
        self.dag = dag
        self.node_types = node_types
        self.allow_types = allow_types
        self.local = np.zeros(dag.n_nodes)
        self.add_delta: dict = {}
        self.remove_delta: dict = {}
        self.type_delta: dict = {}
        for node in range(dag.n_nodes):
            self.rebuild_node(node)

    def rebuild_node(self, node: int) -> None:
        dag = self.dag
        parents = dag.parents(node)
        node_type = self.node_types[node]
        local = self.scorer.local_score(node, parents, node_type)
        self.local[node] = local
        parent_set = set(parents)
        for other in range(dag.n_nodes):
            if other == node:
                continue
            if other in parent_set:
                smaller = tuple(p for p in parents if p != other)
                self.remove_delta[(other, node)] = (
                    self.scorer.local_score(node, smaller, node_type) - local
                )
                self.add_delta.pop((other, node), None)
            else:
                larger = tuple(sorted(parents + (other,)))
                self.add_delta[(other, node)] = (
                    self.scorer.local_score(node, larger, node_type) - local
                )
                self.remove_delta.pop((other, node), None)
        if self.allow_types:
            self.type_delta[node] = (
                self.scorer.local_score(node, parents, node_type.other()) - local
            )

    def total(self) -> float:
        return float(self.local.sum())

    def refresh(self, op) -> None:
        """Recompute the entries invalidated by an already-applied operator."""
        for node in op.touched_nodes():
            self.rebuild_node(node)
