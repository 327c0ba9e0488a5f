"""Conditional probability distributions for continuous nodes.

Two families are supported: linear Gaussian (ordinary least squares with a
maximum-likelihood noise variance) and conditional kernel density estimates
(a Gaussian-kernel joint KDE divided by the KDE of the parents, sharing the
corresponding block of the joint bandwidth so the conditional integrates
to one).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .errors import DegenerateVarianceWarning, SingularCovariance, SingularDesign

VARIANCE_FLOOR = 1e-12
RIDGE_SCALE = 1e-8
LOG_2PI = np.log(2.0 * np.pi)

# cap on query-kernel distance matrix cells held at once
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class LinearGaussian:
    """x_node = intercept + coefs . x_parents + Normal(0, variance) noise."""

    node: int
    parents: tuple[int, ...]
    intercept: float
    coefs: np.ndarray = field(repr=False)
    variance: float = 1.0

    def mean(self, values: np.ndarray) -> np.ndarray:
        if not self.parents:
            return np.full(values.shape[0], self.intercept)
        return self.intercept + values[:, self.parents] @ self.coefs

    def logpdf(self, values: np.ndarray) -> np.ndarray:
        resid = values[:, self.node] - self.mean(values)
        return -0.5 * (LOG_2PI + np.log(self.variance)) - resid**2 / (
            2.0 * self.variance
        )

    @property
    def n_params(self) -> int:
        return len(self.parents) + 2


def fit_linear_gaussian(
    values: np.ndarray, node: int, parents: tuple[int, ...]
) -> LinearGaussian:
    """Least-squares fit of node on parents with ML residual variance.

    Variance is the residual sum of squares over N (not N - p - 1) and is
    clamped at VARIANCE_FLOOR with a DegenerateVarianceWarning when the
    residuals collapse.
    """
    n_rows = values.shape[0]
    p = len(parents)
    if n_rows <= p + 1:
        raise SingularDesign(
            f"node {node}: {n_rows} rows cannot identify {p + 1} coefficients"
        )
    design = np.column_stack([np.ones(n_rows), values[:, parents]])
    y = values[:, node]
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < p + 1:
        raise SingularDesign(f"node {node}: design matrix is rank deficient")
    resid = y - design @ beta
    variance = float(resid @ resid) / n_rows
    if variance < VARIANCE_FLOOR:
        warnings.warn(
            f"node {node}: residual variance {variance:.3e} clamped to floor",
            DegenerateVarianceWarning,
            stacklevel=2,
        )
        variance = VARIANCE_FLOOR
    return LinearGaussian(node, tuple(parents), float(beta[0]), beta[1:], variance)


def normal_reference_bandwidth(block: np.ndarray) -> np.ndarray:
    """Bandwidth M**(-2/(d+4)) * sample covariance for an (M, d) block.

    A covariance that fails a Cholesky factorization gets one ridge repair
    of RIDGE_SCALE * trace/d on the diagonal; if that cannot restore
    positive definiteness the block is rejected.
    """
    block = np.atleast_2d(np.asarray(block, dtype=float))
    m_rows, d = block.shape
    if m_rows < 2:
        raise SingularCovariance(f"{m_rows} rows cannot form a covariance")
    cov = np.cov(block, rowvar=False, ddof=1).reshape(d, d)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        ridge = RIDGE_SCALE * np.trace(cov) / d
        if ridge <= 0.0:
            raise SingularCovariance("covariance has no positive mass") from None
        cov = cov + ridge * np.eye(d)
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise SingularCovariance(
                "covariance not positive definite after ridge repair"
            ) from None
    return m_rows ** (-2.0 / (d + 4)) * cov


class GaussianKde:
    """Gaussian-kernel density over fixed kernel centers with bandwidth H.

    log f(x) = logsumexp_j(-0.5 * mahalanobis(x, x_j)) - log M
               - d/2 log(2 pi) - 1/2 log|H|
    evaluated by whitening both queries and kernels with the Cholesky
    factor of H, in query chunks to bound memory.
    """

    def __init__(self, kernels: np.ndarray, bandwidth: np.ndarray):
        kernels = np.asarray(kernels, dtype=float)
        if kernels.ndim == 1:
            kernels = kernels[:, None]
        bandwidth = np.atleast_2d(np.asarray(bandwidth, dtype=float))
        m_rows, d = kernels.shape
        if bandwidth.shape != (d, d):
            raise ValueError(f"bandwidth {bandwidth.shape} for dimension {d}")
        try:
            chol = np.linalg.cholesky(bandwidth)
        except np.linalg.LinAlgError:
            raise SingularCovariance("bandwidth not positive definite") from None
        self.kernels = kernels
        self.bandwidth = bandwidth
        self._chol = chol
        self.log_det = 2.0 * float(np.log(np.diag(chol)).sum())
        self._white = solve_triangular(chol, kernels.T, lower=True).T
        self._log_norm = -np.log(m_rows) - 0.5 * d * LOG_2PI - 0.5 * self.log_det

    @property
    def n_kernels(self) -> int:
        return self.kernels.shape[0]

    @property
    def dim(self) -> int:
        return self.kernels.shape[1]

    def _whiten(self, queries: np.ndarray) -> np.ndarray:
        queries = np.asarray(queries, dtype=float)
        if queries.ndim == 1:
            queries = queries[:, None]
        return solve_triangular(self._chol, queries.T, lower=True).T

    def logpdf(self, queries: np.ndarray) -> np.ndarray:
        wq = self._whiten(queries)
        n_q = wq.shape[0]
        step = max(1, _CHUNK_CELLS // max(1, self.n_kernels))
        out = np.empty(n_q)
        for lo in range(0, n_q, step):
            hi = min(n_q, lo + step)
            sq = cdist(wq[lo:hi], self._white, metric="sqeuclidean")
            out[lo:hi] = logsumexp(-0.5 * sq, axis=1)
        return out + self._log_norm


class ConditionalKde:
    """KDE of a node given its parents: joint KDE over (node, parents)
    divided by the marginal KDE of the parents.

    The kernel block stores the child column first, then the parents in
    ascending index order; the marginal reuses the matching sub-block of
    the joint bandwidth, which is what makes the conditional integrate
    to one.
    """

    def __init__(
        self,
        node: int,
        parents: tuple[int, ...],
        kernels: np.ndarray,
        bandwidth: np.ndarray | None = None,
    ):
        kernels = np.asarray(kernels, dtype=float)
        if kernels.ndim == 1:
            kernels = kernels[:, None]
        if kernels.shape[1] != len(parents) + 1:
            raise ValueError("kernel block must be (child, parents) columns")
        if bandwidth is None:
            bandwidth = normal_reference_bandwidth(kernels)
        bandwidth = np.atleast_2d(np.asarray(bandwidth, dtype=float))
        self.node = node
        self.parents = tuple(parents)
        self.joint = GaussianKde(kernels, bandwidth)
        if parents:
            self.marginal = GaussianKde(kernels[:, 1:], bandwidth[1:, 1:])
        else:
            self.marginal = None

    @property
    def kernels(self) -> np.ndarray:
        return self.joint.kernels

    @property
    def bandwidth(self) -> np.ndarray:
        return self.joint.bandwidth

    def logpdf(self, values: np.ndarray) -> np.ndarray:
        cols = (self.node,) + self.parents
        block = values[:, cols]
        log_joint = self.joint.logpdf(block)
        if self.marginal is None:
            return log_joint
        log_marg = self.marginal.logpdf(block[:, 1:])
        with np.errstate(invalid="ignore"):
            out = log_joint - log_marg
        # both terms underflowing leaves the row undefined; call it -inf
        out[np.isneginf(log_marg)] = -np.inf
        return out

    def conditional_coefficients(self) -> tuple[np.ndarray, float]:
        """Regression vector and residual variance of the child given the
        parents inside one Gaussian kernel: (M^-1 nu, alpha - nu' M^-1 nu)."""
        h = self.joint.bandwidth
        if not self.parents:
            return np.zeros(0), float(h[0, 0])
        nu = h[1:, 0]
        reg = np.linalg.solve(h[1:, 1:], nu)
        var = float(h[0, 0] - nu @ reg)
        return reg, max(var, VARIANCE_FLOOR)


def fit_cpd(values: np.ndarray, node: int, parents: tuple[int, ...], node_type):
    """Fit the CPD family named by node_type on the given rows."""
    from .graph import NodeType

    if node_type is NodeType.LG:
        return fit_linear_gaussian(values, node, parents)
    block = values[:, (node,) + tuple(parents)]
    return ConditionalKde(node, tuple(parents), block)
