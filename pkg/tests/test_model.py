"""Tests for the assembled network: density evaluation against closed-form
and naive oracles, ancestral sampling, and the per-node report."""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from semibn.dataset import ContinuousData
from semibn.graph import Dag, NodeType
from semibn.model import fit_model
from tests.oracles import (
    joint_gaussian_of_lg_model,
    naive_ckde_network_loglik,
    random_dag,
)


def _random_data(rng, n_rows=150, n_vars=4):
    values = rng.normal(size=(n_rows, n_vars))
    # mild couplings so fitted structures are not all noise
    values[:, 1] += 0.8 * values[:, 0]
    values[:, 3] += np.sin(values[:, 2])
    return ContinuousData(tuple("wxyz"[:n_vars]), values)


class TestAllLinearGaussianEqualsJointNormal:
    """A network of linear Gaussian nodes is one multivariate normal; the
    factorized log-density must match it node for node and row for row."""

    def test_random_structures(self):
        rng = np.random.default_rng(20)
        for trial in range(5):
            data = _random_data(rng)
            dag = random_dag(rng, 4, p_arc=0.5)
            model = fit_model(data, dag, (NodeType.LG,) * 4)
            mean, cov = joint_gaussian_of_lg_model(model)
            expected = multivariate_normal(mean=mean, cov=cov).logpdf(data.values)
            np.testing.assert_allclose(
                model.row_loglik(data), expected, rtol=0, atol=1e-8
            )


class TestAllKernelEqualsNaiveEvaluator:
    def test_random_structures(self):
        rng = np.random.default_rng(21)
        for trial in range(3):
            data = _random_data(rng, n_rows=60)
            dag = random_dag(rng, 4, p_arc=0.5)
            model = fit_model(data, dag, (NodeType.CKDE,) * 4)
            expected = naive_ckde_network_loglik(model, data.values)
            np.testing.assert_allclose(
                model.row_loglik(data), expected, rtol=0, atol=1e-8
            )


class TestSampling:
    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(22)
        data = _random_data(rng)
        model = fit_model(
            data, Dag(4, [(0, 1), (2, 3)]), ("lg", "ckde", "ckde", "lg")
        )
        first = model.sample(64, seed=9)
        second = model.sample(64, seed=9)
        other = model.sample(64, seed=10)
        np.testing.assert_array_equal(first.values, second.values)
        assert not np.array_equal(first.values, other.values)

    def test_lg_chain_recovers_moments(self):
        rng = np.random.default_rng(23)
        n = 4000
        values = np.zeros((n, 2))
        values[:, 0] = rng.normal(1.0, 1.0, n)
        values[:, 1] = 2.0 * values[:, 0] + rng.normal(0.0, 0.5, n)
        data = ContinuousData(("x", "y"), values)
        model = fit_model(data, Dag(2, [(0, 1)]), ("lg", "lg"))
        draw = model.sample(40000, seed=1).values
        np.testing.assert_allclose(draw[:, 0].mean(), 1.0, atol=0.05)
        np.testing.assert_allclose(draw[:, 1].mean(), 2.0, atol=0.1)
        np.testing.assert_allclose(
            np.corrcoef(draw.T)[0, 1], np.corrcoef(values.T)[0, 1], atol=0.01
        )

    def test_root_kde_moments_are_smoothed_bootstrap(self):
        """Uniform center choice plus kernel noise: the draw's mean matches
        the kernel mean and its variance gains exactly the bandwidth."""
        rng = np.random.default_rng(24)
        train = ContinuousData(("x",), rng.normal(2.0, 1.5, (300, 1)))
        model = fit_model(train, Dag(1), ("ckde",))
        kernels = model.cpds[0].kernels[:, 0]
        h = model.cpds[0].bandwidth[0, 0]
        draw = model.sample(200000, seed=2).values[:, 0]
        np.testing.assert_allclose(draw.mean(), kernels.mean(), atol=0.02)
        np.testing.assert_allclose(
            draw.var(), kernels.var() + h, rtol=0.02
        )

    def test_ckde_child_tracks_parent(self):
        rng = np.random.default_rng(25)
        n = 1500
        values = np.zeros((n, 2))
        values[:, 0] = rng.normal(0.0, 1.0, n)
        values[:, 1] = values[:, 0] + rng.normal(0.0, 0.3, n)
        data = ContinuousData(("p", "c"), values)
        model = fit_model(data, Dag(2, [(0, 1)]), ("ckde", "ckde"))
        draw = model.sample(30000, seed=3).values
        assert np.corrcoef(draw.T)[0, 1] > 0.8

    def test_sampled_columns_follow_node_order(self):
        """Ancestral order is topological even when arcs point low-index."""
        rng = np.random.default_rng(26)
        n = 600
        values = np.zeros((n, 2))
        values[:, 1] = rng.normal(5.0, 1.0, n)
        values[:, 0] = 3.0 * values[:, 1] + rng.normal(0.0, 0.1, n)
        data = ContinuousData(("child", "root"), values)
        model = fit_model(data, Dag(2, [(1, 0)]), ("lg", "lg"))
        draw = model.sample(5000, seed=4).values
        np.testing.assert_allclose(draw[:, 1].mean(), 5.0, atol=0.1)
        np.testing.assert_allclose(draw[:, 0].mean(), 15.0, atol=0.3)


class TestLoglikReport:
    def test_attributions_sum_to_total(self):
        rng = np.random.default_rng(27)
        data = _random_data(rng)
        model = fit_model(
            data, Dag(4, [(0, 1), (1, 3)]), ("lg", "ckde", "lg", "ckde")
        )
        report = model.loglik_report(data)
        assert report.total == report.by_node.sum()
        assert report.neg_inf_rows == 0
        np.testing.assert_allclose(report.total, model.loglik(data))

    def test_neg_inf_rows_counted(self):
        rng = np.random.default_rng(28)
        train = _random_data(rng, n_rows=40)
        model = fit_model(train, Dag(4, [(0, 1)]), ("lg", "ckde", "lg", "lg"))
        probe = train.values.copy()
        probe[0] = 1e200  # underflows the kernel node
        report = model.loglik_report(ContinuousData(train.names, probe))
        assert report.neg_inf_rows == 1
        assert np.isneginf(report.total)

    def test_mismatched_component_counts_rejected(self):
        rng = np.random.default_rng(29)
        data = _random_data(rng)
        model = fit_model(data, Dag(4), ("lg",) * 4)
        from semibn.model import SemiparametricBn

        with pytest.raises(ValueError):
            SemiparametricBn(data.names, Dag(4), ("lg",) * 3, model.cpds)
