import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from holofit.estimators import LegendreNetworkRegressor, SparsePolynomialRegressor
from holofit.fem1d import DiscretizedSpace, default_diffusion, diffusion_target
from holofit.indexsets import hyperbolic_cross
from holofit.sampling import draw_samples


def sparse_poly_data(m=300, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (m, 3))
    y = 2.0 - 0.8 * math.sqrt(3) * X[:, 1] + 0.5 * 3.0 * X[:, 0] * X[:, 2]
    return X, y


class TestSklearnContract:
    def test_get_set_params_round_trip(self):
        est = SparsePolynomialRegressor(hci_order=5, lam=0.07, gamma=1e-7)
        params = est.get_params()
        est2 = SparsePolynomialRegressor().set_params(**params)
        assert est2.get_params() == params

    def test_clone(self):
        est = SparsePolynomialRegressor(hci_order=4, lam=0.1)
        c = clone(est)
        assert c.get_params() == est.get_params()

    def test_not_fitted_raises(self):
        with pytest.raises(NotFittedError):
            SparsePolynomialRegressor().predict(np.zeros((2, 2)))

    def test_network_estimator_params(self):
        est = LegendreNetworkRegressor(hci_order=3, delta=1e-3)
        assert clone(est).get_params() == est.get_params()


class TestSparsePolynomialRegressor:
    def test_recovers_sparse_polynomial(self):
        X, y = sparse_poly_data()
        est = SparsePolynomialRegressor(hci_order=4, lam=0.01, gamma=1e-8)
        est.fit(X, y)
        Xt, yt = sparse_poly_data(m=500, seed=1)
        assert np.max(np.abs(est.predict(Xt) - yt)) <= 1e-4
        assert est.score(Xt, yt) > 0.999999

    def test_auto_lambda_and_index_set(self):
        X, y = sparse_poly_data(m=100)
        est = SparsePolynomialRegressor().fit(X, y)
        assert est.lam_ > 0
        assert est.index_set_ is not None
        assert est.coef_.shape[0] == len(est.index_set_)

    def test_explicit_index_set(self):
        X, y = sparse_poly_data(m=120)
        Lam = hyperbolic_cross(3)
        est = SparsePolynomialRegressor(index_set=Lam, lam=0.05).fit(X, y)
        assert est.index_set_ is Lam

    def test_domain_validation(self):
        X, y = sparse_poly_data(m=50)
        X[0, 0] = 1.5
        with pytest.raises(ValueError):
            SparsePolynomialRegressor(hci_order=3, lam=0.1).fit(X, y)

    def test_predict_dimension_check(self):
        X, y = sparse_poly_data(m=60)
        est = SparsePolynomialRegressor(hci_order=3, lam=0.1).fit(X, y)
        with pytest.raises(ValueError):
            est.predict(np.zeros((2, 5)))

    def test_multioutput_with_gram(self):
        d, K = 3, 15
        space = DiscretizedSpace(K)
        target = diffusion_target(default_diffusion(d), space)
        X = draw_samples(80, d, 3)
        Y = target(X)
        est = SparsePolynomialRegressor(
            hci_order=3, lam=0.05, gram=space.gram, gamma=1e-6
        ).fit(X, Y)
        pred = est.predict(X)
        assert pred.shape == (80, K)
        resid = np.sqrt(np.mean(np.sum((pred - Y) @ space.gram * (pred - Y), axis=1)))
        base = np.sqrt(np.mean(np.sum(Y @ space.gram * Y, axis=1)))
        assert resid < 0.2 * base


class TestLegendreNetworkRegressor:
    def test_tracks_polynomial_estimator(self):
        X, y = sparse_poly_data(m=150, seed=2)
        poly = SparsePolynomialRegressor(hci_order=4, lam=0.02, gamma=1e-7).fit(X, y)
        net = LegendreNetworkRegressor(hci_order=4, delta=1e-4, lam=0.02, gamma=1e-7).fit(X, y)
        Xt, yt = sparse_poly_data(m=400, seed=3)
        poly_err = np.sqrt(np.mean((poly.predict(Xt) - yt) ** 2))
        net_err = np.sqrt(np.mean((net.predict(Xt) - yt) ** 2))
        assert net_err <= 2.0 * poly_err + 1e-3
        assert net.perturbation_norm_ <= math.sqrt(len(net.index_set_)) * 1e-4

    def test_network_exposed(self):
        X, y = sparse_poly_data(m=80, seed=4)
        est = LegendreNetworkRegressor(hci_order=3, delta=1e-3, lam=0.05).fit(X, y)
        assert est.network_.output_dim == 1
        assert est.network_.metadata["trained"]
