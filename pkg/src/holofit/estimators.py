"""Scikit-learn style estimators wrapping the sparse Legendre learner.

Both estimators follow the fit/predict contract with ``get_params`` /
``set_params`` inherited from ``BaseEstimator``, so they compose with
pipelines, grid search and ``clone``.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .indexsets import IndexSet, hyperbolic_cross, intrinsic_weights
from .networks import compile_feature_class, train_last_layer
from .sampling import design_matrix
from .srlasso import SRLassoProblem, default_lambda, predict, solve

__all__ = ["SparsePolynomialRegressor", "LegendreNetworkRegressor"]


def _validate_points(X, dim=None):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if np.any(np.abs(X) > 1.0 + 1e-12):
        raise ValueError("sample points must lie in [-1, 1]^d")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"X has {X.shape[1]} features, expected {dim}")
    return X


def _resolve_index_set(index_set, hci_order, d) -> IndexSet:
    if isinstance(index_set, IndexSet):
        return index_set
    if index_set == "auto":
        return hyperbolic_cross(hci_order if hci_order is not None else d + 1)
    raise ValueError("index_set must be an IndexSet or 'auto'")


class SparsePolynomialRegressor(BaseEstimator, RegressorMixin):
    """Sparse tensor-Legendre regression via weighted square-root LASSO.

    Fits coefficients on a structured multi-index dictionary from point
    samples on [-1, 1]^d.  Targets may be vector-valued; a Gram matrix
    turns the output space into a nontrivial Hilbert space.

    Parameters
    ----------
    index_set : IndexSet or "auto"
        Polynomial dictionary.  "auto" uses the hyperbolic cross of
        parameter ``hci_order`` (default: n_features + 1, which covers
        every input dimension).
    hci_order : int or None
        Order of the automatic hyperbolic cross.
    lam : float or "auto"
        Regularization weight; "auto" applies the (m, eps)-based default.
    gamma : float
        Requested certified optimality gap of the solve.
    budget : int
        Iteration cap for the primal-dual solver.
    gram : ndarray or None
        Gram matrix of the output basis for vector-valued targets.
    eps : float
        Failure-probability parameter entering the automatic lambda.
    """

    def __init__(self, index_set="auto", hci_order=None, lam="auto",
                 gamma=1e-6, budget=400_000, gram=None, eps=1e-3):
        self.index_set = index_set
        self.hci_order = hci_order
        self.lam = lam
        self.gamma = gamma
        self.budget = budget
        self.gram = gram
        self.eps = eps

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, multi_output=True, y_numeric=True)
        X = _validate_points(X)
        m = X.shape[0]
        self._single_output = y.ndim == 1
        Y = y[:, None] if self._single_output else y
        Lambda = _resolve_index_set(self.index_set, self.hci_order, X.shape[1])
        if Lambda.dim > X.shape[1]:
            raise ValueError(
                f"index set active in dim {Lambda.dim}, X has {X.shape[1]} features"
            )
        lam = default_lambda(m, self.eps) if self.lam == "auto" else float(self.lam)
        prob = SRLassoProblem(
            A=design_matrix(X, Lambda),
            F=Y / math.sqrt(m),
            weights=intrinsic_weights(Lambda),
            lam=lam,
            gram=self.gram,
            index_set=Lambda,
        )
        sol = solve(prob, gamma=self.gamma, budget=self.budget)
        self.index_set_ = Lambda
        self.lam_ = lam
        self.solution_ = sol
        self.coef_ = sol.Z
        self.n_iter_ = sol.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = _validate_points(X, self.n_features_in_)
        out = design_matrix(X, self.index_set_, normalize=False) @ self.coef_
        return out[:, 0] if self._single_output else out


class LegendreNetworkRegressor(BaseEstimator, RegressorMixin):
    """Last-layer training of a handcrafted tanh Legendre network.

    The hidden layers are compiled (not trained) to emulate the tensor
    Legendre dictionary to tolerance ``delta``; fitting solves the same
    weighted square-root LASSO over the network's trainable output matrix.
    """

    def __init__(self, index_set="auto", hci_order=None, delta=1e-4, lam="auto",
                 gamma=1e-6, budget=400_000, gram=None, eps=1e-3):
        self.index_set = index_set
        self.hci_order = hci_order
        self.delta = delta
        self.lam = lam
        self.gamma = gamma
        self.budget = budget
        self.gram = gram
        self.eps = eps

    def fit(self, X, y):
        from .sampling import MeasurementSystem

        X, y = check_X_y(X, y, dtype=np.float64, multi_output=True, y_numeric=True)
        X = _validate_points(X)
        m = X.shape[0]
        self._single_output = y.ndim == 1
        Y = y[:, None] if self._single_output else y
        Lambda = _resolve_index_set(self.index_set, self.hci_order, X.shape[1])
        lam = default_lambda(m, self.eps) if self.lam == "auto" else float(self.lam)
        cls = compile_feature_class(Lambda, self.delta)
        system = MeasurementSystem(
            points=X,
            A=design_matrix(X, Lambda),
            F=Y / math.sqrt(m),
            index_set=Lambda,
            seed=0,
            gram=self.gram,
        )
        trained = train_last_layer(cls, system, lam, gamma=self.gamma, budget=self.budget)
        self.index_set_ = Lambda
        self.lam_ = lam
        self.trained_ = trained
        self.network_ = trained.network
        self.solution_ = trained.solution
        self.coef_ = trained.solution.Z
        self.perturbation_norm_ = trained.solution.info["perturbation_norm"]
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = _validate_points(X, self.n_features_in_)
        out = self.trained_.features_output(X)
        return out[:, 0] if self._single_output else out
