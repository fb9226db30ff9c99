"""scikit-learn wrapper around the catenary fit."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from .catenary import FunctionSample, catenary_closed_form
from .classify import fit_catenary


class CatenaryRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``y = cosh(lam * s + mu) / lam`` to 1-D samples.

    Parameters
    ----------
    max_iter : int
        Gauss-Newton iteration cap.
    xtol : float
        Step-size tolerance on ``(lam, mu)``.

    Attributes
    ----------
    lambda_, mu_ : float
        Fitted parameters.
    rms_ : float
        Root-mean-square residual of the fit.
    """

    def __init__(self, max_iter=100, xtol=1e-13):
        self.max_iter = max_iter
        self.xtol = xtol

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError(f"CatenaryRegressor expects a single feature, got {X.shape[1]}")
        s = X[:, 0]
        order = np.argsort(s, kind="stable")
        self.lambda_, self.mu_, self.rms_ = fit_catenary(
            FunctionSample(s[order], y[order]), max_iter=self.max_iter, xtol=self.xtol
        )
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "lambda_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError(f"CatenaryRegressor expects a single feature, got {X.shape[1]}")
        return catenary_closed_form(self.lambda_, self.mu_, X[:, 0])
