"""scikit-learn style wrapper around the conjugacy ``psi``."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .boundary import make_parameters
from .conjugacy import build_psi, psi_eval, psi_inverse
from .geometry import make_polygon
from .markov import closed_form_lambda


class ConstantSlopeConjugacy(TransformerMixin, BaseEstimator):
    """Maps circle angles through ``psi`` for an extremal boundary map.

    ``fit`` builds the breakpoint table; it ignores ``X`` because ``psi`` is
    determined by the genus and the parameter spec alone.  ``transform``
    and ``inverse_transform`` accept angles of shape ``(n,)`` or ``(n, 1)``
    and return the same shape.
    """

    def __init__(self, genus=2, spec="all-P", epsilon=1e-5, exact=False, measure="conformal"):
        self.genus = genus
        self.spec = spec
        self.epsilon = epsilon
        self.exact = exact
        self.measure = measure

    def fit(self, X=None, y=None):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.polygon_ = make_polygon(self.genus)
        self.params_ = make_parameters(self.polygon_, self.spec)
        self.table_ = build_psi(self.params_, self.epsilon, measure=self.measure)
        self.slope_ = closed_form_lambda(self.genus)
        self.entropy_ = float(np.log(self.slope_))
        self.resolution_ = self.table_.resolution
        return self

    def _angles(self, X):
        arr = check_array(X, ensure_2d=False, dtype=np.float64)
        if arr.ndim == 2 and arr.shape[1] != 1:
            raise ValueError(f"expected a single column of angles, got shape {arr.shape}")
        return arr

    def transform(self, X):
        check_is_fitted(self, "table_")
        arr = self._angles(X)
        out = psi_eval(self.table_, arr.ravel(), exact=self.exact)
        return np.asarray(out).reshape(arr.shape)

    def inverse_transform(self, X):
        check_is_fitted(self, "table_")
        arr = self._angles(X)
        out = psi_inverse(self.table_, arr.ravel(), exact=self.exact)
        return np.asarray(out).reshape(arr.shape)
