"""scikit-learn style wrapper around the encoder and decoder."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .codec import CodeParams, decode
from .matrix_ensemble import code_matrix


class OnlineCode(TransformerMixin, BaseEstimator):
    """Causal analog code as a transformer.

    ``fit`` fixes the horizon ``T`` from the number of columns of ``X``
    (one signal per row) and builds the code matrix.  ``transform`` encodes
    each row into ``(k + 1) * T`` channel symbols; ``inverse_transform``
    decodes received rows with the weighted-l1 decoder.

    Parameters
    ----------
    seed : int
        Shared public seed of the code.
    k : int
        Number of coded symbols per input symbol (the rate is ``k + 1``).
    mu : float
        Weighting exponent of the decoding and noise norms.
    t : int or None
        Decode only the first ``t`` time steps (default: all).
    """

    def __init__(self, seed=0, k=16, mu=0.5, t=None):
        self.seed = seed
        self.k = k
        self.mu = mu
        self.t = t

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.params_ = CodeParams(seed=int(self.seed), k=int(self.k), mu=float(self.mu))
        self.n_features_in_ = X.shape[1]
        self.code_matrix_ = code_matrix(self.params_.seed, self.params_.k, self.n_features_in_)
        return self

    def transform(self, X):
        check_is_fitted(self, "code_matrix_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but OnlineCode was fitted with "
                f"{self.n_features_in_}")
        return X @ self.code_matrix_.entries.T

    def inverse_transform(self, Z):
        check_is_fitted(self, "code_matrix_")
        Z = check_array(Z, dtype=np.float64)
        rate = self.params_.rate
        T = self.n_features_in_
        if Z.shape[1] != rate * T:
            raise ValueError(f"Z must have {rate * T} columns, got {Z.shape[1]}")
        t = T if self.t is None else int(self.t)
        C = self.code_matrix_.entries
        self.decode_results_ = [decode(z, self.params_, t=t, C=C) for z in Z]
        return np.array([r.x_hat for r in self.decode_results_])

    def _more_tags(self):
        return {"allow_nan": False}
