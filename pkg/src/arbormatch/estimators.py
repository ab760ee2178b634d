"""Scikit-learn style estimators wrapping the elastic neuron distance.

Both estimators accept heterogeneous neuron inputs (SWC file paths,
NeuronTree objects, or ready PathSet objects) rather than numeric feature
matrices, in the spirit of text vectorizers.  ElasticNeuronDistance is a
transformer producing a distance matrix against the fitted reference set,
which composes with any scikit-learn model that accepts precomputed
distances; ElasticNeuronKNN bundles the distance with the package's
deterministic majority vote.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .matching import pairwise_neuron_distances
from .paths import as_path_set
from .resample import ElasticConfig
from .retrieval import vote

__all__ = ["ElasticNeuronDistance", "ElasticNeuronKNN"]


def _coerce_neurons(X, take_largest_root: bool) -> tuple:
    return tuple(as_path_set(x, take_largest_root=take_largest_root) for x in X)


class ElasticNeuronDistance(BaseEstimator, TransformerMixin):
    """Transform neurons into distances against a fitted reference set.

    Parameters
    ----------
    rho : int, default=100
        Resampling floor: minimum points per path when comparing a pair.
    lam : float, default=1.0
        Additive constant in the cost denominator.
    n_jobs : int or None, default=None
        Joblib parallelism for the pairwise computation.
    take_largest_root : bool, default=False
        Accept multi-root SWC files by keeping the largest component.

    Examples
    --------
    >>> dist = ElasticNeuronDistance().fit(reference_files)
    >>> D = dist.transform(query_files)   # shape (n_queries, n_references)
    """

    def __init__(self, rho: int = 100, lam: float = 1.0, n_jobs: int | None = None,
                 take_largest_root: bool = False):
        self.rho = rho
        self.lam = lam
        self.n_jobs = n_jobs
        self.take_largest_root = take_largest_root

    def _config(self) -> ElasticConfig:
        return ElasticConfig(rho=self.rho, lam=self.lam)

    def fit(self, X, y=None):
        """Store the reference neurons."""
        config = self._config()  # validates parameters early
        del config
        reference = _coerce_neurons(X, self.take_largest_root)
        if not reference:
            raise ValueError("need at least one reference neuron")
        self.reference_ = reference
        return self

    def transform(self, X) -> np.ndarray:
        """Distance matrix between X and the fitted reference set."""
        check_is_fitted(self, "reference_")
        queries = _coerce_neurons(X, self.take_largest_root)
        if not queries:
            return np.empty((0, len(self.reference_)))
        return pairwise_neuron_distances(
            queries, self.reference_, self._config(), n_jobs=self.n_jobs
        )


class ElasticNeuronKNN(BaseEstimator, ClassifierMixin):
    """Nearest-neighbour neuron classifier under the elastic distance.

    Parameters
    ----------
    k : int, default=11
        Number of voting neighbours.
    rho : int, default=100
    lam : float, default=1.0
    n_jobs : int or None, default=None
    take_largest_root : bool, default=False

    Vote ties go to the tied class with the smaller summed distance, then to
    the lexicographically smaller label, so predictions are deterministic.
    """

    def __init__(self, k: int = 11, rho: int = 100, lam: float = 1.0,
                 n_jobs: int | None = None, take_largest_root: bool = False):
        self.k = k
        self.rho = rho
        self.lam = lam
        self.n_jobs = n_jobs
        self.take_largest_root = take_largest_root

    def _config(self) -> ElasticConfig:
        return ElasticConfig(rho=self.rho, lam=self.lam)

    def fit(self, X, y):
        """Store labeled reference neurons."""
        self._config()
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        y = np.asarray(y, dtype=object)
        reference = _coerce_neurons(X, self.take_largest_root)
        if len(reference) != len(y):
            raise ValueError(f"X has {len(reference)} neurons but y has {len(y)} labels")
        if len(reference) < self.k:
            raise ValueError(f"k={self.k} exceeds the {len(reference)} fitted neurons")
        self._reference = reference
        self._labels = [str(lab) for lab in y]
        self.classes_ = np.unique(y)
        return self

    def predict(self, X) -> np.ndarray:
        """Majority-vote label for each neuron in X."""
        check_is_fitted(self, "classes_")
        queries = _coerce_neurons(X, self.take_largest_root)
        if not queries:
            return np.empty(0, dtype=object)
        matrix = pairwise_neuron_distances(
            queries, self._reference, self._config(), n_jobs=self.n_jobs
        )
        return np.asarray(
            [vote(row, self._labels, self.k) for row in matrix], dtype=object
        )
