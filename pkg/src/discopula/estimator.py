"""Scikit-learn style front end for the discrete copula machinery."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils import check_array

from .basis import coords_of_copula, dependence_basis
from .asymptotics import plugin_covariance
from .errors import ContractError
from .inference import (
    QuasiIndependenceResult,
    YuleEstimate,
    quasi_independence_test,
    yule_inference,
)
from .projection import IpfConfig, copula_array, smoothed_empirical


class EmpiricalCopula(BaseEstimator, TransformerMixin):
    """Margin-free dependence summary of a discrete sample.

    ``fit`` cross-tabulates the observations, smooths the relative
    frequencies over the declared support and projects them onto the
    uniform-margin class.  The fitted attributes expose the projected
    array, its dependence coordinates and their plug-in covariance;
    ``transform`` maps observations to copula-scale scores, so the
    estimator composes with ordinary scikit-learn pipelines.

    Parameters
    ----------
    smoothing : bool, default True
        Mix the raw frequencies with the quasi-uniform array on the
        support (weights n/(n+1) and 1/(n+1)).
    levels : list of sequences, optional
        Category values per column, in rank order.  Inferred from the data
        (sorted unique values) when omitted.
    structural_zeros : list of tuples, optional
        1-based cells that are impossible a priori.
    margin_tol, max_sweeps : float, int
        Convergence controls of the projection loop.

    Attributes
    ----------
    categories_ : list of ndarray
        Ordered category values per column.
    counts_ : ndarray
        The cross-tabulation, shape ``dims_``.
    prob_array_ : ndarray
        Smoothed relative frequencies.
    copula_array_ : ndarray
        Projection of ``prob_array_`` onto the uniform-margin class.
    coords_ : ndarray
        Dependence coordinates of ``copula_array_`` (length ``d_circ_``).
    covariance_ : CovarianceEstimate
        Plug-in sandwich covariance of coordinates and cells.
    """

    def __init__(self, smoothing=True, levels=None, structural_zeros=None,
                 margin_tol=1e-12, max_sweeps=10_000):
        self.smoothing = smoothing
        self.levels = levels
        self.structural_zeros = structural_zeros
        self.margin_tol = margin_tol
        self.max_sweeps = max_sweeps

    def _config(self) -> IpfConfig:
        return IpfConfig(margin_tol=self.margin_tol, max_sweeps=self.max_sweeps)

    def fit(self, X, y=None):
        X = check_array(X, dtype=None, ensure_2d=True)
        if self.levels is not None:
            if len(self.levels) != X.shape[1]:
                raise ContractError("one level sequence per column is required")
            self.categories_ = [np.asarray(lv) for lv in self.levels]
            for j, cats in enumerate(self.categories_):
                if len(set(cats.tolist())) != len(cats):
                    raise ContractError(f"levels for column {j} contain duplicates")
        else:
            self.categories_ = [np.unique(X[:, j]) for j in range(X.shape[1])]
        self.dims_ = tuple(len(c) for c in self.categories_)
        codes = np.column_stack([
            self._encode_column(X[:, j], j) for j in range(X.shape[1])
        ])
        counts = np.zeros(self.dims_, dtype=np.int64)
        np.add.at(counts, tuple(codes.T), 1)
        self.counts_ = counts
        self.n_obs_ = int(counts.sum())

        support = np.ones(self.dims_, dtype=bool)
        for cell in self.structural_zeros or []:
            if len(cell) != len(self.dims_):
                raise ContractError(f"structural zero {cell} has wrong dimension")
            support[tuple(int(c) - 1 for c in cell)] = False
        self.support_ = support

        config = self._config()
        self.prob_array_ = smoothed_empirical(counts, support, smooth=self.smoothing)
        self.ipf_ = copula_array(self.prob_array_, config)
        self.copula_array_ = self.ipf_.array
        self.basis_ = dependence_basis(support, config=config)
        self.d_circ_ = self.basis_.d_circ
        self.coords_ = coords_of_copula(self.basis_, self.copula_array_)
        self.covariance_ = plugin_covariance(self.basis_, self.prob_array_,
                                             self.copula_array_)
        return self

    def _encode_column(self, column, j):
        # the level sequence defines the ranks, so the lookup must not
        # assume sorted categories
        lookup = {v: k for k, v in enumerate(self.categories_[j].tolist())}
        try:
            return np.array([lookup[v] for v in column.tolist()], dtype=np.intp)
        except KeyError as exc:
            raise ContractError(
                f"value {exc.args[0]!r} in column {j} is not a known level"
            ) from None

    def _check_fitted(self):
        if not hasattr(self, "copula_array_"):
            raise NotFittedError("this EmpiricalCopula instance is not fitted yet")

    def transform(self, X):
        """Copula-scale scores: level i of a column with r levels maps to
        i/(r+1), so every transformed column is uniform on its grid."""
        self._check_fitted()
        X = check_array(X, dtype=None, ensure_2d=True)
        if X.shape[1] != len(self.categories_):
            raise ContractError(
                f"X has {X.shape[1]} columns, expected {len(self.categories_)}"
            )
        out = np.empty(X.shape, dtype=float)
        for j in range(X.shape[1]):
            codes = self._encode_column(X[:, j], j)
            out[:, j] = (codes + 1.0) / (self.dims_[j] + 1.0)
        return out

    def yule(self, ci_level: float = 0.95) -> YuleEstimate:
        """Concordance inference; two-way tables only."""
        self._check_fitted()
        return yule_inference(self.counts_, self.support_, ci_level=ci_level,
                              smooth=self.smoothing, config=self._config(),
                              basis=self.basis_)

    def quasi_independence(self) -> QuasiIndependenceResult:
        """Test of independence within the declared support."""
        self._check_fitted()
        return quasi_independence_test(self.counts_, self.support_,
                                       basis=self.basis_, smooth=self.smoothing,
                                       config=self._config())
