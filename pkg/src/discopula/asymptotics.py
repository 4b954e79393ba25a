"""Jacobians of the projection map and sandwich covariance matrices.

The projection onto the uniform-margin class, expressed in dependence
coordinates, is continuously differentiable in the underlying probability
array.  Its Jacobian has the closed form

    J_coords(p) = bread(copula)^-1 @ B.T @ diag(1/p_S) @ R,

where B is the support-selected basis matrix, R the support selector and
``bread(c) = B.T @ diag(1/c_S) @ B``.  Under multinomial sampling the
limiting covariance of the estimated coordinates is the sandwich
``bread^-1 @ meat @ bread^-1`` with ``meat = B.T @ diag(1/p_S) @ B``; the
cell-level covariance is its conjugation by the basis matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import vec
from .basis import BasisBundle
from .errors import ContractError
from .linalg import solve_spd


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sandwich covariance at coordinate and cell level.

    ``kind`` records whether the matrices were evaluated at a known
    population array ("exact") or at estimates ("plug-in").
    ``bread_condition`` is the condition number of the inverted inner
    matrix, surfaced as a conditioning diagnostic.
    """

    coords: np.ndarray
    cells: np.ndarray
    kind: str
    bread_condition: float


def _selected_pair(bundle: BasisBundle, prob_array, copula_arr):
    p_sel = bundle.selector @ vec(np.asarray(prob_array, dtype=float))
    c_sel = bundle.selector @ vec(np.asarray(copula_arr, dtype=float))
    off_support = vec(np.asarray(prob_array, dtype=float))[~vec(bundle.support)]
    if off_support.size and np.max(np.abs(off_support)) > 1e-12:
        raise ContractError("array has mass outside the bundle's support")
    if np.any(p_sel <= 0) or np.any(c_sel <= 0):
        raise ContractError("arrays must be strictly positive on the support")
    return p_sel, c_sel


def _bread(bundle: BasisBundle, c_sel):
    b = bundle.selected_columns
    return b.T @ (b / c_sel[:, None])


def coords_jacobian(bundle: BasisBundle, prob_array, copula_arr) -> np.ndarray:
    """Jacobian of the projection in dependence coordinates (d_circ x cells).

    ``copula_arr`` must be the converged projection of ``prob_array``.
    """
    p_sel, c_sel = _selected_pair(bundle, prob_array, copula_arr)
    if bundle.d_circ == 0:
        return np.zeros((0, bundle.support.size))
    b = bundle.selected_columns
    rhs = (b / p_sel[:, None]).T @ bundle.selector
    return solve_spd(_bread(bundle, c_sel), rhs)


def cells_jacobian(bundle: BasisBundle, prob_array, copula_arr) -> np.ndarray:
    """Cell-level Jacobian: basis matrix times the coordinate Jacobian.

    Invariant under a change of basis for the zero-margin space.
    """
    return bundle.columns @ coords_jacobian(bundle, prob_array, copula_arr)


def sandwich_covariance(bundle: BasisBundle, prob_array, copula_arr, *,
                        kind: str = "exact") -> CovarianceEstimate:
    """Sandwich covariance of the projected estimator under i.i.d. sampling.

    Evaluate at the population array and its copula array for the exact
    matrices, or at their estimates for the plug-in version (see
    :func:`plugin_covariance`).  Both returned matrices are symmetric
    positive semidefinite; the cell-level matrix has zero row and column
    sums and vanishes on structural zeros.
    """
    p_sel, c_sel = _selected_pair(bundle, prob_array, copula_arr)
    if bundle.d_circ == 0:
        # the projection is constant on such a support
        return CovarianceEstimate(coords=np.zeros((0, 0)),
                                  cells=np.zeros((bundle.support.size,) * 2),
                                  kind=kind, bread_condition=1.0)
    b = bundle.selected_columns
    bread = _bread(bundle, c_sel)
    meat = b.T @ (b / p_sel[:, None])
    half = solve_spd(bread, meat)
    coords = solve_spd(bread, half.T).T
    coords = 0.5 * (coords + coords.T)
    cells = bundle.columns @ coords @ bundle.columns.T
    cells = 0.5 * (cells + cells.T)
    condition = float(np.linalg.cond(bread))
    return CovarianceEstimate(coords=coords, cells=cells, kind=kind,
                              bread_condition=condition)


def plugin_covariance(bundle: BasisBundle, p_hat, copula_hat) -> CovarianceEstimate:
    """Sandwich covariance with estimates plugged in for the population."""
    return sandwich_covariance(bundle, p_hat, copula_hat, kind="plug-in")


def multinomial_covariance(prob_array) -> np.ndarray:
    """Covariance of the multinomial CLT: diag(vec p) - vec p vec p^T."""
    v = vec(np.asarray(prob_array, dtype=float))
    return np.diag(v) - np.outer(v, v)
