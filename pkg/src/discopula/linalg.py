"""Shared dense linear algebra: null spaces, SPD solves, finite differences."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ContractError


def null_space(matrix, rank_tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the kernel of ``matrix`` (columns).

    SVD-based, hence deterministic for a given input on a given platform.
    ``rank_tol`` is the relative singular-value cutoff; the default is
    ``max(m, n) * eps`` times the largest singular value.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if rank_tol is not None and rank_tol <= 0:
        raise ContractError("rank_tol must be positive")
    if matrix.size == 0:
        return np.eye(matrix.shape[1])
    return scipy.linalg.null_space(matrix, rcond=rank_tol)


def solve_spd(matrix, rhs) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` for a symmetric positive definite matrix.

    Cholesky with one step of iterative refinement.  A failed factorisation
    raises :class:`ConditioningError` carrying the smallest eigenvalue.
    """
    m = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T)) > 1e-8 * max(1.0, np.max(np.abs(m))):
        raise ContractError("matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        smallest = float(np.linalg.eigvalsh(m)[0])
        raise ConditioningError(
            f"matrix is not positive definite (smallest eigenvalue {smallest:.3e})"
        ) from exc
    x = scipy.linalg.cho_solve(factor, b, check_finite=False)
    x = x + scipy.linalg.cho_solve(factor, b - m @ x, check_finite=False)
    return x


def finite_difference_jacobian(func, x, step: float, *, mode: str = "cartesian",
                               reference: int | None = None) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function.

    ``mode="cartesian"`` perturbs one coordinate at a time.  For functions
    defined on the probability simplex use ``mode="simplex"``: each column
    ``j`` is the directional derivative along ``e_j - e_ref`` (mass moved
    from the reference cell to cell ``j``), which keeps the perturbed point
    on the simplex; the reference column is identically zero.
    """
    x = np.asarray(x, dtype=float)
    if step <= 0:
        raise ContractError("step must be positive")
    if mode not in ("cartesian", "simplex"):
        raise ContractError(f"unknown mode {mode!r}")
    n = x.size
    if mode == "simplex":
        ref = int(np.argmax(x)) if reference is None else int(reference)
    cols = []
    for j in range(n):
        direction = np.zeros(n)
        direction[j] = 1.0
        if mode == "simplex":
            if j == ref:
                cols.append(np.zeros_like(np.asarray(func(x), dtype=float)))
                continue
            direction[ref] = -1.0
        hi = np.asarray(func(x + step * direction), dtype=float)
        lo = np.asarray(func(x - step * direction), dtype=float)
        cols.append((hi - lo) / (2.0 * step))
    return np.column_stack(cols)
