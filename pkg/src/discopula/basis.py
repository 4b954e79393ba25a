"""Affine parameterisation of uniform-margin arrays with a fixed support.

The uniform-margin arrays supported exactly on a set S form an open convex
patch of an affine space: anchor at the quasi-independence array of S and
add any element of the linear space of arrays supported inside S whose
margins all vanish.  A basis of that space is obtained as the null space
of a 0/1 constraint matrix; the resulting coordinate vector identifies
each such array uniquely and carries all the dependence information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import check_shape, vec, unvec
from .errors import ContractError, NoFeasibleProjection, NotInAffineSpan
from .linalg import null_space
from .projection import IpfConfig, quasi_independence_array


@dataclass(frozen=True)
class ConstraintMatrix:
    """0/1 system whose kernel is the zero-margin space of a support.

    One unit row per excluded cell (in increasing flat position), then one
    row per (axis, level) margin constraint, axes ascending and levels
    ascending within each axis.  ``row_labels`` tags every row with
    ``("cell", flat_position)`` or ``("margin", axis, level)``.
    """

    matrix: np.ndarray
    row_labels: tuple[tuple, ...]
    shape: tuple[int, ...]
    support: np.ndarray


def constraint_matrix(support) -> ConstraintMatrix:
    """Build the constraint system for the given support mask."""
    support = np.asarray(support, dtype=bool)
    shape = check_shape(support.shape)
    if not support.any():
        raise ContractError("support is empty")
    n = support.size
    selected = vec(support)
    rows, labels = [], []
    for pos in np.flatnonzero(~selected):
        row = np.zeros(n)
        row[pos] = 1.0
        rows.append(row)
        labels.append(("cell", int(pos)))
    for ax, r in enumerate(shape):
        for level in range(r):
            mask = np.zeros(shape)
            sl = [slice(None)] * len(shape)
            sl[ax] = level
            mask[tuple(sl)] = 1.0
            rows.append(vec(mask))
            labels.append(("margin", ax, level))
    return ConstraintMatrix(matrix=np.asarray(rows), row_labels=tuple(labels),
                            shape=shape, support=support)


@dataclass(frozen=True)
class BasisBundle:
    """A support, a basis of its zero-margin space, and the anchor array.

    columns
        ``(prod(r), d_circ)`` matrix whose columns are vectorised basis
        arrays: zero outside the support, all margins zero.
    selector
        ``(|S|, prod(r))`` 0/1 matrix keeping the support coordinates of a
        vectorised array (rows in increasing flat position).
    selected_columns
        ``selector @ columns``.
    quasi_independence
        The anchor array (coordinates all zero), or ``None`` when no
        uniform-margin array with this exact support exists.
    """

    shape: tuple[int, ...]
    support: np.ndarray
    columns: np.ndarray
    selector: np.ndarray
    selected_columns: np.ndarray
    d_circ: int
    quasi_independence: np.ndarray | None
    #: default membership tolerance of coords_of_copula; larger than 1e-9
    #: only for approximate (e.g. rounded, file-loaded) bases
    representation_tol: float = 1e-9

    @property
    def anchor(self) -> np.ndarray:
        if self.quasi_independence is None:
            raise NoFeasibleProjection(
                "no uniform-margin array exists with this support; the "
                "bundle only reports the dependence dimension"
            )
        return self.quasi_independence


def _selector_matrix(support) -> np.ndarray:
    selected = vec(np.asarray(support, dtype=bool))
    return np.eye(selected.size)[selected]


def _assemble(shape, support, columns, config, *,
              constraint_tol=None) -> BasisBundle:
    support = np.asarray(support, dtype=bool)
    columns = np.atleast_2d(np.asarray(columns, dtype=float))
    if columns.shape[0] != support.size:
        raise ContractError(
            f"basis columns have length {columns.shape[0]}, expected {support.size}"
        )
    representation_tol = 1e-9
    if constraint_tol is not None:
        residual = np.max(np.abs(constraint_matrix(support).matrix @ columns)) \
            if columns.shape[1] else 0.0
        if residual > constraint_tol:
            raise ContractError(
                f"columns violate the support/margin constraints (residual {residual:.2e})"
            )
        # a basis known only to `residual` precision cannot represent
        # members any better than that
        representation_tol = max(representation_tol, float(residual))
    selector = _selector_matrix(support)
    try:
        gamma_q = quasi_independence_array(support, config)
    except NoFeasibleProjection:
        gamma_q = None
    return BasisBundle(shape=tuple(shape), support=support, columns=columns,
                       selector=selector, selected_columns=selector @ columns,
                       d_circ=columns.shape[1], quasi_independence=gamma_q,
                       representation_tol=representation_tol)


def null_space_basis(constraints: ConstraintMatrix, rank_tol: float | None = None,
                     config: IpfConfig | None = None) -> BasisBundle:
    """Orthonormal basis of the zero-margin space from the constraint system.

    ``d_circ = 0`` is a valid outcome and means the support admits exactly
    one uniform-margin array (if any): the quasi-independence array.
    """
    columns = null_space(constraints.matrix, rank_tol)
    return _assemble(constraints.shape, constraints.support, columns, config)


def dependence_basis(support, rank_tol: float | None = None,
                     config: IpfConfig | None = None) -> BasisBundle:
    """Convenience wrapper: constraint system + null-space basis."""
    return null_space_basis(constraint_matrix(support), rank_tol, config)


def _column_major_product(dims):
    total = int(np.prod(dims))
    for k in range(total):
        kk, idx = k, []
        for r in dims:
            idx.append(kk % r)
            kk //= r
        yield tuple(idx)


def canonical_basis(shape, config: IpfConfig | None = None) -> BasisBundle:
    """Sign-pattern basis for a full support (complete for two-way tables).

    One column per cell of the reduced grid ``[r_1 - 1] x ... x [r_d - 1]``:
    the basis array is the outer product of per-axis vectors with +1 at the
    cell's level and -1 at the last level, so its entries alternate in sign
    with the number of coordinates sitting at the last level.

    For ``d == 2`` the ``(r_1 - 1)(r_2 - 1)`` columns span the whole
    zero-margin space.  For ``d >= 3`` they span the smaller subspace of
    arrays whose every one-axis fiber sums to zero, which is a strict
    subspace of the zero-margin space; use :func:`dependence_basis` there.
    """
    shape = check_shape(shape)
    full = np.ones(shape, dtype=bool)
    cols = []
    for j in _column_major_product([r - 1 for r in shape]):
        factors = []
        for ax, r in enumerate(shape):
            v = np.zeros(r)
            v[j[ax]] = 1.0
            v[r - 1] = -1.0
            factors.append(v)
        delta = factors[0]
        for v in factors[1:]:
            delta = np.multiply.outer(delta, v)
        cols.append(vec(delta))
    return _assemble(shape, full, np.column_stack(cols), config)


def basis_from_columns(support, columns, config: IpfConfig | None = None, *,
                       constraint_tol: float = 1e-3) -> BasisBundle:
    """Bundle a user-supplied (e.g. file-loaded) basis matrix.

    The columns are checked against the support/margin constraints up to
    ``constraint_tol``, loose enough for matrices printed with four
    decimals.
    """
    support = np.asarray(support, dtype=bool)
    return _assemble(support.shape, support, columns, config,
                     constraint_tol=constraint_tol)


def load_basis_matrix(path) -> np.ndarray:
    """Read a basis matrix: plain text, row-major, whitespace-separated."""
    return np.loadtxt(path, ndmin=2)


def save_basis_matrix(path, columns, decimals: int = 6) -> None:
    """Write a basis matrix in the plain-text fixture format."""
    np.savetxt(path, np.asarray(columns, dtype=float), fmt=f"%.{decimals}f")


def copula_from_coords(bundle: BasisBundle, coords) -> np.ndarray:
    """Anchor plus the basis combination given by ``coords``.

    Margins are uniform and the support is respected by construction, but
    entries may leave (0, 1) when ``coords`` is not admissible.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (bundle.d_circ,):
        raise ContractError(f"expected {bundle.d_circ} coordinates, got {coords.shape}")
    return bundle.anchor + unvec(bundle.columns @ coords, bundle.shape)


def coords_of_copula(bundle: BasisBundle, copula, *,
                     residual_tol: float | None = None) -> np.ndarray:
    """Coordinates of a uniform-margin array in the bundle's basis.

    Least-squares solve of ``columns @ coords = vec(copula - anchor)``;
    the residual doubles as a membership test and must stay below
    ``residual_tol`` (default: the bundle's representation tolerance).
    """
    copula = np.asarray(copula, dtype=float)
    if residual_tol is None:
        residual_tol = bundle.representation_tol
    if copula.shape != bundle.shape:
        raise ContractError("array shape does not match the bundle")
    b = vec(copula) - vec(bundle.anchor)
    if bundle.d_circ == 0:
        residual = float(np.max(np.abs(b))) if b.size else 0.0
        coords = np.zeros(0)
    else:
        coords, *_ = np.linalg.lstsq(bundle.columns, b, rcond=None)
        residual = float(np.max(np.abs(bundle.columns @ coords - b)))
    if residual > residual_tol:
        raise NotInAffineSpan(
            f"array is not in the affine span of this support's basis "
            f"(residual {residual:.3e}); check its support and margins"
        )
    return coords


def is_admissible(bundle: BasisBundle, coords) -> bool:
    """Whether the coordinates yield entries strictly inside (0, 1)."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (bundle.d_circ,):
        raise ContractError(f"expected {bundle.d_circ} coordinates, got {coords.shape}")
    values = bundle.selector @ vec(bundle.anchor) + bundle.selected_columns @ coords
    return bool(np.all((values > 0.0) & (values < 1.0)))
