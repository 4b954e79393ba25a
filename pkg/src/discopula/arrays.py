"""d-dimensional probability arrays: indexing, margins, supports, validation.

Conventions
-----------
Arrays are plain ``numpy.ndarray`` objects of ``ndim == d`` with dimension
sizes ``r_1, ..., r_d`` (each at least 2).  Flat storage is column-major:
the first axis varies fastest, so ``vec(a) == a.reshape(-1, order="F")``.

Cell coordinates crossing the API boundary (``flatten_index``,
``unflatten_index``, structural-zero declarations in documents) are
1-based tuples, matching the usual contingency-table convention.  Axis
numbers and everything else follow numpy and are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import ContractError

#: absolute tolerance for "entries sum to one" checks
SUM_TOL = 1e-12

#: default support-detection threshold for arrays produced by iterative
#: scaling (declared arrays use exactly 0)
COMPUTED_ZERO_TOL = 1e-14


def check_shape(shape) -> tuple[int, ...]:
    """Validate dimension sizes: at least one axis, every size >= 2."""
    shape = tuple(int(r) for r in shape)
    if len(shape) < 1:
        raise ContractError("shape needs at least one axis")
    if any(r < 2 for r in shape):
        raise ContractError(f"every dimension size must be >= 2, got {shape}")
    return shape


def flatten_index(shape, index) -> int:
    """Column-major flat position (1-based) of a 1-based multi-index.

    The first coordinate varies fastest:
    ``position = i_1 + sum_{l>=2} (i_l - 1) * r_1 * ... * r_{l-1}``.
    """
    shape = check_shape(shape)
    index = tuple(int(i) for i in index)
    if len(index) != len(shape):
        raise ContractError(
            f"index has {len(index)} coordinates for a {len(shape)}-d shape"
        )
    for ax, (i, r) in enumerate(zip(index, shape)):
        if not 1 <= i <= r:
            raise ContractError(
                f"coordinate {i} out of range [1, {r}] on axis {ax}"
            )
    position = 0
    stride = 1
    for i, r in zip(index, shape):
        position += (i - 1) * stride
        stride *= r
    return position + 1


def unflatten_index(shape, position) -> tuple[int, ...]:
    """Inverse of :func:`flatten_index` (both sides 1-based)."""
    shape = check_shape(shape)
    position = int(position)
    total = int(np.prod(shape))
    if not 1 <= position <= total:
        raise ContractError(f"flat position {position} out of range [1, {total}]")
    k = position - 1
    index = []
    for r in shape:
        index.append(k % r + 1)
        k //= r
    return tuple(index)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-major vectorisation (first axis fastest)."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, shape) -> np.ndarray:
    """Inverse of :func:`vec`."""
    shape = tuple(int(r) for r in shape)
    return np.asarray(v).reshape(shape, order="F")


def margin(a: np.ndarray, axis: int) -> np.ndarray:
    """Marginal sum vector of ``a`` along ``axis`` (0-based).

    Component ``i`` is the sum of ``a`` over all cells whose coordinate on
    ``axis`` equals ``i``.
    """
    a = np.asarray(a)
    if not 0 <= axis < a.ndim:
        raise ContractError(f"axis {axis} out of range for a {a.ndim}-d array")
    other = tuple(ax for ax in range(a.ndim) if ax != axis)
    return a.sum(axis=other)


def margins(a: np.ndarray) -> list[np.ndarray]:
    """All d marginal sum vectors of ``a``."""
    return [margin(a, ax) for ax in range(np.asarray(a).ndim)]


def support_of(a: np.ndarray, zero_tol: float = 0.0) -> np.ndarray:
    """Boolean mask of cells with ``|a| > zero_tol``.

    Use ``zero_tol=0`` for declared arrays and ``COMPUTED_ZERO_TOL`` for
    arrays carrying scaling-loop rounding noise.
    """
    if zero_tol < 0:
        raise ContractError("zero_tol must be nonnegative")
    return np.abs(np.asarray(a)) > zero_tol


@dataclass(frozen=True)
class Violation:
    """One validation failure.

    ``kind`` is ``"negative-entry"``, ``"bad-sum"`` or ``"null-slice"``.
    ``where`` is a 0-based cell tuple for entries, ``(axis, level)`` for
    slices, ``None`` for the sum check.
    """

    kind: str
    where: tuple | None
    detail: str


def validate_probability_array(a, *, sum_tol: float = SUM_TOL) -> list[Violation]:
    """Check membership in the class of identically-null-slice-free arrays.

    Returns an empty list iff all entries are nonnegative, they sum to one
    within ``sum_tol`` and every marginal component is strictly positive.
    """
    a = np.asarray(a, dtype=float)
    check_shape(a.shape)
    out: list[Violation] = []
    for cell in zip(*np.nonzero(a < 0)):
        out.append(
            Violation("negative-entry", tuple(int(c) for c in cell),
                      f"entry {a[cell]!r} at {tuple(int(c) for c in cell)} is negative")
        )
    total = float(a.sum())
    if abs(total - 1.0) > sum_tol:
        out.append(Violation("bad-sum", None, f"entries sum to {total!r}, not 1"))
    for ax in range(a.ndim):
        m = margin(a, ax)
        for level in np.flatnonzero(m <= 0):
            out.append(
                Violation("null-slice", (ax, int(level)),
                          f"axis {ax} level {int(level)} has zero mass")
            )
    return out


def check_probability_array(a, *, sum_tol: float = SUM_TOL) -> np.ndarray:
    """Raise :class:`ContractError` unless ``a`` validates cleanly."""
    a = np.asarray(a, dtype=float)
    violations = validate_probability_array(a, sum_tol=sum_tol)
    if violations:
        summary = "; ".join(v.detail for v in violations[:5])
        raise ContractError(f"invalid probability array: {summary}")
    return a


def independence_array(margin_vectors) -> np.ndarray:
    """Outer product array of the given positive probability vectors."""
    vecs = [np.asarray(m, dtype=float) for m in margin_vectors]
    if not vecs:
        raise ContractError("need at least one margin")
    for ax, m in enumerate(vecs):
        if m.ndim != 1 or m.size < 2:
            raise ContractError(f"margin {ax} must be a vector of length >= 2")
        if np.any(m <= 0):
            raise ContractError(f"margin {ax} has non-positive entries")
        if abs(m.sum() - 1.0) > 1e-9:
            raise ContractError(f"margin {ax} sums to {m.sum()!r}, not 1")
    return reduce(np.multiply.outer, vecs)


def quasi_uniform_array(support) -> np.ndarray:
    """Probability array spreading mass evenly over the support cells."""
    support = np.asarray(support, dtype=bool)
    check_shape(support.shape)
    size = int(support.sum())
    if size < 1:
        raise ContractError("support is empty")
    return support.astype(float) / size
