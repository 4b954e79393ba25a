"""Minimum-KL projection of probability arrays onto fixed-margin classes.

The projection is computed by iterative proportional fitting (Sinkhorn
scaling): each sweep rescales the slices along every axis so that the
corresponding margin matches its target.  When the fixed-margin class
restricted to the support of the input is empty the loop cannot converge;
infeasibility is detected by a stalled margin error or a zero-mass slice,
and confirmed by an exact linear-programming certificate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .arrays import (
    check_probability_array,
    check_shape,
    margin,
    quasi_uniform_array,
    vec,
)
from .errors import ContractError, MaxSweepsExceeded, NoFeasibleProjection

#: LP certificate threshold: the fixed-margin class has a fully supported
#: member iff the max-min-entry LP value exceeds this
_INTERIOR_TOL = 1e-9


@dataclass(frozen=True)
class IpfConfig:
    """Tuning knobs for the scaling loop.

    margin_tol
        Convergence threshold on the largest absolute deviation of any
        margin component from its target, checked after each full sweep.
    max_sweeps
        Hard budget of full sweeps.
    stall_window, stall_factor
        The error must shrink by at least ``stall_factor`` (relatively)
        over any ``stall_window`` consecutive sweeps, otherwise the run is
        treated as stalled and the feasibility certificate is consulted.
    """

    margin_tol: float = 1e-12
    max_sweeps: int = 10_000
    stall_window: int = 500
    stall_factor: float = 1e-3

    def __post_init__(self):
        if self.margin_tol <= 0:
            raise ContractError("margin_tol must be positive")
        if self.max_sweeps < 1:
            raise ContractError("max_sweeps must be at least 1")
        if self.stall_window < 1:
            raise ContractError("stall_window must be at least 1")


@dataclass
class IpfOutcome:
    """Result of a scaling run.

    ``scalings`` holds the cumulative per-axis factors: the output equals
    the input multiplied cellwise by the outer product of these vectors.
    """

    array: np.ndarray
    sweeps_used: int
    converged: bool
    final_margin_error: float
    scalings: list[np.ndarray] = field(default_factory=list)


@dataclass(frozen=True)
class FeasibilityCheck:
    """Verdict on whether uniform-margin arrays with a given support exist."""

    feasible: bool
    converged: bool
    detail: str
    min_entry: float | None = None


def i_divergence(q, p) -> float:
    """KL divergence of ``q`` with respect to ``p`` (natural log).

    ``sum(q * log(q / p))`` over the support of ``p``, with the convention
    ``0 * log 0 = 0``; returns ``inf`` when ``q`` puts mass outside the
    support of ``p``.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise ContractError(f"shape mismatch: {q.shape} vs {p.shape}")
    if np.any(q[p == 0] > 0):
        return float("inf")
    mask = q > 0
    return float(np.sum(q[mask] * np.log(q[mask] / p[mask])))


def _check_targets(shape, target_margins):
    targets = [np.asarray(t, dtype=float) for t in target_margins]
    if len(targets) != len(shape):
        raise ContractError(
            f"{len(targets)} target margins for a {len(shape)}-d array"
        )
    for ax, (t, r) in enumerate(zip(targets, shape)):
        if t.shape != (r,):
            raise ContractError(f"target margin {ax} has length {t.size}, expected {r}")
        if np.any(t <= 0):
            raise ContractError(f"target margin {ax} has non-positive entries")
        if abs(t.sum() - 1.0) > 1e-9:
            raise ContractError(f"target margin {ax} sums to {t.sum()!r}, not 1")
    return targets


def _margin_error(a, targets):
    return max(
        float(np.max(np.abs(margin(a, ax) - targets[ax])))
        for ax in range(a.ndim)
    )


def min_entry_certificate(support, target_margins) -> tuple[bool, float | None]:
    """Exact feasibility certificate for a fixed-margin class on a support.

    Solves the linear program maximising the smallest selected entry over
    all nonnegative arrays supported inside ``support`` with the given
    margins.  Returns ``(False, None)`` when even the relaxed class (support
    contained in ``support``) is empty, otherwise ``(True, eps)`` where
    ``eps`` is the attainable max-min entry; a fully supported member
    exists iff ``eps > 0``.
    """
    from scipy.optimize import linprog

    support = np.asarray(support, dtype=bool)
    shape = check_shape(support.shape)
    targets = _check_targets(shape, target_margins)
    selected = vec(support)
    k = int(selected.sum())
    if k < 1:
        raise ContractError("support is empty")

    rows, rhs = [], []
    for ax, t in enumerate(targets):
        for level in range(shape[ax]):
            mask = np.zeros(shape)
            sl = [slice(None)] * len(shape)
            sl[ax] = level
            mask[tuple(sl)] = 1.0
            rows.append(vec(mask)[selected])
            rhs.append(t[level])
    a_eq = np.column_stack([np.asarray(rows), np.zeros(len(rows))])
    a_ub = np.column_stack([-np.eye(k), np.ones(k)])
    cost = np.zeros(k + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=a_ub, b_ub=np.zeros(k), A_eq=a_eq,
                  b_eq=np.asarray(rhs), bounds=[(0, 1)] * (k + 1),
                  method="highs")
    if res.status == 2:  # proven infeasible
        return False, None
    if not res.success:
        raise ContractError(f"feasibility LP failed: {res.message}")
    return True, float(res.x[-1])


def _scale_along(a, factor, axis):
    shape = [1] * a.ndim
    shape[axis] = -1
    a *= factor.reshape(shape)


def ipf_project(prob_array, target_margins, config: IpfConfig | None = None) -> IpfOutcome:
    """Project ``prob_array`` onto the class with the given margins.

    Cycles the axes each sweep, rescaling every slice by target/current
    margin mass.  On success the result is the unique minimum-KL member of
    the fixed-margin class; zeros of the input are preserved exactly.

    Raises
    ------
    NoFeasibleProjection
        The class restricted to the support of the input is empty (zero
        current mass on a slice with positive target, or a stalled /
        exhausted run whose LP certificate rules out an interior point).
    MaxSweepsExceeded
        The budget ran out on a certified-feasible instance.
    """
    cfg = config or IpfConfig()
    a = np.array(prob_array, dtype=float)
    shape = check_shape(a.shape)
    if np.any(a < 0):
        raise ContractError("input array has negative entries")
    if abs(a.sum() - 1.0) > 1e-9:
        raise ContractError(f"input array sums to {a.sum()!r}, not 1")
    targets = _check_targets(shape, target_margins)

    scalings = [np.ones(r) for r in shape]
    history: deque[float] = deque(maxlen=cfg.stall_window + 1)
    err = np.inf
    for sweep in range(1, cfg.max_sweeps + 1):
        for ax in range(a.ndim):
            current = margin(a, ax)
            dead = current <= 0.0
            if np.any(dead):
                levels = [int(i) for i in np.flatnonzero(dead)]
                raise NoFeasibleProjection(
                    f"slice(s) {levels} on axis {ax} carry zero mass but have "
                    "a positive target margin",
                    diagnostic={"reason": "zero-margin", "axis": ax, "levels": levels},
                )
            factor = targets[ax] / current
            _scale_along(a, factor, ax)
            scalings[ax] *= factor
        err = _margin_error(a, targets)
        history.append(err)
        if err <= cfg.margin_tol:
            return IpfOutcome(array=a, sweeps_used=sweep, converged=True,
                              final_margin_error=err, scalings=scalings)
        if len(history) == cfg.stall_window + 1:
            past = history[0]
            if past <= 0 or (past - err) < cfg.stall_factor * past:
                _settle_nonconvergence(a, targets, err, sweep, "stall", scalings, cfg)
    _settle_nonconvergence(a, targets, err, cfg.max_sweeps, "max-sweeps", scalings, cfg)


def _settle_nonconvergence(a, targets, err, sweep, reason, scalings, cfg):
    """Issue the final verdict for a run that did not converge."""
    feasible, eps = min_entry_certificate(a > 0, targets)
    if not feasible or eps <= _INTERIOR_TOL:
        raise NoFeasibleProjection(
            "no array with the target margins has the support of the input "
            f"(detected by {reason} after {sweep} sweeps, margin error {err:.3e})",
            diagnostic={"reason": reason, "sweeps": sweep, "margin_error": err,
                        "lp_feasible": feasible, "lp_min_entry": eps},
        )
    raise MaxSweepsExceeded(
        f"margin error {err:.3e} after {sweep} sweeps (tolerance "
        f"{cfg.margin_tol:.1e}); the instance is feasible, raise max_sweeps",
        outcome=IpfOutcome(array=a, sweeps_used=sweep, converged=False,
                           final_margin_error=err, scalings=scalings),
    )


def uniform_targets(shape) -> list[np.ndarray]:
    """Discrete-uniform target margins for every axis."""
    return [np.full(r, 1.0 / r) for r in check_shape(shape)]


def copula_array(prob_array, config: IpfConfig | None = None, *,
                 validate: bool = True) -> IpfOutcome:
    """Project a probability array onto the uniform-margin class.

    The converged array is the copula array of the input: the unique
    uniform-margin array with the same support and the same dependence
    structure (it equals the input times an outer product of per-axis
    factors).
    """
    a = np.asarray(prob_array, dtype=float)
    if validate:
        a = check_probability_array(a)
    return ipf_project(a, uniform_targets(a.shape), config)


def uniform_margins_feasible(support, config: IpfConfig | None = None) -> FeasibilityCheck:
    """Decide whether any uniform-margin array has exactly this support.

    Runs the projection of the quasi-uniform array on the support; the
    loop converges iff such arrays exist.  When the sweep budget runs out
    on a certified-feasible instance the verdict is still positive.
    """
    q = quasi_uniform_array(support)
    try:
        out = copula_array(q, config, validate=False)
    except NoFeasibleProjection as exc:
        return FeasibilityCheck(False, False, str(exc),
                                min_entry=exc.diagnostic.get("lp_min_entry"))
    except MaxSweepsExceeded as exc:
        return FeasibilityCheck(True, False, str(exc))
    inside = float(out.array[np.asarray(support, dtype=bool)].min())
    return FeasibilityCheck(True, True, f"converged in {out.sweeps_used} sweeps",
                            min_entry=inside)


def quasi_independence_array(support, config: IpfConfig | None = None) -> np.ndarray:
    """Uniform-margin array that factorises over the given support.

    This is the projection of the quasi-uniform array: the copula array of
    any distribution whose variables are independent within the support.
    """
    out = copula_array(quasi_uniform_array(support), config, validate=False)
    return out.array


def smoothed_empirical(counts, support=None, *, smooth: bool = True) -> np.ndarray:
    """Relative-frequency array, lightly smoothed over the declared support.

    With ``smooth=True`` (default) returns the ``(n/(n+1), 1/(n+1))``
    mixture of the raw frequencies with the quasi-uniform array on
    ``support``, which is strictly positive on every support cell.  With
    ``smooth=False`` returns the raw frequencies.
    """
    counts = np.asarray(counts)
    if np.any(counts < 0):
        raise ContractError("counts must be nonnegative")
    counts = counts.astype(float)
    n = counts.sum()
    if n < 1:
        raise ContractError("need at least one observation")
    if support is None:
        support = counts > 0
    support = np.asarray(support, dtype=bool)
    if support.shape != counts.shape:
        raise ContractError("support shape does not match counts")
    if np.any((counts > 0) & ~support):
        cells = list(zip(*np.nonzero((counts > 0) & ~support)))
        raise ContractError(
            f"positive count outside the declared support at {cells[:5]}"
        )
    raw = counts / n
    if not smooth:
        return raw
    q = quasi_uniform_array(support)
    return (n / (n + 1.0)) * raw + (1.0 / (n + 1.0)) * q


def factorization_residual(result, prob_array) -> float:
    """Deviation of ``result`` from a per-axis rescaling of ``prob_array``.

    Fits ``log(result / prob_array)`` over the common support by an
    additive model in the coordinate labels (least squares, first level of
    each axis pinned to zero for identifiability) and returns the largest
    absolute residual.  The residual is zero iff ``result`` equals
    ``prob_array`` times an outer product of positive per-axis factors.
    """
    result = np.asarray(result, dtype=float)
    p = np.asarray(prob_array, dtype=float)
    if result.shape != p.shape:
        raise ContractError("arrays have different shapes")
    sup_r, sup_p = result > 0, p > 0
    if not np.array_equal(sup_r, sup_p):
        raise ContractError("arrays have different supports")
    cells = np.argwhere(sup_p)
    y = np.log(result[sup_p] / p[sup_p])
    blocks = [np.ones((len(cells), 1))]
    for ax, r in enumerate(p.shape):
        dummies = np.zeros((len(cells), r - 1))
        for j, cell in enumerate(cells):
            if cell[ax] > 0:
                dummies[j, cell[ax] - 1] = 1.0
        blocks.append(dummies)
    design = np.hstack(blocks)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(np.max(np.abs(y - design @ coef)))
