"""End-user inference: Yule's concordance coefficient and the
quasi-independence test.

Both procedures work on the copula array only, never on the raw
probability array, so their conclusions are margin-free: they are
unchanged by monotone relabelling of the categories and by per-axis
rescaling of the underlying distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .arrays import margins, vec
from .asymptotics import plugin_covariance
from .basis import BasisBundle, coords_of_copula, dependence_basis
from .errors import ContractError, DegenerateTestError
from .linalg import solve_spd
from .projection import IpfConfig, copula_array, smoothed_empirical


@dataclass(frozen=True)
class YuleEstimate:
    """Concordance estimate with its large-sample confidence interval."""

    upsilon: float
    variance: float
    std_error: float
    ci_level: float
    ci: tuple[float, float]
    n: int
    kappa: float


@dataclass(frozen=True)
class QuasiIndependenceResult:
    """Wald-type test of all dependence coordinates being zero."""

    coords: np.ndarray
    statistic: float
    dof: int
    p_value: float


def chi_square_upper_tail(x: float, dof: int) -> float:
    """Upper-tail probability of a chi-square distribution."""
    if x < 0:
        raise ContractError("statistic must be nonnegative")
    if dof < 1:
        raise ContractError("degrees of freedom must be at least 1")
    return float(scipy.special.gammaincc(dof / 2.0, x / 2.0))


def normal_quantile(q: float) -> float:
    """Standard normal inverse CDF; rejects the boundary values 0 and 1."""
    if not 0.0 < q < 1.0:
        raise ContractError("quantile level must lie strictly in (0, 1)")
    return float(scipy.special.ndtri(q))


def yule_kappa(r1: int, r2: int) -> float:
    """Normalising constant of the concordance coefficient."""
    return 12.0 / math.sqrt((r1 - 1) * (r1 + 1) * (r2 - 1) * (r2 + 1))


def _score_contraction(r1: int, r2: int) -> np.ndarray:
    # kron of the column scores with the row scores matches column-major vec
    return np.kron(np.arange(1, r2 + 1, dtype=float),
                   np.arange(1, r1 + 1, dtype=float))


def yule_coefficient(copula_arr, *, margin_tol: float = 1e-8) -> float:
    """Concordance coefficient of a bivariate uniform-margin array.

    The correlation of the associated copula measure: rescaled sum of
    ``i1 * i2 * gamma[i1, i2]``.  Zero for the independence array, +-1
    exactly for diagonal square arrays.
    """
    g = np.asarray(copula_arr, dtype=float)
    if g.ndim != 2:
        raise ContractError("the concordance coefficient needs a 2-d array")
    r1, r2 = g.shape
    for ax, m in enumerate(margins(g)):
        if np.max(np.abs(m - 1.0 / g.shape[ax])) > margin_tol:
            raise ContractError(
                f"margin on axis {ax} is not uniform (tolerance {margin_tol:g}); "
                "project the array first"
            )
    contraction = float(_score_contraction(r1, r2) @ vec(g))
    shift = 3.0 * math.sqrt((r1 + 1) * (r2 + 1) / ((r1 - 1) * (r2 - 1)))
    return yule_kappa(r1, r2) * contraction - shift


def yule_inference(counts, support=None, *, ci_level: float = 0.95,
                   smooth: bool = True, config: IpfConfig | None = None,
                   basis: BasisBundle | None = None) -> YuleEstimate:
    """Estimate the concordance coefficient from a two-way count table.

    Pipeline: smoothed relative frequencies, projection onto the
    uniform-margin class, coefficient of the projected array, plug-in
    sandwich variance contracted through the score vector, symmetric
    normal confidence interval.
    """
    counts = np.asarray(counts)
    if counts.ndim != 2:
        raise ContractError("concordance inference needs a two-way table")
    if not 0.0 < ci_level < 1.0:
        raise ContractError("ci_level must lie strictly in (0, 1)")
    n = int(counts.sum())
    if n < 1:
        raise ContractError("the table is empty")
    p_hat = smoothed_empirical(counts, support, smooth=smooth)
    gamma_hat = copula_array(p_hat, config).array
    upsilon = yule_coefficient(gamma_hat, margin_tol=1e-6)
    bundle = basis if basis is not None else dependence_basis(p_hat > 0, config=config)
    cov = plugin_covariance(bundle, p_hat, gamma_hat)
    r1, r2 = counts.shape
    kappa = yule_kappa(r1, r2)
    w = _score_contraction(r1, r2)
    variance = float(kappa ** 2 * (w @ cov.cells @ w))
    std_error = math.sqrt(max(variance, 0.0) / n)
    z = normal_quantile(0.5 + ci_level / 2.0)
    return YuleEstimate(upsilon=upsilon, variance=variance, std_error=std_error,
                        ci_level=ci_level,
                        ci=(upsilon - z * std_error, upsilon + z * std_error),
                        n=n, kappa=kappa)


def quasi_independence_test(counts, support=None, *,
                            basis: BasisBundle | None = None,
                            smooth: bool = True,
                            config: IpfConfig | None = None) -> QuasiIndependenceResult:
    """Chi-square test of quasi-independence from a count table.

    Under the null the variables are independent within the declared
    support, i.e. all dependence coordinates vanish; the Wald statistic
    ``n * coords' @ inv(Sigma_hat) @ coords`` is asymptotically chi-square
    with ``d_circ`` degrees of freedom.  The statistic does not depend on
    the basis choice.
    """
    counts = np.asarray(counts)
    n = int(counts.sum())
    if n < 1:
        raise ContractError("the table is empty")
    p_hat = smoothed_empirical(counts, support, smooth=smooth)
    if support is None:
        support = counts > 0
    gamma_hat = copula_array(p_hat, config).array
    bundle = basis if basis is not None else dependence_basis(support, config=config)
    if bundle.d_circ == 0:
        raise DegenerateTestError(
            "the support admits a single uniform-margin array, so "
            "quasi-independence holds trivially (0 degrees of freedom)"
        )
    coords = coords_of_copula(bundle, gamma_hat)
    cov = plugin_covariance(bundle, p_hat, gamma_hat)
    statistic = float(n * coords @ solve_spd(cov.coords, coords))
    statistic = max(statistic, 0.0)
    return QuasiIndependenceResult(coords=coords, statistic=statistic,
                                   dof=bundle.d_circ,
                                   p_value=chi_square_upper_tail(statistic, bundle.d_circ))
