"""Sampling and large-sample verification harness.

Monte Carlo studies of the projected estimator: covariance agreement with
the sandwich formula, per-cell normality, confidence-interval coverage for
the concordance coefficient, and null calibration of the
quasi-independence test.  Replicates draw independent substreams from a
single seed, so reports are reproducible and order-independent; the
projection runs vectorised across all replicates at once.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .arrays import check_probability_array, vec
from .asymptotics import sandwich_covariance
from .basis import BasisBundle, dependence_basis
from .errors import ContractError, MaxSweepsExceeded
from .inference import normal_quantile, yule_coefficient, yule_kappa, _score_contraction
from .projection import IpfConfig, copula_array, uniform_targets

#: environment variable capping the simulation worker threads
THREADS_ENV = "DISCOPULA_THREADS"


@dataclass(frozen=True)
class SimScenario:
    """A population array plus the sampling plan."""

    truth: np.ndarray
    n: int
    replicates: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("sample size must be at least 1")
        if self.replicates < 1:
            raise ContractError("need at least one replicate")


def sample_counts(truth, n: int, rng: np.random.Generator) -> np.ndarray:
    """One multinomial count array of total ``n`` drawn from ``truth``."""
    truth = check_probability_array(truth)
    if n < 1:
        raise ContractError("sample size must be at least 1")
    flat = rng.multinomial(n, vec(truth) / vec(truth).sum())
    return flat.reshape(truth.shape, order="F")


def replicate_rngs(seed: int, replicates: int) -> list[np.random.Generator]:
    """Independent per-replicate generators spawned from one seed."""
    root = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in root.spawn(replicates)]


def _batched_uniform_projection(batch: np.ndarray, config: IpfConfig) -> np.ndarray:
    """Project every array in ``batch`` (replicates on axis 0) at once.

    Replicates are frozen as soon as their own margin error passes the
    tolerance, so each result is independent of how the batch was chunked.
    """
    a = np.array(batch, dtype=float)
    d = a.ndim - 1
    reps = a.shape[0]
    targets = uniform_targets(a.shape[1:])
    active = np.ones(reps, dtype=bool)
    active_view = active.reshape((reps,) + (1,) * d)
    err = np.inf
    for sweep in range(1, config.max_sweeps + 1):
        for ax in range(d):
            other = tuple(k for k in range(1, d + 1) if k != ax + 1)
            current = a.sum(axis=other, keepdims=True)
            factor = np.ones_like(current)
            np.divide(targets[ax].reshape(current.shape[1:]), current, out=factor,
                      where=(current > 0) & active_view)
            a *= factor
        per_rep = np.zeros(reps)
        for ax in range(d):
            other = tuple(k for k in range(1, d + 1) if k != ax + 1)
            dev = np.abs(a.sum(axis=other) - targets[ax])
            per_rep = np.maximum(per_rep, dev.max(axis=1))
        newly_done = active & (per_rep <= config.margin_tol)
        active[newly_done] = False
        err = float(per_rep[active].max()) if active.any() else 0.0
        if not active.any():
            return a
    raise MaxSweepsExceeded(
        f"batched projection did not reach tolerance {config.margin_tol:.1e} "
        f"within {config.max_sweeps} sweeps ({int(active.sum())} replicates "
        f"pending, worst error {err:.3e})"
    )


def _vec_batch(batch: np.ndarray) -> np.ndarray:
    """Column-major vectorisation of each array in a (replicates, ...) stack."""
    reps = batch.shape[0]
    return np.moveaxis(batch, 0, -1).reshape(-1, reps, order="F").T


@dataclass
class CltReport:
    """Summary of one Monte Carlo study (all rates are proportions)."""

    shape: tuple[int, ...]
    n: int
    replicates: int
    seed: int
    d_circ: int
    cov_rel_frobenius_error: float
    ks_distances: list[float]
    max_abs_error_median: float
    yule_ci_level: float | None = None
    yule_coverage: float | None = None
    truth_upsilon: float | None = None
    null_rejection_rate: float | None = None
    null_level: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "n": self.n,
            "replicates": self.replicates,
            "seed": self.seed,
            "d_circ": self.d_circ,
            "cov_rel_frobenius_error": self.cov_rel_frobenius_error,
            "ks_distances": self.ks_distances,
            "max_abs_error_median": self.max_abs_error_median,
            "yule_ci_level": self.yule_ci_level,
            "yule_coverage": self.yule_coverage,
            "truth_upsilon": self.truth_upsilon,
            "null_rejection_rate": self.null_rejection_rate,
            "null_level": self.null_level,
            **self.extras,
        }


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _simulate_gammas(scenario: SimScenario, support, config: IpfConfig,
                     threads: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-replicate smoothed arrays and their projections, stacked."""
    rngs = replicate_rngs(scenario.seed, scenario.replicates)
    q = support.astype(float) / support.sum()
    n = scenario.n

    def run_chunk(indices):
        counts = np.stack([
            sample_counts(scenario.truth, n, rngs[i]) for i in indices
        ])
        p_hat = (n / (n + 1.0)) * (counts / n) + (1.0 / (n + 1.0)) * q
        return p_hat, _batched_uniform_projection(p_hat, config)

    chunks = np.array_split(np.arange(scenario.replicates), threads)
    chunks = [c for c in chunks if c.size]
    if len(chunks) == 1:
        results = [run_chunk(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chunk, chunks))
    p_hats = np.concatenate([r[0] for r in results])
    gammas = np.concatenate([r[1] for r in results])
    return p_hats, gammas


def clt_study(scenario: SimScenario, basis: BasisBundle | None = None, *,
              config: IpfConfig | None = None, ci_level: float = 0.95,
              null_level: float = 0.05, threads: int | None = None) -> CltReport:
    """Monte Carlo check of the large-sample distribution of the estimator.

    Reports (i) the relative Frobenius distance between the empirical
    covariance of ``sqrt(n) (gamma_hat - gamma)`` and the sandwich matrix,
    (ii) per-support-cell Kolmogorov-Smirnov distances of the standardised
    errors from the standard normal, (iii) confidence-interval coverage
    for the concordance coefficient (two-way tables only), and (iv) the
    rejection rate of the quasi-independence test when the population is
    itself quasi-independent.
    """
    cfg = config or IpfConfig()
    truth = check_probability_array(scenario.truth)
    support = truth > 0
    bundle = basis if basis is not None else dependence_basis(support, config=cfg)
    gamma_truth = copula_array(truth, cfg).array
    exact = sandwich_covariance(bundle, truth, gamma_truth)
    threads = _thread_count(threads)

    p_hats, gammas = _simulate_gammas(scenario, support, cfg, threads)
    reps, n = scenario.replicates, scenario.n
    flat_g = _vec_batch(gammas)
    errors = np.sqrt(n) * (flat_g - vec(gamma_truth))

    emp_cov = (errors.T @ errors) / reps - np.outer(errors.mean(0), errors.mean(0))
    denom = np.linalg.norm(exact.cells)
    cov_err = float(np.linalg.norm(emp_cov - exact.cells) / denom) if denom > 0 else 0.0

    sel = vec(support)
    ks = []
    diag = np.sqrt(np.clip(np.diag(exact.cells), 0.0, None))
    for pos in np.flatnonzero(sel):
        sd = diag[pos]
        if sd < 1e-12:
            ks.append(float("nan"))
            continue
        z = np.sort(errors[:, pos] / sd)
        grid = np.arange(1, reps + 1) / reps
        cdf = scipy.special.ndtr(z)
        ks.append(float(np.max(np.maximum(grid - cdf, cdf - (grid - 1.0 / reps)))))

    max_abs = np.max(np.abs(flat_g - vec(gamma_truth)), axis=1)
    report = CltReport(
        shape=tuple(truth.shape), n=n, replicates=reps, seed=scenario.seed,
        d_circ=bundle.d_circ, cov_rel_frobenius_error=cov_err,
        ks_distances=ks, max_abs_error_median=float(np.median(max_abs)),
    )

    if bundle.d_circ >= 1:
        sel_cols = bundle.selected_columns
        p_sel = _vec_batch(p_hats)[:, sel]
        g_sel = flat_g[:, sel]
        bread = np.einsum("sk,bs,sl->bkl", sel_cols, 1.0 / g_sel, sel_cols)
        meat = np.einsum("sk,bs,sl->bkl", sel_cols, 1.0 / p_sel, sel_cols)
        bread_inv = np.linalg.inv(bread)
        sigma_coords = bread_inv @ meat @ bread_inv

        if truth.ndim == 2:
            r1, r2 = truth.shape
            kappa = yule_kappa(r1, r2)
            w = _score_contraction(r1, r2)
            shift = 3.0 * np.sqrt((r1 + 1) * (r2 + 1) / ((r1 - 1) * (r2 - 1)))
            ups_truth = yule_coefficient(gamma_truth, margin_tol=1e-6)
            ups_hat = kappa * (flat_g @ w) - shift
            wa = w @ bundle.columns
            var_hat = kappa ** 2 * np.einsum("k,bkl,l->b", wa, sigma_coords, wa)
            half = normal_quantile(0.5 + ci_level / 2.0) * np.sqrt(np.clip(var_hat, 0, None) / n)
            report.yule_ci_level = ci_level
            report.yule_coverage = float(np.mean(np.abs(ups_hat - ups_truth) <= half))
            report.truth_upsilon = ups_truth

        coords_truth = np.linalg.lstsq(bundle.columns,
                                       vec(gamma_truth) - vec(bundle.anchor),
                                       rcond=None)[0]
        if np.max(np.abs(coords_truth)) < 1e-10:
            pinv = np.linalg.pinv(bundle.columns)
            coords_hat = (flat_g - vec(bundle.anchor)) @ pinv.T
            stat = n * np.einsum("bk,bkl,bl->b", coords_hat,
                                 np.linalg.inv(sigma_coords), coords_hat)
            pvals = scipy.special.gammaincc(bundle.d_circ / 2.0,
                                            np.clip(stat, 0, None) / 2.0)
            report.null_rejection_rate = float(np.mean(pvals < null_level))
            report.null_level = null_level
    return report
