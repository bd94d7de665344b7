"""Statistical estimators over solver ensembles.

Plain Monte Carlo, the recursive multi-order control-variate estimator with
per-cell quasi-optimal weights, its bi-fidelity extension using a reduced
asymptotic-limit model as the cheapest level, and a mesh-hierarchy MLMC
baseline. All estimators consume per-level sample arrays of shape
(M_l, n_rows, n_cells) whose leading M_L..M_1 prefixes share the same
random inputs, so covariances between adjacent levels are computed on the
shared prefix without extra solver runs.

The quantity estimated cellwise is the expectation of every carried row;
variance fields apply the same control-variate combination to the
per-level unbiased variance estimators, reusing the mean's weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import Grid1D

VAR_FLOOR_REL = 1.0e-14
VAR_FLOOR_ABS = 1.0e-30


@dataclass(frozen=True)
class LevelSpec:
    """One hierarchy level: solver order, fidelity, grid size and run cost."""

    order: int
    cost: float
    fidelity: str = "full"      # 'full' | 'reduced'
    n_cells: int | None = None  # None -> experiment grid (order hierarchies)


@dataclass
class MomentField:
    """Estimator output: cellwise moments plus weights and diagnostics."""

    grid: Grid1D
    var_names: tuple
    expectation: np.ndarray           # (n_rows, n_cells)
    variance: np.ndarray              # (n_rows, n_cells)
    m_counts: tuple
    total_cost: float
    alphas: dict = field(default_factory=dict)       # level l -> (n_rows, n)
    diagnostics: dict = field(default_factory=dict)  # name -> per-level arrays

    def row(self, name: str) -> int:
        return self.var_names.index(name)


def mc_moments(samples: np.ndarray):
    """Sample mean and unbiased variance along the first axis."""
    m = samples.shape[0]
    if m < 1:
        raise ValueError("need at least one sample")
    mean = samples.mean(axis=0)
    if m == 1:
        return mean, np.zeros_like(mean)
    var = samples.var(axis=0, ddof=1)
    return mean, var


def sample_cov(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unbiased cellwise covariance of two ensembles on shared samples."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    m = a.shape[0]
    if m < 2:
        raise ValueError("covariance needs at least two samples")
    da = a - a.mean(axis=0)
    db = b - b.mean(axis=0)
    return np.einsum("k...,k...->...", da, db) / (m - 1)


def alpha_quasi_optimal(cov: np.ndarray, var_low: np.ndarray,
                        var_high: np.ndarray) -> np.ndarray:
    """Cellwise control weight cov/var_low.

    Cells whose control-variate variance sits below the degeneracy floor
    contribute nothing (weight zero); elsewhere the weight is clamped to
    the interval |alpha| <= sqrt(var_high/var_low) implied by a unit
    correlation bound (a no-op for weights estimated from shared samples,
    a guard for externally supplied ones).
    """
    floor = np.maximum(VAR_FLOOR_REL * np.max(var_low), VAR_FLOOR_ABS)
    live = var_low > floor
    safe_low = np.where(live, var_low, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(live, cov / safe_low, 0.0)
    bound = np.sqrt(np.maximum(var_high, 0.0) / safe_low)
    return np.clip(alpha, -bound, bound)


def mc_estimate(samples: np.ndarray, grid: Grid1D, var_names, cost_per_run: float
                ) -> MomentField:
    mean, var = mc_moments(samples)
    m = samples.shape[0]
    diag = {}
    if m >= 2:
        sigma = grid.dx * np.sum(np.sqrt(var), axis=-1)
        diag["sigma"] = sigma[None, :]
        diag["bound"] = sigma / np.sqrt(m)
    return MomentField(grid, tuple(var_names), mean, var, (m,),
                       float(m) * cost_per_run, {}, diag)


def momc_two_level(high: np.ndarray, low_shared: np.ndarray,
                   low_full: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Two-level control-variate mean: the high-accuracy ensemble corrected
    by the weighted difference of the control's shared- and full-sample
    means."""
    if high.shape[0] != low_shared.shape[0]:
        raise ValueError("high and shared-control ensembles must pair samples")
    if low_full.shape[0] < low_shared.shape[0]:
        raise ValueError("control ensemble must extend the shared prefix")
    e_high = high.mean(axis=0)
    e_low_shared = low_shared.mean(axis=0)
    e_low_full = low_full.mean(axis=0)
    return e_high - alpha * (e_low_shared - e_low_full)


def _resolve_alpha(alpha_mode, cov, var_low, var_high):
    if alpha_mode == "quasi-optimal":
        return alpha_quasi_optimal(cov, var_low, var_high)
    if alpha_mode == "scalar":
        # one weight per variable: the constant minimizing the spatially
        # integrated variance of the combination
        cov_int = np.sum(cov, axis=-1, keepdims=True)
        var_int = np.sum(var_low, axis=-1, keepdims=True)
        var_hi_int = np.sum(var_high, axis=-1, keepdims=True)
        alpha = alpha_quasi_optimal(cov_int, var_int, var_hi_int)
        return np.broadcast_to(alpha, var_low.shape).copy()
    if alpha_mode == "zero":
        return np.zeros_like(var_low)
    return np.full_like(var_low, float(alpha_mode))


def _telescope(level_samples: list[np.ndarray], counts: list[int],
               alpha_mode) -> tuple[np.ndarray, np.ndarray, dict, dict]:
    """Shared engine for the recursive control-variate combination.

    level_samples is ordered cheapest first; entry l has counts[l] samples
    whose leading counts[l+1] rows pair with level l+1. Returns the mean
    field, the variance field, the per-level weights, and diagnostics.
    """
    n_levels = len(level_samples)
    top = n_levels - 1
    mean_top, var_top = mc_moments(level_samples[top])
    mean_est = mean_top.copy()
    var_est = var_top.copy()
    alphas: dict[int, np.ndarray] = {}
    rho_fields: dict[int, np.ndarray] = {}
    chain = None
    for l in range(top, 0, -1):
        m_hi = counts[l]
        hi = level_samples[l]
        lo = level_samples[l - 1]
        lo_shared = lo[:m_hi]
        cov = sample_cov(hi, lo_shared)
        var_lo_shared = lo_shared.var(axis=0, ddof=1)
        var_hi = hi.var(axis=0, ddof=1)
        alpha = _resolve_alpha(alpha_mode, cov, var_lo_shared, var_hi)
        alphas[l] = alpha
        denom = np.sqrt(np.maximum(var_hi * var_lo_shared, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
        rho_fields[l] = np.clip(rho, -1.0, 1.0)

        chain = alpha if chain is None else chain * alpha
        mean_shared, var_shared = mc_moments(lo_shared)
        mean_full, var_full = mc_moments(lo)
        mean_est = mean_est - chain * (mean_shared - mean_full)
        var_est = var_est - chain * (var_shared - var_full)
    var_est = np.maximum(var_est, 0.0)
    diag = {"rho": rho_fields}
    return mean_est, var_est, alphas, diag


def hierarchy_diagnostics(level_samples: list[np.ndarray], counts: list[int],
                          dx: float) -> dict:
    """Correlation spreads and the predicted statistical error bound.

    Per level l (cheapest = 1): sigma_l = || sqrt((1 - rho^2) Var[u_l]) ||_L1
    (sigma_1 drops the correlation factor), tau_l = || rho sqrt(Var[u_l]) ||_L1,
    xi_l the product of the tau factors above level l, and the bound
    sum_l xi_l sigma_l / sqrt(M_l). All quantities are per carried row.
    """
    n_levels = len(level_samples)
    n_rows = level_samples[0].shape[1]
    sigma = np.zeros((n_levels, n_rows))
    tau = np.zeros((n_levels, n_rows))
    _, var_1 = mc_moments(level_samples[0])
    sigma[0] = dx * np.sum(np.sqrt(var_1), axis=-1)
    for l in range(1, n_levels):
        m_hi = counts[l]
        hi = level_samples[l]
        lo_shared = level_samples[l - 1][:m_hi]
        cov = sample_cov(hi, lo_shared)
        var_hi = hi.var(axis=0, ddof=1)
        var_lo = lo_shared.var(axis=0, ddof=1)
        denom = np.sqrt(np.maximum(var_hi * var_lo, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
        rho = np.clip(rho, -1.0, 1.0)
        sigma[l] = dx * np.sum(np.sqrt((1.0 - rho**2) * np.maximum(var_hi, 0.0)),
                               axis=-1)
        tau[l] = dx * np.sum(np.abs(rho) * np.sqrt(np.maximum(var_hi, 0.0)),
                             axis=-1)
    xi = np.ones((n_levels, n_rows))
    for l in range(n_levels - 2, -1, -1):
        xi[l] = xi[l + 1] * tau[l + 1]
    bound = np.zeros(n_rows)
    for l in range(n_levels):
        bound += xi[l] * sigma[l] / np.sqrt(counts[l])
    return {"sigma": sigma, "tau": tau, "xi": xi, "bound": bound}


def momc_recursive(levels: list[LevelSpec], counts: list[int], evaluator,
                   grid: Grid1D, var_names, alpha_mode="quasi-optimal"
                   ) -> MomentField:
    """Recursive multi-order estimator over nested sample prefixes.

    `levels`/`counts` are ordered cheapest first; `evaluator(l, m)` returns
    the first m sample solutions of level l as an (m, n_rows, n) array.
    """
    if len(levels) != len(counts):
        raise ValueError("levels and counts must align")
    for lo, hi in zip(counts[1:], counts[:-1]):
        if lo > hi:
            raise ValueError("sample counts must not increase with level")
    samples = [evaluator(l, counts[l]) for l in range(len(levels))]
    mean, var, alphas, diag = _telescope(samples, counts, alpha_mode)
    diag.update(hierarchy_diagnostics(samples, counts, grid.dx))
    cost = float(sum(m * lv.cost for m, lv in zip(counts, levels)))
    return MomentField(grid, tuple(var_names), mean, var, tuple(counts), cost,
                       alphas, diag)


def apmomc_bifidelity(levels: list[LevelSpec], counts: list[int], evaluator,
                      grid: Grid1D, var_names, alpha_mode="quasi-optimal"
                      ) -> MomentField:
    """Bi-fidelity variant: the cheapest level must be the reduced model,
    whose lifted solutions share the full model's variable layout."""
    if levels[0].fidelity != "reduced":
        raise ValueError("bi-fidelity estimator needs a reduced deepest level")
    return momc_recursive(levels, counts, evaluator, grid, var_names, alpha_mode)


def mlmc_estimate(levels: list[LevelSpec], counts: list[int], evaluator,
                  grid: Grid1D, var_names) -> MomentField:
    """Mesh-hierarchy telescoping estimator.

    Levels are ordered coarsest first and must use factor-2 nested grids
    ending at the experiment grid; coarse solutions are prolongated by
    piecewise-constant injection for the level differences.
    """
    n_fine = grid.n_cells
    for lv in levels:
        n_l = lv.n_cells or n_fine
        if n_fine % n_l != 0:
            raise ValueError(f"level grid {n_l} does not nest in {n_fine}")
    samples = [evaluator(l, counts[l]) for l in range(len(levels))]

    def prolong(arr: np.ndarray) -> np.ndarray:
        factor = n_fine // arr.shape[-1]
        return np.repeat(arr, factor, axis=-1) if factor > 1 else arr

    mean_est, var_est = mc_moments(prolong(samples[0]))
    bound = grid.dx * np.sum(np.sqrt(var_est), axis=-1) / np.sqrt(counts[0])
    for l in range(1, len(levels)):
        m_l = counts[l]
        fine = prolong(samples[l])
        coarse = prolong(samples[l - 1][:m_l])
        dmean, dvar = mc_moments(fine - coarse)
        mean_est = mean_est + dmean
        var_est = var_est + (fine.var(axis=0, ddof=1) - coarse.var(axis=0, ddof=1))
        bound = bound + grid.dx * np.sum(np.sqrt(dvar), axis=-1) / np.sqrt(m_l)
    var_est = np.maximum(var_est, 0.0)
    cost = float(sum(m * lv.cost for m, lv in zip(counts, levels)))
    return MomentField(grid, tuple(var_names), mean_est, var_est, tuple(counts),
                       cost, {}, {"bound": bound})
