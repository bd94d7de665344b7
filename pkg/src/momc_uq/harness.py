"""Experiment driver: reference generation, convergence sweeps, single runs
and hierarchy diagnostics, with CSV emission.

Outputs are byte-reproducible: per-sample solves land in index-addressed
arrays and every reduction runs in a fixed order, so worker count never
changes a result. Wall-time columns are written as 0.0 unless timing is
explicitly enabled, keeping default CSVs bit-identical across machines
and worker counts.
"""

from __future__ import annotations

import json
import multiprocessing as mp
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError, StaleReferenceError
from .estimators import (LevelSpec, apmomc_bifidelity, mc_estimate,
                         hierarchy_diagnostics, mlmc_estimate, momc_recursive)
from .mesh import Grid1D
from .models import reduced_model_of
from .sampling import SampleHierarchy, allocate_samples, derive_seed
from .stepping import advance, stepper_for

REFERENCE_SEED_TAG = 0x5EED00EF  # tag mixed into the base seed

CSV_HEADER = ("M_L,M_levels,total_cost,err_expectation_L1,err_variance_L1,"
              "predicted_bound,replication,wall_ms")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def output_var_names(model) -> tuple:
    names = list(model.var_names)
    report_name, selector = model.report_spec()
    if callable(selector):
        names.append(report_name)
    return tuple(names)


def _with_report_rows(model, values: np.ndarray) -> np.ndarray:
    _, selector = model.report_spec()
    if callable(selector):
        extra = selector(values)
        return np.concatenate([values, extra[None, :]], axis=0)
    return values


def report_row_index(model) -> int:
    names = output_var_names(model)
    report_name, _ = model.report_spec()
    return names.index(report_name)


# ---------------------------------------------------------------------------
# per-sample solves (worker entry points)

_CTX: dict = {}


def _solve_sample(task):
    level_idx, k = task
    model = _CTX["model"]
    level: LevelSpec = _CTX["levels"][level_idx]
    grid: Grid1D = _CTX["grid"]
    z = _CTX["hierarchy"].block(k, k + 1)[0]
    return k, solve_level_sample(model, level, grid, z, _CTX["cfl"],
                                 _CTX["t_end"])


def _init_worker_full(model, cfl, t_end, levels, grid, seed, dist):
    _CTX.update(model=model, cfl=cfl, t_end=t_end, levels=levels, grid=grid,
                hierarchy=SampleHierarchy(seed, dist))


def solve_level_sample(model, level: LevelSpec, grid: Grid1D, z, cfl,
                       t_end: float) -> np.ndarray:
    """One deterministic run for one hierarchy level and one sample."""
    run_grid = grid if level.n_cells is None else \
        Grid1D(grid.x_min, grid.x_max, level.n_cells)
    if level.fidelity == "reduced":
        reduced = reduced_model_of(model)
        stepper = stepper_for(reduced, level.order, cfl)
        out = advance(reduced, stepper, run_grid, z, t_end)
        lifted = model.lift_reduced(out.values, reduced.grid_fields(run_grid,
                                                                    np.atleast_1d(z)))
        return _with_report_rows(model, lifted)
    stepper = stepper_for(model, level.order, cfl)
    out = advance(model, stepper, run_grid, z, t_end)
    return _with_report_rows(model, out.values)


class LevelEvaluator:
    """Evaluates hierarchy levels on sample prefixes, caching runs so a
    sweep reuses the work of its largest point; optional process pool."""

    def __init__(self, cfg: ExperimentConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.hierarchy = SampleHierarchy(seed, cfg.model.distribution())
        self._cache: dict[int, np.ndarray] = {}

    def __call__(self, level_idx: int, count: int) -> np.ndarray:
        cached = self._cache.get(level_idx)
        have = 0 if cached is None else cached.shape[0]
        if have < count:
            tail = self._evaluate(level_idx, have, count)
            self._cache[level_idx] = tail if cached is None else \
                np.concatenate([cached, tail], axis=0)
        return self._cache[level_idx][:count]

    def _evaluate(self, level_idx: int, start: int, count: int) -> np.ndarray:
        cfg = self.cfg
        tasks = [(level_idx, k) for k in range(start, count)]
        if cfg.workers <= 1:
            rows = []
            for _, k in tasks:
                z = self.hierarchy.block(k, k + 1)[0]
                rows.append(solve_level_sample(cfg.model, cfg.levels[level_idx],
                                               cfg.grid, z, cfg.cfl, cfg.t_end))
            return np.stack(rows)
        ctx = mp.get_context("fork")
        with ctx.Pool(
            cfg.workers,
            initializer=_init_worker_full,
            initargs=(cfg.model, cfg.cfl, cfg.t_end, cfg.levels, cfg.grid,
                      self.seed, cfg.model.distribution()),
        ) as pool:
            results = pool.map(_solve_sample, tasks,
                               chunksize=max(1, count // (4 * cfg.workers)))
        results.sort(key=lambda item: item[0])
        return np.stack([arr for _, arr in results])


# ---------------------------------------------------------------------------
# reference solutions


def reference_paths(cfg: ExperimentConfig):
    stem = f"reference_{cfg.model_sha()[:12]}"
    return cfg.out_dir / f"{stem}.npy", cfg.out_dir / f"{stem}.json"


def run_reference(cfg: ExperimentConfig):
    """Plain MC with the highest-order solver at M_ref; persisted for reuse."""
    seed = derive_seed(cfg.seed, REFERENCE_SEED_TAG)
    level = LevelSpec(order=cfg.reference_order, cost=0.0)
    ref_cfg_levels = [level]
    evaluator = LevelEvaluator(
        _replace_levels(cfg, ref_cfg_levels), seed)
    samples = evaluator(0, cfg.reference_m)
    mean = samples.mean(axis=0)
    var = samples.var(axis=0, ddof=1)
    arr = np.stack([mean, var])
    npy_path, json_path = reference_paths(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    np.save(npy_path, arr)
    meta = {
        "seed": cfg.seed,
        "reference_seed": seed,
        "m_ref": cfg.reference_m,
        "order": cfg.reference_order,
        "model_sha": cfg.model_sha(),
        "var_names": list(output_var_names(cfg.model)),
        "grid": [cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_cells],
    }
    json_path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return arr, meta


def load_reference(cfg: ExperimentConfig):
    npy_path, json_path = reference_paths(cfg)
    if not npy_path.exists() or not json_path.exists():
        raise StaleReferenceError(
            f"no reference at {npy_path}; run the 'reference' command first")
    meta = json.loads(json_path.read_text())
    if meta.get("model_sha") != cfg.model_sha():
        raise StaleReferenceError("persisted reference does not match this "
                                  "configuration (model hash mismatch)")
    if meta.get("m_ref") != cfg.reference_m or meta.get("seed") != cfg.seed:
        raise StaleReferenceError("persisted reference was built with a "
                                  "different M_ref or seed")
    return np.load(npy_path), meta


def _replace_levels(cfg: ExperimentConfig, levels):
    from dataclasses import replace
    return replace(cfg, levels=levels)


# ---------------------------------------------------------------------------
# sweeps


def _estimate(cfg: ExperimentConfig, counts, evaluator):
    names = output_var_names(cfg.model)
    if cfg.estimator == "mc":
        samples = evaluator(0, counts[0])
        return mc_estimate(samples, cfg.grid, names, cfg.levels[0].cost)
    if cfg.estimator == "momc":
        return momc_recursive(cfg.levels, counts, evaluator, cfg.grid, names,
                              cfg.alpha_mode)
    if cfg.estimator == "apmomc-bifidelity":
        return apmomc_bifidelity(cfg.levels, counts, evaluator, cfg.grid, names,
                                 cfg.alpha_mode)
    if cfg.estimator == "mlmc":
        return mlmc_estimate(cfg.levels, counts, evaluator, cfg.grid, names)
    raise ConfigError(f"unknown estimator {cfg.estimator!r}")


def counts_for(cfg: ExperimentConfig, m_top: int):
    return allocate_samples(m_top, [lv.cost for lv in cfg.levels])


def run_sweep(cfg: ExperimentConfig, csv_name: str = "sweep.csv") -> Path:
    """Error-vs-samples sweep against the persisted reference; emits one CSV
    row per (M_L, replication) plus replication-averaged rows."""
    ref, _meta = load_reference(cfg)
    row_idx = report_row_index(cfg.model)
    ref_mean = ref[0, row_idx]
    ref_var = ref[1, row_idx]
    dx = cfg.grid.dx

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / csv_name
    records = []
    with open(path, "w") as fh:
        fh.write(f"# seed={cfg.seed}\n")
        fh.write(f"# config_sha256={cfg.config_sha()}\n")
        fh.write(f"# model_sha256={cfg.model_sha()}\n")
        fh.write(CSV_HEADER + "\n")
        for rep in range(cfg.replications):
            rep_seed = derive_seed(cfg.seed, rep + 1)
            evaluator = LevelEvaluator(cfg, rep_seed)
            # warm the cache at the largest sweep point so smaller points
            # reuse prefixes of the same runs
            counts_max = counts_for(cfg, max(cfg.sweep))
            for l in range(len(cfg.levels)):
                evaluator(l, counts_max[l])
            for m_top in sorted(cfg.sweep):
                t0 = time.perf_counter()
                counts = counts_for(cfg, m_top)
                est = _estimate(cfg, counts, evaluator)
                err_mean = dx * float(np.sum(np.abs(est.expectation[row_idx]
                                                    - ref_mean)))
                err_var = dx * float(np.sum(np.abs(est.variance[row_idx]
                                                   - ref_var)))
                bound = est.diagnostics.get("bound")
                bound_val = float(bound[row_idx]) if bound is not None else 0.0
                wall = (time.perf_counter() - t0) * 1e3 if cfg.timings else 0.0
                rec = (m_top, counts, est.total_cost, err_mean, err_var,
                       bound_val, rep, wall)
                records.append(rec)
                fh.write(_record_line(rec))
                fh.flush()
        for m_top in sorted(cfg.sweep):
            rows = [r for r in records if r[0] == m_top]
            counts = rows[0][1]
            cost = rows[0][2]
            avg = tuple(float(np.mean([r[i] for r in rows])) for i in (3, 4, 5))
            wall = float(np.sum([r[7] for r in rows]))
            fh.write(_record_line((m_top, counts, cost, *avg, "avg", wall)))
        fh.flush()
    return path


def _record_line(rec) -> str:
    m_top, counts, cost, err_mean, err_var, bound, rep, wall = rec
    return ",".join([
        str(m_top),
        ";".join(str(c) for c in counts),
        _fmt(cost),
        _fmt(err_mean),
        _fmt(err_var),
        _fmt(bound),
        str(rep),
        _fmt(wall),
    ]) + "\n"


def read_sweep_csv(path: Path):
    """Parse a sweep CSV into a list of dict records (strings preserved)."""
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        parts = line.split(",")
        rows.append(dict(zip(header, parts)))
    return rows


# ---------------------------------------------------------------------------
# single runs and diagnostics


def run_solve(cfg: ExperimentConfig, z_value, order: int | None = None,
              csv_name: str = "solution.csv") -> Path:
    """One deterministic run at a fixed random input; emits x plus one
    column per carried variable."""
    order = order if order is not None else cfg.reference_order
    level = LevelSpec(order=order, cost=0.0)
    values = solve_level_sample(cfg.model, level, cfg.grid,
                                np.atleast_1d(np.asarray(z_value, float)),
                                cfg.cfl, cfg.t_end)
    names = output_var_names(cfg.model)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / csv_name
    x = cfg.grid.cell_centers()
    with open(path, "w") as fh:
        fh.write(f"# seed={cfg.seed}\n")
        fh.write(f"# config_sha256={cfg.config_sha()}\n")
        fh.write(f"# model_sha256={cfg.model_sha()}\n")
        fh.write("x," + ",".join(names) + "\n")
        for i in range(len(x)):
            fh.write(",".join([_fmt(x[i])] + [_fmt(values[r, i])
                                              for r in range(len(names))]) + "\n")
    return path


def run_diag(cfg: ExperimentConfig, csv_name: str = "diag.csv") -> Path:
    """Evaluate the hierarchy once at the largest sweep point and dump the
    per-level correlation diagnostics."""
    rep_seed = derive_seed(cfg.seed, 1)
    evaluator = LevelEvaluator(cfg, rep_seed)
    counts = counts_for(cfg, max(cfg.sweep))
    samples = [evaluator(l, counts[l]) for l in range(len(cfg.levels))]
    diag = hierarchy_diagnostics(samples, counts, cfg.grid.dx)
    names = output_var_names(cfg.model)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / csv_name
    with open(path, "w") as fh:
        fh.write(f"# seed={cfg.seed}\n")
        fh.write(f"# config_sha256={cfg.config_sha()}\n")
        fh.write(f"# model_sha256={cfg.model_sha()}\n")
        fh.write("level,variable,m,sigma,tau,xi,bound_term\n")
        for l in range(len(cfg.levels)):
            for r, name in enumerate(names):
                term = diag["xi"][l, r] * diag["sigma"][l, r] / np.sqrt(counts[l])
                fh.write(",".join([
                    str(l), name, str(counts[l]),
                    _fmt(diag["sigma"][l, r]), _fmt(diag["tau"][l, r]),
                    _fmt(diag["xi"][l, r]), _fmt(term),
                ]) + "\n")
    return path
