"""Experiment configuration: flat key-value files with dotted sections,
plus a JSON mirror. Unset keys fall back to per-model desk-scale defaults
recorded here, so full-scale reproduction is a config change only.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .estimators import LevelSpec
from .mesh import Grid1D
from .models import MODEL_KINDS

ESTIMATORS = ("mc", "mlmc", "momc", "apmomc-bifidelity")

# desk-scale defaults per model family; paper-scale values in comments
_FAMILY_DEFAULTS = {
    "burgers": dict(x_min=-5.0, x_max=5.0, n_cells=200, t_end=2.5,
                    costs=(1.0, 4.0, 9.0), sweep=(8, 16, 32, 64, 128),
                    m_ref=2000,      # full scale: 20000
                    replications=20, variable="u"),
    "jinxin": dict(x_min=-5.0, x_max=5.0, n_cells=200, t_end=2.5,
                   costs=(1.0, 4.0, 9.0), sweep=(8, 16, 32, 64),
                   m_ref=500, replications=20, variable="u"),
    "swe": dict(x_min=0.0, x_max=30.0, n_cells=250,   # full scale: 500 cells
                t_end=1.0, costs=(3.0, 12.0, 60.0), sweep=(4, 8, 16, 32),
                m_ref=150,       # full scale: 300
                replications=20, variable="h"),
    "bloodflow": dict(x_min=0.0, x_max=1.0, n_cells=50, t_end=0.1,
                      costs=(1.0, 4.0, 12.0), sweep=(4, 8, 16),
                      m_ref=100, replications=10, variable="p"),
    "bloodflow-elastic": dict(x_min=0.0, x_max=1.0, n_cells=50, t_end=0.1,
                              costs=(1.0, 4.0, 12.0), sweep=(4, 8, 16),
                              m_ref=100, replications=10, variable="p"),
}
REDUCED_LEVEL_COST = 0.5  # reduced model: two equations, no relaxation solve

_MODEL_KEYS = {
    "burgers": ("boundary",),
    "jinxin": ("eps", "a", "boundary"),
    "swe": ("froude", "ic", "ic_amp", "ic_u0", "boundary"),
    "bloodflow": ("test", "rho", "re", "h0", "visc", "tau_override", "ic",
                  "boundary"),
    "bloodflow-elastic": ("test", "rho", "re", "h0", "ic", "boundary"),
}


def _parse_value(text: str):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [] if not inner else [_parse_value(t) for t in inner.split(",")]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text.strip("'\"")


def _flatten(prefix: str, obj, out: dict):
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, dict):
                _flatten(f"{prefix}{k}.", v, out)
            else:
                out[f"{prefix}{k}"] = v
    else:
        out[prefix.rstrip(".")] = obj


def load_key_values(path: Path) -> dict:
    """Read a config file: `key = value` lines, or a flattened JSON mirror."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        raw = json.loads(path.read_text())
        out: dict = {}
        _flatten("", raw, out)
        return out
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = _parse_value(value)
    return out


@dataclass
class ExperimentConfig:
    model: object
    grid: Grid1D
    t_end: float
    cfl: float | None
    estimator: str
    levels: list[LevelSpec]
    sweep: list[int]
    replications: int
    seed: int
    reference_order: int
    reference_m: int
    report_variable: str
    alpha_mode: object
    out_dir: Path
    workers: int = 1
    timings: bool = False

    def config_sha(self) -> str:
        return _sha(self._canonical(include_all=True))

    def model_sha(self) -> str:
        """Hash of everything that determines reference-solution content."""
        return _sha(self._canonical(include_all=False))

    def _canonical(self, include_all: bool) -> str:
        items = {
            "model": repr(self.model),
            "grid": f"{self.grid.x_min}:{self.grid.x_max}:{self.grid.n_cells}",
            "t_end": repr(self.t_end),
            "cfl": repr(self.cfl),
            "reference.order": self.reference_order,
            "reference.m": self.reference_m,
        }
        if include_all:
            items.update({
                "estimator": self.estimator,
                "levels": ";".join(
                    f"{lv.order},{lv.cost},{lv.fidelity},{lv.n_cells}"
                    for lv in self.levels),
                "sweep": ",".join(map(str, self.sweep)),
                "replications": self.replications,
                "seed": self.seed,
                "report.variable": self.report_variable,
                "alpha": str(self.alpha_mode),
            })
        return "\n".join(f"{k}={items[k]}" for k in sorted(items))


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _default_levels(estimator: str, kind: str, costs, n_cells: int,
                    ref_order: int) -> list[LevelSpec]:
    if estimator == "mc":
        return [LevelSpec(order=ref_order, cost=costs[ref_order - 1])]
    if estimator == "momc":
        return [LevelSpec(order=o, cost=costs[o - 1]) for o in (1, 2, 3)]
    if estimator == "apmomc-bifidelity":
        lv = [LevelSpec(order=1, cost=REDUCED_LEVEL_COST, fidelity="reduced")]
        lv += [LevelSpec(order=o, cost=costs[o - 1]) for o in (1, 2, 3)]
        return lv
    if estimator == "mlmc":
        # factor-2 coarsening, same order on every level; per-run cost
        # scales with (cells * steps) ~ (n_l / n)^2
        order = ref_order
        return [
            LevelSpec(order=order, cost=costs[order - 1] / 16.0, n_cells=n_cells // 4),
            LevelSpec(order=order, cost=costs[order - 1] / 4.0, n_cells=n_cells // 2),
            LevelSpec(order=order, cost=costs[order - 1], n_cells=n_cells),
        ]
    raise ConfigError(f"unknown estimator {estimator!r}")


def resolve(kv: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated ExperimentConfig from flat key-value data."""
    kv = dict(kv)
    if overrides:
        kv.update({k: v for k, v in overrides.items() if v is not None})
    kind = kv.get("model.kind")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model.kind must be one of {sorted(MODEL_KINDS)}, "
                          f"got {kind!r}")
    fam = _FAMILY_DEFAULTS[kind]

    model_kwargs = {}
    for key in _MODEL_KEYS[kind]:
        if f"model.{key}" in kv and kv[f"model.{key}"] is not None:
            model_kwargs[key] = kv[f"model.{key}"]
    try:
        model = MODEL_KINDS[kind](**model_kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad model parameters: {exc}")

    grid = Grid1D(
        float(kv.get("grid.x_min", fam["x_min"])),
        float(kv.get("grid.x_max", fam["x_max"])),
        int(kv.get("grid.n_cells", fam["n_cells"])),
    )
    t_end = float(kv.get("t_end", fam["t_end"]))
    cfl = kv.get("cfl")
    cfl = float(cfl) if cfl is not None else None
    estimator = kv.get("estimator", "mc")
    if estimator not in ESTIMATORS:
        raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")

    costs = list(fam["costs"])
    reference_order = int(kv.get("reference.order", 3))
    reference_m = int(kv.get("reference.m", fam["m_ref"]))

    if "levels" in kv:
        count = int(kv["levels"])
        levels = []
        for i in range(count):
            order = int(kv.get(f"levels.{i}.order", i + 1))
            fidelity = str(kv.get(f"levels.{i}.fidelity", "full"))
            default_cost = (REDUCED_LEVEL_COST if fidelity == "reduced"
                            else costs[order - 1])
            cost = float(kv.get(f"levels.{i}.cost", default_cost))
            n_cells_l = kv.get(f"levels.{i}.n_cells")
            levels.append(LevelSpec(order=order, cost=cost, fidelity=fidelity,
                                    n_cells=int(n_cells_l) if n_cells_l else None))
    else:
        levels = _default_levels(estimator, kind, costs, grid.n_cells,
                                 reference_order)

    sweep = [int(m) for m in kv.get("sweep", list(fam["sweep"]))]
    if not sweep:
        raise ConfigError("sweep must be nonempty")
    if reference_m < max(sweep):
        raise ConfigError(f"reference.m = {reference_m} must be >= max sweep "
                          f"M_L = {max(sweep)}")
    top_order = max(lv.order for lv in levels)
    if reference_order < top_order:
        raise ConfigError(f"reference.order = {reference_order} must be at "
                          f"least the highest level order {top_order}")

    cfg = ExperimentConfig(
        model=model,
        grid=grid,
        t_end=t_end,
        cfl=cfl,
        estimator=estimator,
        levels=levels,
        sweep=sweep,
        replications=int(kv.get("replications", fam["replications"])),
        seed=int(kv.get("seed", 20250801)),
        reference_order=reference_order,
        reference_m=reference_m,
        report_variable=str(kv.get("report.variable", fam["variable"])),
        alpha_mode=kv.get("alpha", "quasi-optimal"),
        out_dir=Path(kv.get("out", "out")),
        workers=int(kv.get("workers", 1)),
        timings=bool(kv.get("timings", False)),
    )
    return cfg
