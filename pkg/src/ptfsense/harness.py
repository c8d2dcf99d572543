"""Experiment configs, runners and report emission for the command line."""

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import __version__, boolean, critical, gaussian, generators, io, learner, reduction
from ._backend import get_backend
from .hermite import HermiteExpansion
from .poly import BudgetExceeded, MultilinearPoly, TruthTable
from .rng import parallel_map, set_threads, stream

EXPERIMENTS = ("analyze", "gaussian", "critical-index", "reduce", "learn", "verify-bounds")
FAMILIES = generators.FAMILIES + ("middle-layers", "from-file", "dictator", "parity", "majority")

DEFAULTS: Dict[str, Any] = {
    "family": "dense",
    "n": [8],
    "d": [2],
    "count": 10,
    "grids": {},
    "samples": 100_000,
    "seed": 0,
    "out": "results",
    "threads": 1,
}

GRID_DEFAULTS = {
    "analyze": {"eps": [0.01, 0.05, 0.1]},
    "gaussian": {"eps": [0.1, 0.01, 0.001], "t": [1.0, 2.0, 3.0]},
    "critical-index": {"tau": [0.05, 0.1, 0.2]},
    "reduce": {"eps": [0.1, 0.25]},
    "learn": {"eta": [0.0, 0.05, 0.1]},
    "verify-bounds": {},
}

MAX_SEED = 2**64

_GRID_RANGES = {
    "eps": (lambda v: 0 < v <= 1, "a number in (0, 1]"),
    "tau": (lambda v: 0 < v < 1, "a number in (0, 1)"),
    "eta": (lambda v: 0 <= v < 0.5, "a number in [0, 1/2)"),
    "t": (lambda v: 0 <= v < math.inf, "a nonnegative number"),
}


class ConfigError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


@dataclass
class ExperimentConfig:
    experiment: str
    family: str
    n: List[int]
    d: List[int]
    count: int
    grids: Dict[str, List[float]]
    samples: int
    seed: int
    out: str
    threads: int = 1
    path: Optional[str] = None  # polynomial file for family "from-file"
    train: int = 5000
    test: int = 2000
    solver: Optional[str] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "raw"}
        return out


def load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith((".yaml", ".yml")):
        import yaml

        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return doc


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def build_config(experiment: str, doc: Mapping[str, Any], overrides: Mapping[str, Any]) -> ExperimentConfig:
    """Merge defaults, file contents and flag overrides (flags win), then validate."""
    merged: Dict[str, Any] = dict(DEFAULTS)
    merged["grids"] = dict(GRID_DEFAULTS.get(experiment, {}))
    for src in (doc, overrides):
        for k, v in src.items():
            if v is None:
                continue
            if k == "grids" and isinstance(v, Mapping):
                merged["grids"] = {**merged["grids"], **v}
            else:
                merged[k] = v
    merged["experiment"] = merged.get("experiment", experiment)
    problems = _validate(experiment, merged)
    if problems:
        raise ConfigError(problems)
    known = set(ExperimentConfig.__dataclass_fields__) - {"raw"}
    kwargs = {k: merged[k] for k in known if k in merged}
    kwargs["n"] = [int(v) for v in _as_list(merged["n"])]
    kwargs["d"] = [int(v) for v in _as_list(merged["d"])]
    kwargs["grids"] = {k: [float(x) for x in _as_list(v)] for k, v in merged["grids"].items()}
    return ExperimentConfig(raw=dict(merged), **kwargs)


def _validate(experiment: str, c: Mapping[str, Any]) -> List[str]:
    problems = []
    if c["experiment"] != experiment:
        problems.append(f"experiment: config names {c['experiment']!r} but the command is {experiment!r}")
    if experiment not in EXPERIMENTS:
        problems.append(f"experiment: unknown {experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
    if c["family"] not in FAMILIES:
        problems.append(f"family: unknown {c['family']!r}; expected one of {', '.join(FAMILIES)}")
    if c["family"] == "from-file" and not c.get("path"):
        problems.append("path: required when family is 'from-file'")
    for key in ("n", "d"):
        vals = _as_list(c[key])
        if not vals:
            problems.append(f"{key}: must be nonempty")
        for i, v in enumerate(vals):
            if not isinstance(v, int) or isinstance(v, bool) or v < (1 if key == "n" else 0):
                problems.append(f"{key}[{i}]: expected an integer >= {1 if key == 'n' else 0}, got {v!r}")
    for key in ("count", "samples", "threads", "train", "test"):
        if key in c:
            v = c[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                problems.append(f"{key}: expected a positive integer, got {v!r}")
    seed = c.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < MAX_SEED:
        problems.append(f"seed: expected an integer in [0, 2^64), got {seed!r}")
    grids = c.get("grids")
    if not isinstance(grids, Mapping):
        problems.append("grids: expected a mapping of parameter name to list")
        return problems
    for name, vals in grids.items():
        vals = _as_list(vals)
        if not vals:
            problems.append(f"grids.{name}: must be nonempty")
        ok, text = _GRID_RANGES.get(name, (lambda v: math.isfinite(v), "a finite number"))
        for i, v in enumerate(vals):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not ok(v):
                problems.append(f"grids.{name}[{i}]: expected {text}, got {v!r}")
    for name in GRID_DEFAULTS.get(experiment, {}):
        if name not in grids:
            problems.append(f"grids.{name}: required by {experiment}")
    return problems


# ---------------------------------------------------------------- instances


def _instances(cfg: ExperimentConfig, n: int, d: int) -> List[MultilinearPoly]:
    fam = cfg.family
    if fam == "from-file":
        p = io.load_poly(cfg.path)
        if isinstance(p, HermiteExpansion):
            p = p.to_multilinear()
        return [p]
    if fam == "middle-layers":
        return [boolean.middle_layers_symmetric(n, d).polynomial]
    if fam == "dictator":
        return [MultilinearPoly.variable(n, 1)]
    if fam == "parity":
        return [MultilinearPoly(n, {(1 << n) - 1: 1.0})]
    if fam == "majority":
        return [MultilinearPoly(n, {1 << j: 1.0 for j in range(n)})]
    rng = stream(cfg.seed, "instance", fam, n, d)
    return [generators.random_ptf(n, d, rng, family=fam) for _ in range(cfg.count)]


def _expansions(cfg: ExperimentConfig, n: int, d: int) -> List[HermiteExpansion]:
    if cfg.family == "from-file":
        p = io.load_poly(cfg.path)
        p = p if isinstance(p, HermiteExpansion) else HermiteExpansion.from_multilinear(p)
        return [p.normalized()]
    if cfg.family in ("dense", "regular"):
        rng = stream(cfg.seed, "instance", cfg.family, n, d)
        return [generators.random_expansion(n, d, rng, family=cfg.family) for _ in range(cfg.count)]
    return [HermiteExpansion.from_multilinear(p).normalized() for p in _instances(cfg, n, d)]


def _base(module, operation, cfg, n, d, k, parameter, value, stderr=None, samples=None,
          seed=None, reference=None, **extra) -> dict:
    row = {
        "module": module, "operation": operation, "family": cfg.family, "n": n, "d": d,
        "instance": k, "parameter": parameter, "value": value, "stderr": stderr,
        "reference": reference, "samples": samples, "seed": seed,
    }
    row.update(extra)
    return row


# ---------------------------------------------------------------- experiments


def _analyze(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    for k, p in enumerate(_instances(cfg, n, d)):
        f = boolean.PtfBoolean(p)
        rows.append(_base("boolean_sense", "exact_as", cfg, n, d, k, "", boolean.exact_as(f),
                          reference=boolean.as_bound_closed(n, max(p.degree, 1)), seed=cfg.seed))
        for eps in cfg.grids["eps"]:
            rows.append(_base("boolean_sense", "exact_ns", cfg, n, d, k, f"eps={eps}",
                              boolean.exact_ns(f, eps), seed=cfg.seed))
    return rows


def _gaussian(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    for k, p in enumerate(_expansions(cfg, n, d)):
        def add(op, param, e, ref=None):
            rows.append(_base("gaussian_sense", op, cfg, n, d, k, param, e.mean, e.stderr,
                              e.samples, e.seed, ref))

        for eps in cfg.grids["eps"]:
            add("estimate_gns", f"eps={eps}", gaussian.estimate_gns(p, eps, cfg.samples, cfg.seed))
            est, exact = gaussian.perturbation_norm(p, eps, cfg.samples, cfg.seed)
            add("perturbation_norm", f"eps={eps}", est, exact)
        add("estimate_gas", "", gaussian.estimate_gas(p, max(cfg.samples, 1000), cfg.seed))
        for pt in gaussian.tail_probe(p, cfg.grids["t"], cfg.samples, cfg.seed):
            add("tail_probe", f"t={pt.t}", pt.estimate)
        for pt in gaussian.anticoncentration_probe(p, cfg.grids["eps"], cfg.samples, cfg.seed):
            add("anticoncentration_gaussian", f"eps={pt.eps}", pt.gaussian)
            add("anticoncentration_hypercube", f"eps={pt.eps}", pt.hypercube)
    return rows


def _critical(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    for k, p in enumerate(_instances(cfg, n, d)):
        for tau in cfg.grids["tau"]:
            out = critical.decompose(p, tau, samples=min(cfg.samples, 10_000), seed=cfg.seed)
            index = out.index if out.index != math.inf else "inf"
            rows.append(_base("critical_index", "decompose", cfg, n, d, k, f"tau={tau}",
                              out.fraction, samples=out.restrictions, seed=out.seed,
                              kind=out.kind, index=index, K=out.K, degenerate=out.degenerate))
            violations = critical.tail_decay_violations(critical.tail_decay_check(p, tau))
            rows.append(_base("critical_index", "tail_decay_check", cfg, n, d, k, f"tau={tau}",
                              len(violations), reference=0))
    return rows


def _reduce(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    for k, p in enumerate(_instances(cfg, n, d)):
        f = boolean.PtfBoolean(p)
        for eps in cfg.grids["eps"]:
            rep = reduction.reduction_estimate(f, eps, cfg.samples, cfg.seed)
            e = rep.estimate
            rows.append(_base("reduction_bridge", "reduction_estimate", cfg, n, d, k,
                              f"eps={eps} m={rep.m}", e.mean, e.stderr, e.samples, e.seed,
                              rep.exact_ns, m=rep.m, bound_over_m=rep.bound_over_m))
    return rows


def _learn(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    for k, target in enumerate(_instances(cfg, n, d)):
        for eta in cfg.grids["eta"]:
            rng = stream(cfg.seed, "learn", n, d, k, eta)

            def draw(size):
                X = (1 - 2 * rng.integers(0, 2, size=(size, n))).astype(np.float64)
                y = np.where(target.evaluate_many(X) >= 0, 1.0, -1.0)
                return X, np.where(rng.random(size) < eta, -y, y)

            X, y = draw(cfg.train)
            Xt, yt = draw(cfg.test)
            model = learner.l1_fit(X, y, d, solver=cfg.solver)
            opt = float(np.mean(np.where(target.evaluate_many(Xt) >= 0, 1, -1) != yt))
            rows.append(_base("agnostic_learner", "evaluate", cfg, n, d, k, f"eta={eta}",
                              learner.evaluate(model, Xt, yt), samples=cfg.test, seed=cfg.seed,
                              reference=opt, train_error=learner.evaluate(model, X, y)))
    return rows


def _verify_bounds(cfg: ExperimentConfig, n: int, d: int) -> List[dict]:
    rows = []
    closed = boolean.as_bound_closed(n, d)
    recursive = boolean.as_bound_recursive(n, d)
    for k, p in enumerate(_instances(cfg, n, d)):
        a = boolean.exact_as(boolean.PtfBoolean(p))
        rows.append(_base("boolean_sense", "exact_as", cfg, n, d, k, "", a, reference=closed,
                          seed=cfg.seed, recursive_bound=recursive, violation=a > closed))
    return rows


RUNNERS: Dict[str, Callable[[ExperimentConfig, int, int], List[dict]]] = {
    "analyze": _analyze,
    "gaussian": _gaussian,
    "critical-index": _critical,
    "reduce": _reduce,
    "learn": _learn,
    "verify-bounds": _verify_bounds,
}


@dataclass
class RunResult:
    rows: List[dict]
    complete: bool
    skipped: List[dict]
    csv_path: Path
    json_path: Path


def _sort_key(row: dict):
    return tuple(str(row.get(k, "")) if not isinstance(row.get(k), (int, float)) else f"{row.get(k):020.10f}"
                 for k in ("n", "d", "instance", "operation", "parameter"))


def run(cfg: ExperimentConfig) -> RunResult:
    """Run every (n, d) grid point, write ``<out>/<experiment>.csv`` and a
    JSON sidecar, and return the rows in canonical order."""
    start = time.perf_counter()
    points = [(n, d) for n in cfg.n for d in cfg.d if d <= n or cfg.family == "from-file"]
    runner = RUNNERS[cfg.experiment]

    def one(point):
        n, d = point
        try:
            return runner(cfg, n, d), None
        except BudgetExceeded as exc:
            return [], {"n": n, "d": d, "reason": str(exc)}

    previous = set_threads(cfg.threads)
    try:
        results = parallel_map(one, points)
    finally:
        set_threads(previous)
    rows = sorted((r for rs, _ in results for r in rs), key=_sort_key)
    skipped = [s for _, s in results if s]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.experiment}.csv"
    json_path = out / f"{cfg.experiment}.json"
    io.write_csv(csv_path, rows)
    meta = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "version": __version__,
        "backend": get_backend(),
        "threads": cfg.threads,
        "rows": len(rows),
        "complete": not skipped,
        "skipped": skipped,
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    json_path.write_text(json.dumps(meta, indent=2, default=str) + "\n")
    return RunResult(rows, not skipped, skipped, csv_path, json_path)
