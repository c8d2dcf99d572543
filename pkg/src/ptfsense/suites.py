"""Built-in acceptance suites.

Each suite is a seeded, self-contained experiment returning report rows and
a pass/fail verdict.  Rows share one schema so they can be written to CSV
and compared cell by cell across reruns.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import boolean, critical, gaussian, generators, learner, reduction
from .hermite import HermiteExpansion, hermite_eval
from .poly import MultilinearPoly, TruthTable, influence_poly, sign
from .rng import stream, threads

ROW_FIELDS = (
    "suite", "module", "operation", "params", "value", "reference",
    "stderr", "samples", "seed", "ok",
)


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    rows: List[dict]
    summary: str
    seconds: float = 0.0


def _row(suite, module, operation, params, value, reference=None, stderr=None,
         samples=None, seed=None, ok=True) -> dict:
    return {
        "suite": suite, "module": module, "operation": operation, "params": params,
        "value": None if value is None else float(value),
        "reference": None if reference is None else float(reference),
        "stderr": None if stderr is None else float(stderr),
        "samples": samples, "seed": seed, "ok": bool(ok),
    }


def _finish(suite: str, rows: List[dict], summary: str) -> SuiteResult:
    return SuiteResult(suite, all(r["ok"] for r in rows), rows, summary)


# ---------------------------------------------------------------- exact suites


def lemma_key_exact(seed: int = 0, count: int = 200) -> SuiteResult:
    rng = stream(seed, "suite", "lemma-key-exact")
    rows, worst = [], 0.0
    for k in range(count):
        d = 1 + k % 3
        n = int(rng.integers(4, 11))
        f = boolean.PtfBoolean(generators.random_ptf(n, d, rng))
        gap = max(abs(r["direct"] - r["via_derivative"]) for r in boolean.derivative_influence_report(f))
        worst = max(worst, gap)
        rows.append(_row("lemma-key-exact", "boolean_sense", "influence_via_derivative",
                         f"instance={k} n={n} d={d}", gap, 1e-12, ok=gap < 1e-12))
    return _finish("lemma-key-exact", rows, f"max |Inf_i - E[f x_i sign(D_i p)]| = {worst:.3g}")


def as_bound_d(seed: int = 0, count: int = 1000) -> SuiteResult:
    rng = stream(seed, "suite", "as-bound-d")
    rows, worst = [], 0.0
    ns = list(range(8, 15))
    for k in range(count):
        n = ns[k % len(ns)]
        a = boolean.exact_as(boolean.PtfBoolean(generators.random_ptf(n, 2, rng)))
        bound = boolean.as_bound_closed(n, 2)
        worst = max(worst, a / bound)
        rows.append(_row("as-bound-d", "boolean_sense", "exact_as", f"instance={k} n={n} d=2",
                         a, bound, ok=a <= bound))
    maj = boolean.exact_as(TruthTable.from_function(3, lambda x: 1 if x.sum() > 0 else -1))
    rows.append(_row("as-bound-d", "boolean_sense", "exact_as", "MAJ3", maj, 1.5, ok=maj == 1.5))
    for n in range(1, 11):
        par = boolean.exact_as(TruthTable.from_function(n, lambda x: int(np.prod(x))))
        rows.append(_row("as-bound-d", "boolean_sense", "exact_as", f"parity n={n}", par, n, ok=par == n))
    return _finish("as-bound-d", rows, f"max AS / 2n^(3/4) = {worst:.4f}")


def ns_spectral_oracle(seed: int = 0, count: int = 50) -> SuiteResult:
    rng = stream(seed, "suite", "ns-spectral-oracle")
    rows, worst = [], 0.0
    for k in range(count):
        n = int(rng.integers(3, 9))
        if k % 2:
            f = TruthTable(n, (1 - 2 * rng.integers(0, 2, size=1 << n)).astype(np.int8))
            kind = "uniform"
        else:
            f = boolean.PtfBoolean(generators.random_ptf(n, 1 + k % 3, rng)).table
            kind = "ptf"
        for eps in (0.05, 0.1, 0.3):
            a, b = boolean.exact_ns(f, eps), boolean.ns_pair_enumeration(f, eps)
            worst = max(worst, abs(a - b))
            rows.append(_row("ns-spectral-oracle", "boolean_sense", "exact_ns",
                             f"instance={k} kind={kind} n={n} eps={eps}", a, b, ok=abs(a - b) < 1e-12))
    return _finish("ns-spectral-oracle", rows, f"max |spectral - enumeration| = {worst:.3g}")


def restriction_conservation(seed: int = 0, count: int = 100) -> SuiteResult:
    rng = stream(seed, "suite", "restriction-conservation")
    rows, worst = [], 0.0
    for j in range(count):
        n = int(rng.integers(7, 11))
        p = generators.random_poly(n, 3, rng)
        p = p * (1.0 / math.sqrt(p.norm_sq()))
        k = int(rng.integers(1, 7))
        head = sorted(rng.choice(np.arange(1, n + 1), size=k, replace=False).tolist())
        ell = int(rng.choice([v for v in range(1, n + 1) if v not in head]))
        rep = critical.restriction_influence_deviation(p, head, ell, max_exhaustive=6)
        gap = abs(rep.mean - rep.inf_ell)
        worst = max(worst, gap)
        rows.append(_row("restriction-conservation", "critical_index", "restriction_influence_deviation",
                         f"instance={j} n={n} k={k} ell={ell}", rep.mean, rep.inf_ell,
                         samples=rep.restrictions, ok=rep.exact and gap < 1e-12))
    return _finish("restriction-conservation", rows, f"max |E Inf_l(p_rho) - Inf_l(p)| = {worst:.3g}")


def hermite_orthonormality(seed: int = 0, top: int = 8, nodes: int = 40) -> SuiteResult:
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2 * math.pi)
    rows, worst = [], 0.0
    for j in range(top + 1):
        hj = hermite_eval(j, x)
        for k in range(j, top + 1):
            ip = float(np.dot(w, hj * hermite_eval(k, x)))
            ref = 1.0 if j == k else 0.0
            worst = max(worst, abs(ip - ref))
            rows.append(_row("hermite-orthonormality", "hermite", "inner_product",
                             f"j={j} k={k} nodes={nodes}", ip, ref, ok=abs(ip - ref) <= 1e-10))
    return _finish("hermite-orthonormality", rows, f"max |<h_j, h_k> - delta_jk| = {worst:.3g}")


def gl_extremal_shape(seed: int = 0) -> SuiteResult:
    rows = []
    for n in range(10, 21, 2):
        ml = boolean.middle_layers_symmetric(n, 2)
        ratio = boolean.exact_as(ml.table) / (2 * math.sqrt(n))
        rows.append(_row("gl-extremal-shape", "boolean_sense", "middle_layers_symmetric",
                         f"n={n} d=2", ratio, None, ok=0.5 <= ratio <= 1.5))
    vals = ", ".join(f"{r['value']:.3f}" for r in rows)
    return _finish("gl-extremal-shape", rows, f"AS/(2 sqrt n) = {vals}")


# ---------------------------------------------------------------- randomized suites


def reduction_identity(seed: int = 0, trials: int = 100_000, count: int = 20) -> SuiteResult:
    n = 10
    rng = stream(seed, "suite", "reduction-identity")
    fns: List[Tuple[str, object]] = [
        ("dictator", TruthTable.from_function(n, lambda x: int(x[0]))),
        ("parity", TruthTable.from_function(n, lambda x: int(np.prod(x)))),
        ("majority", TruthTable.from_function(n, lambda x: 1 if x.sum() >= 0 else -1)),
    ]
    fns += [(f"ptf{k}", boolean.PtfBoolean(generators.random_ptf(n, 2, rng))) for k in range(count)]
    rows = []
    for name, f in fns:
        for eps in (0.1, 0.25):
            rep = reduction.reduction_estimate(f, eps, trials, seed)
            e = rep.estimate
            rows.append(_row("reduction-identity", "reduction_bridge", "reduction_estimate",
                             f"f={name} n={n} eps={eps} m={rep.m}", e.mean, rep.exact_ns, e.stderr,
                             e.samples, e.seed, ok=e.within(rep.exact_ns)))
    bad = sum(not r["ok"] for r in rows)
    return _finish("reduction-identity", rows, f"{len(rows) - bad}/{len(rows)} estimates within 3 stderr")


def sheppard_gns(seed: int = 0, samples: int = 1_000_000) -> SuiteResult:
    p = HermiteExpansion(1, {(1,): 1.0})
    rows = []
    for eps in (0.01, 0.1, 0.5):
        e = gaussian.estimate_gns(p, eps, samples, seed)
        ref = gaussian.sheppard(1.0 - eps)
        rows.append(_row("sheppard-gns", "gaussian_sense", "estimate_gns", f"p=h1(x1) eps={eps}",
                         e.mean, ref, e.stderr, e.samples, e.seed, ok=e.within(ref)))
    worst = max(abs(r["value"] - r["reference"]) / r["stderr"] for r in rows)
    return _finish("sheppard-gns", rows, f"max |z| = {worst:.2f}")


def qnorm_exact(seed: int = 0, samples: int = 200_000, count: int = 50, pairs: int = 20) -> SuiteResult:
    rng = stream(seed, "suite", "qnorm-exact")
    rows = []
    for k in range(count):
        n = int(rng.integers(1, 5))
        d = int(rng.integers(1, 5))
        eps = float(rng.choice([0.01, 0.05, 0.1, 0.3]))
        p = generators.random_expansion(n, d, rng)
        e, exact = gaussian.perturbation_norm(p, eps, samples, seed)
        rows.append(_row("qnorm-exact", "gaussian_sense", "perturbation_norm",
                         f"instance={k} n={n} d={d} eps={eps}", e.mean, exact, e.stderr,
                         e.samples, e.seed, ok=e.within(exact)))
    pool = generators.multi_indices(3, 3)
    for k in range(pairs):
        a, b = rng.choice(len(pool), size=2, replace=False)
        S, T = pool[int(a)], pool[int(b)]
        eps = float(rng.choice([0.05, 0.1, 0.3]))
        e = gaussian.cross_correlation(S, T, eps, samples, seed)
        rows.append(_row("qnorm-exact", "gaussian_sense", "cross_correlation",
                         f"S={list(S)} T={list(T)} eps={eps}", e.mean, 0.0, e.stderr,
                         e.samples, e.seed, ok=e.within(0.0)))
    bad = sum(not r["ok"] for r in rows)
    return _finish("qnorm-exact", rows, f"{len(rows) - bad}/{len(rows)} checks within 3 stderr")


def gns_exponent_shape(seed: int = 0, samples: int = 200_000, count: int = 100, n: int = 10) -> SuiteResult:
    d = 2
    target = 1.0 / (2 * d)
    eps_grid = (1e-1, 1e-2, 1e-3)
    rng = stream(seed, "suite", "gns-exponent-shape")
    rows, slopes = [], []
    for k in range(count):
        p = generators.random_expansion(n, d, rng, family="regular")
        means = [gaussian.estimate_gns(p, e, samples, seed).mean for e in eps_grid]
        slope = gaussian.fit_loglog_slope(eps_grid, means) if min(means) > 0 else float("nan")
        slopes.append(slope)
        rows.append(_row("gns-exponent-shape", "gaussian_sense", "estimate_gns",
                         f"instance={k} n={n} d={d} eps=1e-1..1e-3", slope, target,
                         samples=samples, seed=seed, ok=abs(slope - target) <= 0.15))
    s = np.asarray(slopes)
    return _finish("gns-exponent-shape", rows,
                   f"fitted slopes mean {np.nanmean(s):.3f}, range [{np.nanmin(s):.3f}, {np.nanmax(s):.3f}],"
                   f" accepted band {target - 0.15:.2f}..{target + 0.15:.2f}")


def critical_index_machinery(seed: int = 0, count: int = 500, samples: int = 1000) -> SuiteResult:
    rng = stream(seed, "suite", "critical-index-machinery")
    rows, violations = [], 0
    for k in range(count):
        d = 1 + k % 4
        n = int(rng.integers(max(d, 2), 21))
        fam = "dense" if n <= 12 else "sparse"
        p = generators.random_poly(n, d, rng, family=fam, terms=3 * n)
        if p.degree == 0:
            p = p + MultilinearPoly.variable(n, 1)
        tau = float(rng.uniform(0.01, 0.5))
        bad = critical.tail_decay_violations(critical.tail_decay_check(p, tau))
        violations += len(bad)
        rows.append(_row("critical-index-machinery", "critical_index", "tail_decay_check",
                         f"instance={k} n={n} d={d} tau={tau:.4f}", len(bad), 0, ok=not bad))

    regular = [
        ("linear n=20", MultilinearPoly(20, {1 << j: 1.0 for j in range(20)}), 0.1),
        ("pairs n=12", MultilinearPoly(12, {(1 << a) | (1 << b): 1.0 for a in range(12) for b in range(a + 1, 12)}), 0.1),
    ]
    for name, p, tau in regular:
        out = critical.decompose(p, tau, samples=samples, seed=seed)
        rows.append(_row("critical-index-machinery", "critical_index", "decompose",
                         f"{name} tau={tau} expect=regular", out.restrictions, 0,
                         ok=out.kind == "regular" and out.restrictions == 0))
    geo = MultilinearPoly(24, {1 << (i - 1): 2.0**-i for i in range(1, 25)})
    out = critical.decompose(geo, 0.5, samples=samples, seed=seed)
    rows.append(_row("critical-index-machinery", "critical_index", "decompose",
                     f"geometric n=24 tau=0.5 K={out.K} expect=large_ci", out.fraction, None,
                     samples=out.restrictions, seed=out.seed,
                     ok=out.kind == "large_ci" and (out.fraction or 0.0) > 0))
    return _finish("critical-index-machinery", rows,
                   f"{violations} tail-decay violations over {count} polynomials;"
                   f" geometric head constant fraction {out.fraction}")


def learner_agnostic(seed: int = 0, runs: int = 10, n: int = 10, d: int = 2, eta: float = 0.1,
                     train: int = 5000, test: int = 2000, solver: Optional[str] = None) -> SuiteResult:
    rows = []
    for run in range(runs):
        rng = stream(seed, "suite", "learner-agnostic", run)
        target = generators.random_ptf(n, d, rng)

        def draw(size):
            X = (1 - 2 * rng.integers(0, 2, size=(size, n))).astype(np.float64)
            clean = sign(target.evaluate_many(X)).astype(np.float64)
            flips = rng.random(size) < eta
            return X, np.where(flips, -clean, clean)

        X, y = draw(train)
        Xt, yt = draw(test)
        model = learner.l1_fit(X, y, d, solver=solver)
        err = learner.evaluate(model, Xt, yt)
        opt = float(np.mean(sign(target.evaluate_many(Xt)) != yt))
        rows.append(_row("learner-agnostic", "agnostic_learner", "l1_fit+evaluate",
                         f"run={run} n={n} d={d} eta={eta} train={train} test={test} opt={opt:.4f}",
                         err, 0.15, samples=test, seed=seed, ok=err <= 0.15))
        witness = learner.l1_objective(learner.feature_matrix(X, d), y,
                                       np.array([target.coefficient(S) for S in learner.feature_index(n, d)]))
        rows.append(_row("learner-agnostic", "agnostic_learner", "l1_objective",
                         f"run={run} fitted vs target coefficients", model.objective, witness,
                         ok=model.objective <= witness * (1 + 1e-9)))
    errs = [r["value"] for r in rows if r["operation"] == "l1_fit+evaluate"]
    return _finish("learner-agnostic", rows,
                   f"test error mean {np.mean(errs):.4f}, max {np.max(errs):.4f} (limit 0.15)")


# ---------------------------------------------------------------- determinism

# reduced budgets that still span several sample chunks
_DETERMINISM_RUNS: Dict[str, dict] = {
    "lemma-key-exact": {},
    "as-bound-d": {"count": 200},
    "ns-spectral-oracle": {},
    "restriction-conservation": {},
    "hermite-orthonormality": {},
    "gl-extremal-shape": {},
    "sheppard-gns": {"samples": 300_000},
    "qnorm-exact": {"samples": 140_000, "count": 4, "pairs": 2},
    "reduction-identity": {"trials": 12_000, "count": 2},
    "gns-exponent-shape": {"samples": 140_000, "count": 2},
    "critical-index-machinery": {"count": 20, "samples": 500},
    "learner-agnostic": {"runs": 1, "train": 600, "test": 300},
}


def determinism(seed: int = 0, thread_counts=(1, 4, 16)) -> SuiteResult:
    rows = []
    for sid, kwargs in _DETERMINISM_RUNS.items():
        outputs = []
        for t in thread_counts:
            with threads(t):
                outputs.append(SUITES[sid][1](seed=seed, **kwargs).rows)
        ref = outputs[0]
        for t, out in zip(thread_counts[1:], outputs[1:]):
            same = out == ref
            cells = sum(len(r) for r in ref)
            rows.append(_row("determinism", "harness_cli", sid, f"threads=1 vs threads={t}",
                             cells if same else _diff_cells(ref, out), cells, seed=seed, ok=same))
    return _finish("determinism", rows,
                   "bit-identical rows at threads " + "/".join(map(str, thread_counts))
                   if all(r["ok"] for r in rows) else "rows differ across thread counts")


def _diff_cells(a: List[dict], b: List[dict]) -> int:
    if len(a) != len(b):
        return -1
    return sum(sum(x[k] == y.get(k) for k in x) for x, y in zip(a, b))


# ---------------------------------------------------------------- catalogue

SUITES: Dict[str, Tuple[str, Callable[..., SuiteResult]]] = {
    "lemma-key-exact": ("influence equals E[f x_i sign(D_i p)] exactly", lemma_key_exact),
    "as-bound-d": ("exact AS of random degree-2 PTFs below 2 n^(3/4)", as_bound_d),
    "ns-spectral-oracle": ("spectral NS equals pair-enumeration NS", ns_spectral_oracle),
    "restriction-conservation": ("mean restricted influence equals the original", restriction_conservation),
    "reduction-identity": ("reduction sampler matches exact NS at rate 1/m", reduction_identity),
    "sheppard-gns": ("GNS of a halfspace matches arccos(1 - eps)/pi", sheppard_gns),
    "qnorm-exact": ("perturbation norm and Hermite cross-correlations", qnorm_exact),
    "hermite-orthonormality": ("Gauss-Hermite inner products of h_0..h_8", hermite_orthonormality),
    "gl-extremal-shape": ("AS of the middle-layers PTF scales like 2 sqrt n", gl_extremal_shape),
    "gns-exponent-shape": ("fitted GNS exponent of regular degree-2 PTFs near 1/(2d)", gns_exponent_shape),
    "critical-index-machinery": ("tail decay, regular and large-critical-index decompositions", critical_index_machinery),
    "learner-agnostic": ("L1 regression test error within opt + 0.05", learner_agnostic),
    "determinism": ("suite rows bit-identical across thread counts", determinism),
}


def list_suites() -> List[Tuple[str, str]]:
    return [(sid, desc) for sid, (desc, _) in SUITES.items()]


def run_suite(suite_id: str, seed: int = 0, **kwargs) -> SuiteResult:
    try:
        fn = SUITES[suite_id][1]
    except KeyError:
        raise ValueError(f"unknown suite {suite_id!r}") from None
    start = time.perf_counter()
    res = fn(seed=seed, **kwargs)
    res.seconds = time.perf_counter() - start
    return res
