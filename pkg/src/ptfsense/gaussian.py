"""Monte Carlo estimators for Gaussian PTFs ``f = sign(p)``, ``p`` a Hermite
expansion, plus tail, anti-concentration and invariance probes.

All estimators are deterministic functions of ``seed``; see :mod:`ptfsense.rng`.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import stats

from .hermite import HermiteExpansion
from .poly import MultilinearPoly, influences_poly, sign
from .rng import Estimate, Moments, merge_all, run_chunks, stream

MIN_INFLUENCE_SAMPLES = 1000
NORM_TOLERANCE = 1e-9


def sheppard(rho: float) -> float:
    """``Pr[sign(a) != sign(b)]`` for standard normals with correlation rho."""
    return math.acos(max(-1.0, min(1.0, rho))) / math.pi


def _noise_weights(eps: float) -> Tuple[float, float]:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise rate must lie in [0, 1], got {eps}")
    return 1.0 - eps, math.sqrt(2.0 * eps - eps * eps)


def correlated_pair(
    rng: np.random.Generator, size: int, n: int, eps: float
) -> Tuple[np.ndarray, np.ndarray]:
    """``x ~ N(0, I)``, ``y = (1 - eps) x + sqrt(2 eps - eps^2) z``."""
    alpha, beta = _noise_weights(eps)
    x = rng.standard_normal((size, n))
    z = rng.standard_normal((size, n))
    return x, alpha * x + beta * z


def _check_samples(samples: int, minimum: int = 2) -> None:
    if samples < minimum:
        raise ValueError(f"need at least {minimum} samples, got {samples}")


def _check_normalized(p: HermiteExpansion) -> None:
    if abs(p.norm_sq() - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"probe expects ||p||_2 = 1, got {math.sqrt(p.norm_sq()):.6g}")


def _depends_on(p: HermiteExpansion, i: int) -> bool:
    return any(len(S) >= i and S[i - 1] > 0 for S in p.coeffs)


# ---------------------------------------------------------------- influence


def estimate_gi(p: HermiteExpansion, i: int, samples: int, seed: int) -> Estimate:
    """``GI_i(sign p) = 2 Pr[f(x) != f(x^(i))]``, x^(i) resampling coordinate i."""
    if not 1 <= i <= p.n:
        raise IndexError(f"variable {i} out of range 1..{p.n}")
    _check_samples(samples, MIN_INFLUENCE_SAMPLES)
    if not _depends_on(p, i):
        return Estimate(0.0, 0.0, samples, seed)

    def chunk(c: int, size: int) -> Moments:
        x = stream(seed, "gaussian.x", c).standard_normal((size, p.n))
        fx = sign(p.evaluate_many(x))
        x[:, i - 1] = stream(seed, "gaussian.resample", i, c).standard_normal(size)
        return Moments.of(2.0 * (fx != sign(p.evaluate_many(x))))

    return merge_all(run_chunks(chunk, samples)).estimate(seed)


def estimate_gas(p: HermiteExpansion, samples: int, seed: int) -> Estimate:
    """Sum of all ``GI_i``; per-sample totals carry the joint standard error."""
    _check_samples(samples, MIN_INFLUENCE_SAMPLES)
    live = [i for i in range(1, p.n + 1) if _depends_on(p, i)]
    if not live:
        return Estimate(0.0, 0.0, samples, seed)

    def chunk(c: int, size: int) -> Moments:
        x = stream(seed, "gaussian.x", c).standard_normal((size, p.n))
        fx = sign(p.evaluate_many(x))
        total = np.zeros(size)
        for i in live:
            keep = x[:, i - 1].copy()
            x[:, i - 1] = stream(seed, "gaussian.resample", i, c).standard_normal(size)
            total += 2.0 * (fx != sign(p.evaluate_many(x)))
            x[:, i - 1] = keep
        return Moments.of(total)

    return merge_all(run_chunks(chunk, samples)).estimate(seed)


# ---------------------------------------------------------------- noise


def estimate_gns(p: HermiteExpansion, eps: float, samples: int, seed: int) -> Estimate:
    """``GNS_eps(sign p) = Pr[f(x) != f(y)]`` for a (1 - eps)-correlated pair."""
    _noise_weights(eps)
    _check_samples(samples)

    def chunk(c: int, size: int) -> Moments:
        x, y = correlated_pair(stream(seed, "gaussian.pair", c), size, p.n, eps)
        return Moments.of(sign(p.evaluate_many(x)) != sign(p.evaluate_many(y)))

    return merge_all(run_chunks(chunk, samples)).estimate(seed)


def perturbation_norm_exact(p: HermiteExpansion, eps: float) -> float:
    """``||p(x) - p(y)||_2 = sqrt(sum_S 2 (1 - (1 - eps)^|S|) p^(S)^2)``."""
    alpha, _ = _noise_weights(eps)
    return math.sqrt(sum(2.0 * (1.0 - alpha ** sum(S)) * c * c for S, c in p.coeffs.items()))


def perturbation_norm(
    p: HermiteExpansion, eps: float, samples: int, seed: int
) -> Tuple[Estimate, float]:
    """Monte Carlo and coefficient-space values of ``||p(x) - p(y)||_2``.

    The Monte Carlo standard error is propagated through the square root by
    the delta method.
    """
    _noise_weights(eps)
    _check_samples(samples)

    def chunk(c: int, size: int) -> Moments:
        x, y = correlated_pair(stream(seed, "gaussian.pair", c), size, p.n, eps)
        return Moments.of(np.square(p.evaluate_many(x) - p.evaluate_many(y)))

    sq = merge_all(run_chunks(chunk, samples)).estimate(seed)
    root = math.sqrt(max(sq.mean, 0.0))
    err = sq.stderr / (2.0 * root) if root > 0 else 0.0
    return Estimate(root, err, samples, seed), perturbation_norm_exact(p, eps)


def cross_correlation(
    S: Sequence[int], T: Sequence[int], eps: float, samples: int, seed: int
) -> Estimate:
    """Monte Carlo ``E[H_S(x) H_T(y)]`` for a (1 - eps)-correlated pair."""
    n = max(len(S), len(T))
    S = tuple(S) + (0,) * (n - len(S))
    T = tuple(T) + (0,) * (n - len(T))
    hs = HermiteExpansion(n, {S: 1.0})
    ht = HermiteExpansion(n, {T: 1.0})

    def chunk(c: int, size: int) -> Moments:
        x, y = correlated_pair(stream(seed, "gaussian.cross", c), size, n, eps)
        return Moments.of(hs.evaluate_many(x) * ht.evaluate_many(y))

    return merge_all(run_chunks(chunk, samples)).estimate(seed)


def cross_correlation_exact(S: Sequence[int], T: Sequence[int], eps: float) -> float:
    """``(1 - eps)^|S|`` when S == T, else 0."""
    n = max(len(S), len(T))
    S = tuple(S) + (0,) * (n - len(S))
    T = tuple(T) + (0,) * (n - len(T))
    return (1.0 - eps) ** sum(S) if S == T else 0.0


# ---------------------------------------------------------------- probes


@dataclass(frozen=True)
class TailPoint:
    t: float
    estimate: Estimate
    chernoff_range: bool  # t > e^d, where the degree-d tail bound applies


def tail_probe(
    p: HermiteExpansion, thresholds: Sequence[float], samples: int, seed: int
) -> List[TailPoint]:
    """Empirical ``Pr[|p(x)| >= t]`` under N(0, I) for each threshold."""
    _check_normalized(p)
    _check_samples(samples)
    ts = np.asarray(thresholds, dtype=np.float64)

    def chunk(c: int, size: int) -> List[Moments]:
        v = np.abs(p.evaluate_many(stream(seed, "gaussian.tail", c).standard_normal((size, p.n))))
        return [Moments.of(v >= t) for t in ts]

    parts = run_chunks(chunk, samples)
    cut = math.exp(p.degree)
    return [
        TailPoint(float(t), merge_all([part[k] for part in parts]).estimate(seed), bool(t > cut))
        for k, t in enumerate(ts)
    ]


@dataclass(frozen=True)
class AntiConcentrationPoint:
    eps: float
    gaussian: Estimate
    hypercube: Estimate


def anticoncentration_probe(
    p: HermiteExpansion, eps_grid: Sequence[float], samples: int, seed: int
) -> List[AntiConcentrationPoint]:
    """Empirical ``Pr[|p| <= eps]`` under Gaussian and uniform +-1 inputs."""
    _check_normalized(p)
    _check_samples(samples)
    grid = np.asarray(eps_grid, dtype=np.float64)

    def chunk(c: int, size: int):
        g = np.abs(p.evaluate_many(stream(seed, "gaussian.small", c).standard_normal((size, p.n))))
        signs = stream(seed, "hypercube.small", c).integers(0, 2, size=(size, p.n))
        b = np.abs(p.evaluate_many(1.0 - 2.0 * signs))
        return [(Moments.of(g <= e), Moments.of(b <= e)) for e in grid]

    parts = run_chunks(chunk, samples)
    out = []
    for k, e in enumerate(grid):
        gm = merge_all([part[k][0] for part in parts]).estimate(seed)
        bm = merge_all([part[k][1] for part in parts]).estimate(seed)
        out.append(AntiConcentrationPoint(float(e), gm, bm))
    return out


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def fit_semilog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``x``."""
    return float(np.polyfit(np.asarray(xs, dtype=float), np.log(ys), 1)[0])


@dataclass(frozen=True)
class InvarianceReport:
    distance: float  # two-sample Kolmogorov-Smirnov statistic
    max_influence: float  # of p normalized to unit variance
    samples: int
    seed: int


def invariance_distance(p: MultilinearPoly, samples: int, seed: int) -> InvarianceReport:
    """KS distance between the laws of ``p`` on uniform +-1 and on Gaussian inputs.

    ``p`` is rescaled to unit variance first (constants are left alone).
    """
    _check_samples(samples)
    var = p.variance()
    if var == 0.0:
        return InvarianceReport(0.0, 0.0, samples, seed)
    q = p * (1.0 / math.sqrt(var))
    tau = float(influences_poly(q).max())

    def chunk(c: int, size: int):
        signs = stream(seed, "invariance.cube", c).integers(0, 2, size=(size, p.n))
        cube = q.evaluate_many(1.0 - 2.0 * signs)
        gauss = q.evaluate_many(stream(seed, "invariance.gauss", c).standard_normal((size, p.n)))
        return cube, gauss

    parts = run_chunks(chunk, samples)
    cube = np.concatenate([a for a, _ in parts])
    gauss = np.concatenate([b for _, b in parts])
    stat = float(stats.ks_2samp(cube, gauss).statistic)
    return InvarianceReport(stat, tau, samples, seed)
