"""Average sensitivity to noise sensitivity, and the replication construction
comparing Boolean and Gaussian noise sensitivity.

A reduction sample draws ``a`` uniform in {-1, 1}^n and a uniform labelling
``alpha: [n] -> [m]``; then ``f_{a, alpha}(z) = f(a_1 z_alpha(1), ..., a_n z_alpha(n))``
is a function of m bits.  Flipping ``z_r`` flips every coordinate in block r,
and averaging ``Inf(f_{a, alpha}) / m`` over the draws gives ``NS_{1/m}(f)``.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .boolean import PtfBoolean, as_bound_closed, as_table, exact_ns
from .gaussian import estimate_gns, sheppard
from .hermite import HermiteExpansion
from .poly import (
    BudgetExceeded,
    MultilinearPoly,
    TruthTable,
    _check_table_budget,
    popcounts,
    spectrum,
)
from .rng import Estimate, Moments, merge_all, run_chunks, stream

MAX_EXACT_BLOCKS = 20
MAX_REPLICATED_VARS = 24
REDUCTION_CHUNK = 4096


@dataclass(frozen=True)
class ReductionSample:
    """A batch of draws; row t holds one (a, alpha, z, r)."""

    a: np.ndarray  # (T, n) entries +-1
    alpha: np.ndarray  # (T, n) block labels in 0..m-1
    z: np.ndarray  # (T, m) entries +-1
    r: np.ndarray  # (T,) flipped block
    m: int

    def x(self) -> np.ndarray:
        return self.a * np.take_along_axis(self.z, self.alpha, axis=1)

    def y(self) -> np.ndarray:
        """``x`` with every coordinate of block ``r`` flipped."""
        flip = np.where(self.alpha == self.r[:, None], -1, 1)
        return self.x() * flip


def sample_reduction(n: int, m: int, size: int, rng: np.random.Generator) -> ReductionSample:
    if m < 1:
        raise ValueError("need at least one block")
    a = 1 - 2 * rng.integers(0, 2, size=(size, n), dtype=np.int8)
    alpha = rng.integers(0, m, size=(size, n))
    z = 1 - 2 * rng.integers(0, 2, size=(size, m), dtype=np.int8)
    r = rng.integers(0, m, size=size)
    return ReductionSample(a, alpha, z, r, m)


def blocks_for(eps: float) -> int:
    """``m = floor(1 / eps)``; the reduction then runs at rate ``1/m >= eps``."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"noise rate must lie in (0, 1], got {eps}")
    return int(math.floor(1.0 / eps + 1e-12))


def fourier_degree(t: TruthTable, tol: float = 1e-12) -> int:
    spec = spectrum(t.values)
    nz = np.abs(spec) > tol
    return int(popcounts(t.n)[nz].max()) if nz.any() else 0


@dataclass(frozen=True)
class ReductionReport:
    n: int
    d: int
    eps: float
    m: int
    rate: float  # 1/m, the rate the estimate refers to
    estimate: Estimate
    exact_ns: Optional[float]
    bound_over_m: float  # closed-form AS bound at (m, d), divided by m

    def row(self) -> dict:
        return {
            "n": self.n, "d": self.d, "eps": self.eps, "m": self.m, "rate": self.rate,
            "estimate": self.estimate.mean, "stderr": self.estimate.stderr,
            "samples": self.estimate.samples, "seed": self.estimate.seed,
            "exact_ns": self.exact_ns, "bound_over_m": self.bound_over_m,
        }


def reduction_estimate(
    f: Union[TruthTable, PtfBoolean],
    eps: float,
    trials: int,
    seed: int,
    inner: int = 64,
) -> ReductionReport:
    """Estimate ``(1/m) E_{a, alpha}[Inf(f_{a, alpha})]`` with ``m = floor(1/eps)``.

    For ``m <= 20`` each ``Inf(f_{a, alpha})`` is exact (all 2^m inputs);
    beyond that every trial averages ``inner`` random (z, r) flips, whose
    spread is part of the per-trial values and hence of the reported stderr.
    """
    m = blocks_for(eps)
    t = as_table(f)
    _check_table_budget(t.n)
    n = t.n
    table = t.values
    weights = (1 << np.arange(n, dtype=np.int64))

    def chunk(c: int, size: int) -> Moments:
        rng = stream(seed, "reduction", c)
        s = sample_reduction(n, m, size, rng)
        if m <= MAX_EXACT_BLOCKS:
            abits = (s.a < 0).astype(np.int64)
            return Moments.of(kernels.reduction_total_influence(table, abits, s.alpha, m))
        hits = np.zeros(size)
        for _ in range(inner):
            s = ReductionSample(s.a, s.alpha, *_redraw_flip(rng, size, m), m)
            ix = ((s.x() < 0) * weights).sum(axis=1)
            iy = ((s.y() < 0) * weights).sum(axis=1)
            hits += table[ix] != table[iy]
        return Moments.of(hits / inner * m)

    # average total influence, then scale once so a constant Inf gives exactly Inf/m
    est = merge_all(run_chunks(chunk, trials, REDUCTION_CHUNK)).estimate(seed).scaled(1.0 / m)
    d = f.p.degree if isinstance(f, PtfBoolean) else fourier_degree(t)
    return ReductionReport(
        n, d, float(eps), m, 1.0 / m, est, exact_ns(t, 1.0 / m), as_bound_closed(m, d) / m
    )


def _redraw_flip(rng: np.random.Generator, size: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    z = 1 - 2 * rng.integers(0, 2, size=(size, m), dtype=np.int8)
    return z, rng.integers(0, m, size=size)


# ---------------------------------------------------------------- replication


def replica_variable(i: int, j: int, k: int) -> int:
    """1-based index of replica j (0-based) of original variable i (1-based)."""
    return (i - 1) * k + j + 1


def replicate(p: MultilinearPoly, k: int) -> PtfBoolean:
    """``h_k(y) = sign(p(S_1/sqrt(k), ..., S_n/sqrt(k)))``, ``S_i`` the sum of
    the k replicas of ``x_i``; replicas of ``x_i`` are variables
    ``(i-1)k + 1 .. ik``."""
    if k < 1:
        raise ValueError("need k >= 1")
    N = p.n * k
    if N > MAX_REPLICATED_VARS:
        raise BudgetExceeded(f"replication needs n*k <= {MAX_REPLICATED_VARS}, got {N}")
    scale = 1.0 / math.sqrt(k)
    sums = [
        MultilinearPoly(N, {1 << (replica_variable(i, j, k) - 1): scale for j in range(k)})
        for i in range(1, p.n + 1)
    ]
    out = MultilinearPoly(N, {})
    for mask, c in p.coeffs.items():
        term = MultilinearPoly.constant(N, c)
        for v in range(1, p.n + 1):
            if mask >> (v - 1) & 1:
                term = term * sums[v - 1]
        out = out + term
    return PtfBoolean(out)


@dataclass(frozen=True)
class ReplicationRow:
    k: int
    ns: float  # exact NS of h_k at bit-flip rate eps/2 (correlation 1 - eps)
    gns: float  # Gaussian NS of sign(p) at rate eps
    gns_stderr: float

    @property
    def gap(self) -> float:
        return self.ns - self.gns


def replication_report(
    p: MultilinearPoly,
    ks: Sequence[int],
    eps: float,
    samples: int = 200_000,
    seed: int = 0,
) -> List[ReplicationRow]:
    """Boolean NS of ``replicate(p, k)`` next to the Gaussian NS of ``sign(p)``.

    Gaussian noise at rate eps correlates coordinates by ``1 - eps``; the
    matching Boolean rate flips each bit with probability ``eps / 2``.
    Linear ``p`` uses the closed form, others a Monte Carlo estimate.
    """
    if p.degree == 1 and p.coefficient(()) == 0.0:
        gns, err = sheppard(1.0 - eps), 0.0
    else:
        est = estimate_gns(HermiteExpansion.from_multilinear(p), eps, samples, seed)
        gns, err = est.mean, est.stderr
    return [ReplicationRow(int(k), exact_ns(replicate(p, k), eps / 2.0), gns, err) for k in ks]
