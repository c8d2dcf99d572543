"""Influence ordering, the tau-critical index and restriction-based
regularity decomposition of multilinear polynomials."""

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .poly import MultilinearPoly, influences_poly, mask_of, sign
from .rng import stream

RATIO_SLACK = 1e-12  # relative slack in the ratio test, absorbs rounding
MAX_EXHAUSTIVE_HEAD = 16
MAX_EXHAUSTIVE_FREE = 20


@dataclass(frozen=True)
class CriticalIndexReport:
    ordering: Tuple[int, ...]  # variables by nonincreasing influence, ties by label
    influences: Tuple[float, ...]  # sorted along ``ordering``
    index: Union[int, float]  # math.inf when the ratio test never passes
    tau: float
    tail_influences: Tuple[float, ...]  # entry i is sum_{j > i} of sorted influences

    @property
    def regular(self) -> bool:
        return self.index == 0


def critical_index_from_influences(influences: Sequence[float], tau: float) -> CriticalIndexReport:
    """Least i with ``Inf_(i+1) / sum_{j > i} Inf_(j) <= tau`` (sorted order).

    An empty or all-zero tail never satisfies the test.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    inf = np.asarray(influences, dtype=np.float64)
    if inf.ndim != 1 or inf.size == 0:
        raise ValueError("need a nonempty influence vector")
    order = np.lexsort((np.arange(inf.size), -inf))
    srt = inf[order]
    tails = np.concatenate([np.cumsum(srt[::-1])[::-1], [0.0]])
    index: Union[int, float] = math.inf
    for i in range(srt.size):
        if tails[i] > 0 and srt[i] <= tau * tails[i] * (1.0 + RATIO_SLACK):
            index = i
            break
    return CriticalIndexReport(
        tuple(int(v) + 1 for v in order),
        tuple(srt.tolist()),
        index,
        float(tau),
        tuple(tails.tolist()),
    )


def critical_index(p: MultilinearPoly, tau: float) -> CriticalIndexReport:
    if p.degree == 0:
        raise ValueError("critical index is undefined for a constant polynomial")
    return critical_index_from_influences(influences_poly(p), tau)


def default_tau(n: int, d: int) -> float:
    """``n^(-(4d+1)/(4d+2))``."""
    return float(n) ** (-(4 * d + 1) / (4 * d + 2))


def head_size(n: int, d: int, tau: float) -> int:
    """``K = ceil(2 d ln(n) / tau)``."""
    return int(math.ceil(2 * d * math.log(n) / tau))


@dataclass(frozen=True)
class TailDecayRow:
    j: int
    tail: float
    bound: float

    @property
    def violated(self) -> bool:
        return self.tail > self.bound * (1.0 + 1e-9) + 1e-15


def tail_decay_check(p: MultilinearPoly, tau: float) -> List[TailDecayRow]:
    """Tail influence after the top j variables against ``(1 - tau)^j Inf(p)``,
    for j up to the critical index (capped at n)."""
    rep = critical_index(p, tau)
    total = rep.tail_influences[0]
    top = p.n if rep.index == math.inf else min(int(rep.index), p.n)
    return [TailDecayRow(j, rep.tail_influences[j], (1.0 - tau) ** j * total) for j in range(top + 1)]


def tail_decay_violations(rows: Sequence[TailDecayRow]) -> List[TailDecayRow]:
    return [r for r in rows if r.violated]


# ---------------------------------------------------------------- restrictions


def restricted_coefficients(
    p: MultilinearPoly, head: Sequence[int], rho_bits: Optional[np.ndarray] = None
) -> Tuple[List[int], np.ndarray]:
    """Coefficients of ``p_rho`` for many restrictions of the ``head`` variables.

    Returns ``(free_masks, values)`` with ``values[g, r]`` the coefficient of
    ``x_{free_masks[g]}`` in ``p_rho`` for restriction r.  Without
    ``rho_bits`` every restriction is enumerated, r being the assignment
    index (bit k set means ``head[k] = -1``); otherwise ``rho_bits`` is an
    (R, k) 0/1 array of sampled assignments.
    """
    head = tuple(int(v) for v in head)
    hmask = mask_of(head)
    slot = {v: k for k, v in enumerate(head)}
    groups: Dict[int, Dict[int, float]] = {}
    for m, c in p.coeffs.items():
        u = 0
        for v in _bits(m & hmask):
            u |= 1 << slot[v]
        g = groups.setdefault(m & ~hmask, {})
        g[u] = g.get(u, 0.0) + c
    free = sorted(groups)
    k = len(head)
    if rho_bits is None:
        vals = np.zeros((len(free), 1 << k))
        for r, fm in enumerate(free):
            for u, c in groups[fm].items():
                vals[r, u] = c
        if vals.size:
            kernels.fwht(vals)
        return free, vals
    signs = 1.0 - 2.0 * np.asarray(rho_bits, dtype=np.float64).reshape(-1, k)
    vals = np.empty((len(free), signs.shape[0]))
    for r, fm in enumerate(free):
        vals[r] = kernels.eval_terms(signs, kernels.TermArrays.from_masks(groups[fm]))
    return free, vals


def _bits(mask: int):
    v = 1
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def _influence_rows(free: Sequence[int], vals: np.ndarray, variables: Sequence[int]) -> np.ndarray:
    """``Inf_v(p_rho)`` for each v in ``variables`` (rows) and restriction (columns)."""
    sq = np.square(vals)
    out = np.zeros((len(variables), vals.shape[1]))
    for r, v in enumerate(variables):
        bit = 1 << (v - 1)
        rows = [g for g, fm in enumerate(free) if fm & bit]
        if rows:
            out[r] = sq[rows].sum(axis=0)
    return out


def _sample_bits(seed: int, tag: str, trials: int, k: int) -> np.ndarray:
    return stream(seed, tag).integers(0, 2, size=(trials, k), dtype=np.int8)


@dataclass(frozen=True)
class DeviationReport:
    head: Tuple[int, ...]
    ell: int
    inf_ell: float  # Inf_ell(p)
    mean: float  # average of Inf_ell(p_rho) over restrictions
    exact: bool  # True when every restriction was enumerated
    restrictions: int
    l2_norm: float  # sqrt(E[Inf_ell(p_rho)^2])
    l2_bound: float  # 3^d Inf_ell(p)
    exceedance: Tuple[Tuple[float, float, Optional[float]], ...]
    # (t, fraction with Inf_ell(p_rho) > t 3^d Inf_ell(p), fitted c in exp(-c t^(1/d)))


def restriction_influence_deviation(
    p: MultilinearPoly,
    head: Union[int, Sequence[int]],
    ell: int,
    trials: int = 4096,
    seed: int = 0,
    t_grid: Sequence[float] = (1.0, 2.0, 3.0, 5.0, 10.0),
    max_exhaustive: int = 12,
) -> DeviationReport:
    """How far ``Inf_ell`` moves under random restrictions of the head.

    An integer ``head`` means the top-k variables of the influence ordering.
    """
    if isinstance(head, int):
        order = np.lexsort((np.arange(p.n), -influences_poly(p)))
        head = tuple(int(v) + 1 for v in order[:head])
    head = tuple(head)
    if ell in head or not 1 <= ell <= p.n:
        raise ValueError(f"x{ell} must be an unrestricted variable")
    exact = len(head) <= max_exhaustive
    bits = None if exact else _sample_bits(seed, "critical.deviation", trials, len(head))
    free, vals = restricted_coefficients(p, head, bits)
    infl = _influence_rows(free, vals, [ell])[0]
    base = sum(c * c for m, c in p.coeffs.items() if m >> (ell - 1) & 1)
    d = max(p.degree, 1)
    scale = 3.0**d * base
    rows = []
    for t in t_grid:
        frac = float(np.mean(infl > t * scale)) if base > 0 else 0.0
        fitted = -math.log(frac) / t ** (1.0 / d) if 0 < frac < 1 else None
        rows.append((float(t), frac, fitted))
    return DeviationReport(
        head, int(ell), float(base), float(infl.mean()), exact, int(infl.size),
        float(math.sqrt(np.mean(np.square(infl)))), float(scale), tuple(rows),
    )


# ---------------------------------------------------------------- decomposition


@dataclass(frozen=True)
class DecompositionOutcome:
    kind: str  # "regular", "small_ci" or "large_ci"
    index: Union[int, float]
    tau: float
    K: int
    degenerate: bool  # K >= n
    head: Tuple[int, ...] = ()
    tau_prime: Optional[float] = None
    restrictions: int = 0
    exhaustive: bool = False
    fraction: Optional[float] = None  # regular tails (small_ci) or constant signs (large_ci)
    certified: int = 0  # large_ci: verdicts settled by the coefficient-sum test
    enumerated: int = 0  # large_ci: verdicts settled by exhaustive evaluation
    seed: Optional[int] = None
    log_base: str = "e"
    meta: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["index"] = "inf" if self.index == math.inf else int(self.index)
        out["head"] = list(self.head)
        return out


def _assignments(k: int, samples: int, seed: int, tag: str):
    if k <= MAX_EXHAUSTIVE_HEAD and (1 << k) <= samples:
        return None, True
    return _sample_bits(seed, tag, samples, k), False


def decompose(
    p: MultilinearPoly, tau: Optional[float] = None, samples: int = 1000, seed: int = 0
) -> DecompositionOutcome:
    """Classify ``p`` as regular, small or large critical index and measure
    how restrictions of the head behave."""
    d = p.degree
    if d == 0:
        raise ValueError("decomposition needs a nonconstant polynomial")
    n = p.n
    if tau is None:
        tau = default_tau(n, d)
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    rep = critical_index(p, tau)
    K = head_size(n, d, tau)
    degenerate = K >= n
    common = dict(index=rep.index, tau=float(tau), K=K, degenerate=degenerate)
    if rep.index == 0:
        return DecompositionOutcome("regular", **common)

    if rep.index <= K:
        k = int(rep.index)
        head = rep.ordering[:k]
        tail = rep.ordering[k:]
        tau_prime = (3.0 * math.log(n)) ** d * tau
        bits, exhaustive = _assignments(k, samples, seed, "critical.small")
        free, vals = restricted_coefficients(p, head, bits)
        infl = _influence_rows(free, vals, tail)
        totals = infl.sum(axis=0)
        ok = (totals > 0) & (infl.max(axis=0, initial=0.0) <= tau_prime * totals * (1 + RATIO_SLACK))
        return DecompositionOutcome(
            "small_ci", **common, head=head, tau_prime=tau_prime,
            restrictions=int(ok.size), exhaustive=exhaustive,
            fraction=float(ok.mean()), seed=None if exhaustive else seed,
        )

    head = rep.ordering[: min(K, n)]
    bits, exhaustive = _assignments(len(head), samples, seed, "critical.large")
    free, vals = restricted_coefficients(p, head, bits)
    const_row = free.index(0) if 0 in free else None
    const = vals[const_row] if const_row is not None else np.zeros(vals.shape[1])
    rest = [g for g, fm in enumerate(free) if fm]
    spread = np.abs(vals[rest]).sum(axis=0) if rest else np.zeros(vals.shape[1])
    verdict = np.abs(const) > spread
    certified = int(verdict.sum())
    enumerated = 0
    free_vars = sorted({v for fm in free for v in _bits(fm)})
    if len(free_vars) <= MAX_EXHAUSTIVE_FREE:
        for r in np.flatnonzero(~verdict):
            verdict[r] = _sign_constant(free, vals[:, r], free_vars)
            enumerated += 1
    return DecompositionOutcome(
        "large_ci", **common, head=head, restrictions=int(verdict.size),
        exhaustive=exhaustive, fraction=float(verdict.mean()),
        certified=certified, enumerated=enumerated, seed=None if exhaustive else seed,
    )


def _sign_constant(free: Sequence[int], coeffs: np.ndarray, free_vars: Sequence[int]) -> bool:
    slot = {v: k for k, v in enumerate(free_vars)}
    dense = np.zeros(1 << len(free_vars))
    for fm, c in zip(free, coeffs):
        u = 0
        for v in _bits(fm):
            u |= 1 << slot[v]
        dense[u] += c
    s = sign(kernels.fwht(dense))
    return bool((s == s[0]).all())
