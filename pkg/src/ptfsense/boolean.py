"""Exact sensitivity analysis of Boolean PTFs ``f = sign(p)``."""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Union

import numpy as np

from .poly import (
    BudgetExceeded,
    MultilinearPoly,
    TruthTable,
    _check_table_budget,
    derivative,
    popcounts,
    sign,
    spectrum,
)


@dataclass(frozen=True, eq=False)
class PtfBoolean:
    """``f(x) = sign(p(x))`` on the hypercube; the table is built on demand."""

    p: MultilinearPoly

    @property
    def n(self) -> int:
        return self.p.n

    @cached_property
    def values(self) -> np.ndarray:
        return self.p.table_values()

    @cached_property
    def table(self) -> TruthTable:
        return TruthTable(self.p.n, sign(self.values))

    def min_margin(self) -> float:
        """``min_x |p(x)|``; zero means a tie resolved by ``sign(0) = +1``."""
        return float(np.abs(self.values).min())


BooleanLike = Union[TruthTable, PtfBoolean]


def as_table(f: BooleanLike) -> TruthTable:
    return f.table if isinstance(f, PtfBoolean) else f


def _flip_pairs(values: np.ndarray, i: int) -> np.ndarray:
    """View of the table as (blocks, 2, 2**(i-1)) pairing x with x^(+i)."""
    h = 1 << (i - 1)
    return values.reshape(-1, 2, h)


def exact_influence(f: BooleanLike, i: int) -> float:
    """``Pr_x[f(x) != f(x^(+i))]`` by enumeration."""
    t = as_table(f)
    _check_table_budget(t.n)
    if not 1 <= i <= t.n:
        raise IndexError(f"variable {i} out of range 1..{t.n}")
    pairs = _flip_pairs(t.values, i)
    return float(np.count_nonzero(pairs[:, 0, :] != pairs[:, 1, :]) * 2) / (1 << t.n)


def exact_influences(f: BooleanLike) -> np.ndarray:
    t = as_table(f)
    return np.array([exact_influence(t, i) for i in range(1, t.n + 1)])


def exact_as(f: BooleanLike) -> float:
    """Average sensitivity, the expected number of sensitive neighbours."""
    return float(exact_influences(f).sum())


def _check_eps(eps: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"noise rate must lie in [0, 1], got {eps}")


def exact_ns(f: BooleanLike, eps: float) -> float:
    """``NS_eps(f) = 1/2 - 1/2 sum_S (1 - 2 eps)^|S| f^(S)^2`` (spectral)."""
    _check_eps(eps)
    t = as_table(f)
    _check_table_budget(t.n)
    if eps == 0.0:
        return 0.0
    weights = np.square(spectrum(t.values))
    levels = np.bincount(popcounts(t.n), weights=weights, minlength=t.n + 1)
    rho = 1.0 - 2.0 * eps
    stability = float(sum(levels[k] * rho**k for k in range(t.n + 1)))
    return 0.5 - 0.5 * stability


def ns_pair_enumeration(f: BooleanLike, eps: float) -> float:
    """O(4^n) oracle: sum over x and flip patterns of Pr[pattern] [f differs]."""
    _check_eps(eps)
    t = as_table(f)
    if t.n > 10:
        raise BudgetExceeded("pair enumeration is limited to n <= 10")
    size = 1 << t.n
    idx = np.arange(size)
    pc = popcounts(t.n)
    total = 0.0
    for flip in range(size):
        k = int(pc[flip])
        w = eps**k * (1.0 - eps) ** (t.n - k)
        if w:
            total += w * np.count_nonzero(t.values != t.values[idx ^ flip]) / size
    return total


def influence_via_derivative(f: PtfBoolean, i: int) -> float:
    """``E[f(x) x_i sign(D_i p(x))]``, which equals ``Inf_i(f)`` exactly."""
    _check_table_budget(f.n)
    d = derivative(f.p, i).table_values()
    xi = np.where((np.arange(1 << f.n) >> (i - 1)) & 1, -1, 1)
    prod = f.table.values.astype(np.int64) * xi * sign(d)
    return float(prod.sum()) / (1 << f.n)


def derivative_influence_report(f: PtfBoolean) -> List[Dict[str, float]]:
    """Per-variable comparison of the two influence formulas."""
    return [
        {"i": i, "direct": exact_influence(f, i), "via_derivative": influence_via_derivative(f, i)}
        for i in range(1, f.n + 1)
    ]


# ---------------------------------------------------------------- AS bounds


def as_bound_closed(n: int, d: int) -> float:
    """``2 n^(1 - 1/2^d)``; zero for d = 0 (constants have no sensitivity)."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if d == 0:
        return 0.0
    return 2.0 * n ** (1.0 - 2.0**-d)


def as_bound_recursive(n: int, d: int) -> float:
    """Unroll ``AS(n, 0) = 0``, ``AS(n, d) <= sqrt(n + n AS(n, d - 1))``."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    value = 0.0
    for _ in range(d):
        value = math.sqrt(n + n * value)
    return value


def majority_as(n: int) -> float:
    """Exact AS of majority on odd n: ``n C(n-1, (n-1)/2) / 2^(n-1)``."""
    if n < 1 or n % 2 == 0:
        raise ValueError("majority needs odd n")
    return n * math.comb(n - 1, (n - 1) // 2) / 2 ** (n - 1)


def central_binomial_mass(n: int) -> float:
    """``2^-n C(n, n/2)`` as written for AS(n, 1) in the source; for odd n
    the floor of n/2 is used.  Compare with :func:`majority_as`."""
    return math.comb(n, n // 2) / 2**n


# ---------------------------------------------------------------- extremal family


@dataclass(frozen=True)
class MiddleLayers:
    table: TruthTable
    boundaries: tuple  # values b of sum(x) where the sign flips
    level_signs: Dict[int, int]  # sum(x) -> f value, for auditing
    polynomial: MultilinearPoly


def _middle_boundaries(n: int, d: int) -> tuple:
    # boundaries sit strictly between attainable sums, i.e. have parity n + 1;
    # nearest to zero first, ties broken towards the positive side
    start = (n + 1) % 2
    cands = []
    b = start
    while len(cands) < 2 * d + 2:
        cands.append(b)
        if b:
            cands.append(-b)
        b += 2
    cands = sorted(set(cands), key=lambda v: (abs(v), -v))
    return tuple(sorted(cands[:d]))


def middle_layers_symmetric(n: int, d: int) -> MiddleLayers:
    """Symmetric PTF ``sign(prod_b (x_1 + ... + x_n - b))`` flipping at the d
    layer boundaries closest to the middle of the cube."""
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d = {d}, n = {n}")
    _check_table_budget(n)
    bounds = _middle_boundaries(n, d)
    s = n - 2 * popcounts(n)
    prod = np.ones(1 << n)
    for b in bounds:
        prod *= s - b
    table = TruthTable(n, sign(prod))
    level_signs = {int(v): int(table.values[np.argmax(s == v)]) for v in range(-n, n + 1, 2)}
    linear = MultilinearPoly(n, {1 << j: 1.0 for j in range(n)})
    poly = MultilinearPoly.constant(n, 1.0)
    for b in bounds:
        poly = poly * (linear - b)
    return MiddleLayers(table, bounds, level_signs, poly)


# ---------------------------------------------------------------- cross term


def _real_table(g: Union[MultilinearPoly, TruthTable, np.ndarray], n: int = None) -> np.ndarray:
    if isinstance(g, MultilinearPoly):
        return g.table_values()
    if isinstance(g, TruthTable):
        return g.values.astype(np.float64)
    return np.asarray(g, dtype=np.float64)


def _real_influence(spec: np.ndarray, i: int) -> float:
    idx = np.arange(spec.size)
    return float(np.square(spec[(idx >> (i - 1)) & 1 == 1]).sum())


def pairwise_cross_term(f, g, i: int, j: int) -> Dict[str, float]:
    """``E[x_i x_j f g]`` and the bound ``(Inf_i(g) + Inf_j(f)) / 2``.

    ``f`` must not depend on ``x_i`` and ``g`` must not depend on ``x_j``;
    both may be real valued (polynomials, tables or raw value arrays).
    """
    fv, gv = _real_table(f), _real_table(g)
    if fv.shape != gv.shape:
        raise ValueError("f and g live on different cubes")
    size = fv.size
    n = size.bit_length() - 1
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValueError("need distinct variables i, j in range")
    fs, gs = spectrum(fv), spectrum(gv)
    if _real_influence(fs, i) > 1e-12 * max(1.0, float(np.square(fs).sum())):
        raise ValueError(f"f depends on x{i}")
    if _real_influence(gs, j) > 1e-12 * max(1.0, float(np.square(gs).sum())):
        raise ValueError(f"g depends on x{j}")
    idx = np.arange(size)
    xi = np.where((idx >> (i - 1)) & 1, -1.0, 1.0)
    xj = np.where((idx >> (j - 1)) & 1, -1.0, 1.0)
    value = float((xi * xj * fv * gv).sum()) / size
    bound = 0.5 * (_real_influence(gs, i) + _real_influence(fs, j))
    return {"value": value, "bound": bound}


def one_flip_lower_bound(f: BooleanLike) -> Dict[str, float]:
    """``NS_{1/n}(f)`` against ``(1 - 1/n)^(n-1) AS(f) / n``."""
    t = as_table(f)
    n = t.n
    ns = exact_ns(t, 1.0 / n)
    lower = (1.0 - 1.0 / n) ** (n - 1) * exact_as(t) / n
    return {"ns": ns, "lower": lower}
