"""Orthonormal Hermite polynomials and Hermite expansions under N(0, I_n).

``h_0 = 1``, ``h_1 = x``, ``h_2 = (x^2 - 1)/sqrt(2)``, ... normalized so that
``E[h_j(g) h_k(g)] = [j == k]`` for a standard Gaussian ``g``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .poly import MultilinearPoly, vars_of

MultiIndex = Tuple[int, ...]
ArrayLike = Union[float, np.ndarray]

MAX_CONVERSION_DEGREE = 8


def canonical_index(S: Sequence[int]) -> MultiIndex:
    """Trim trailing zeros so equal multi-indices hash equally."""
    S = [int(s) for s in S]
    if any(s < 0 for s in S):
        raise ValueError(f"multi-index entries must be nonnegative: {S}")
    while S and S[-1] == 0:
        S.pop()
    return tuple(S)


def hermite_eval(k: int, x: ArrayLike) -> ArrayLike:
    """``h_k(x)`` by the recurrence ``sqrt(k) h_k = x h_{k-1} - sqrt(k-1) h_{k-2}``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for j in range(1, k + 1):
        prev, cur = cur, (x * cur - math.sqrt(j - 1) * prev) / math.sqrt(j)
    return cur if cur.ndim else float(cur)


def hermite_closed_form(k: int, x: ArrayLike) -> ArrayLike:
    """Explicit alternating sum; cancels badly for large k, kept as a cross-check."""
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(x)
    root = math.sqrt(math.factorial(k))
    for m in range(k // 2 + 1):
        c = root / (math.factorial(k - 2 * m) * math.factorial(m) * 2**m)
        total = total + (-1) ** m * c * x ** (k - 2 * m)
    return total if total.ndim else float(total)


def hermite_eval_multi(S: Sequence[int], x: Sequence[float]) -> float:
    if len(S) != len(x):
        raise ValueError(f"multi-index length {len(S)} != point length {len(x)}")
    out = 1.0
    for k, xi in zip(S, x):
        if k:
            out *= hermite_eval(int(k), float(xi))
    return out


def hermite_growth_bound(k: int, x: float) -> float:
    """``(e k)^(k/2) * max(1, |x|^k)``, an upper bound on ``|h_k(x)|`` for k >= 1."""
    if k < 1:
        raise ValueError("bound is stated for k >= 1")
    return (math.e * k) ** (k / 2) * max(1.0, abs(x) ** k)


def monomial_in_hermite(a: int) -> Dict[int, float]:
    """Coefficients ``c_j`` with ``x^a = sum_j c_j h_j(x)``."""
    if not 0 <= a <= MAX_CONVERSION_DEGREE:
        raise ValueError(f"conversion supported for degrees 0..{MAX_CONVERSION_DEGREE}")
    out = {}
    for m in range(a // 2 + 1):
        j = a - 2 * m
        out[j] = (
            math.factorial(a)
            / (2**m * math.factorial(m) * math.factorial(j))
            * math.sqrt(math.factorial(j))
        )
    return out


@dataclass(frozen=True, eq=False)
class HermiteExpansion:
    """``p(x) = sum_S coeffs[S] * H_S(x)`` over n Gaussian variables."""

    n: int
    coeffs: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        clean: Dict[MultiIndex, float] = {}
        for S, c in self.coeffs.items():
            S = canonical_index(S)
            if len(S) > self.n:
                raise ValueError(f"multi-index {S} longer than n = {self.n}")
            c = float(c)
            if c != 0.0:
                clean[S] = clean.get(S, 0.0) + c
        object.__setattr__(
            self, "coeffs", {k: v for k, v in sorted(clean.items()) if v != 0.0}
        )

    @classmethod
    def from_multilinear(cls, p: MultilinearPoly) -> "HermiteExpansion":
        """Multilinear monomials are products of ``h_1``; the map is the identity
        on coefficients."""
        out = {}
        for m, c in p.coeffs.items():
            S = [0] * p.n
            for v in vars_of(m):
                S[v - 1] = 1
            out[tuple(S)] = c
        return cls(p.n, out)

    @classmethod
    def from_monomial(cls, exponents: Sequence[int], coeff: float = 1.0) -> "HermiteExpansion":
        """Hermite expansion of ``coeff * prod_i x_i^{a_i}``."""
        expansion: Dict[MultiIndex, float] = {(): coeff}
        for i, a in enumerate(exponents):
            nxt: Dict[MultiIndex, float] = {}
            for S, c in expansion.items():
                for j, cj in monomial_in_hermite(int(a)).items():
                    key = tuple(S) + (0,) * (i - len(S)) + (j,)
                    nxt[key] = nxt.get(key, 0.0) + c * cj
            expansion = nxt
        return cls(len(exponents), expansion)

    def __add__(self, other: "HermiteExpansion") -> "HermiteExpansion":
        if self.n != other.n:
            raise ValueError("variable counts differ")
        out = dict(self.coeffs)
        for S, c in other.coeffs.items():
            out[S] = out.get(S, 0.0) + c
        return HermiteExpansion(self.n, out)

    def __mul__(self, scalar: float) -> "HermiteExpansion":
        return HermiteExpansion(self.n, {S: c * scalar for S, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HermiteExpansion):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    @property
    def degree(self) -> int:
        return max((sum(S) for S in self.coeffs), default=0)

    def full_index(self, S: MultiIndex) -> MultiIndex:
        return tuple(S) + (0,) * (self.n - len(S))

    def norm_sq(self) -> float:
        """Squared L2 norm under N(0, I_n), by Parseval."""
        return float(sum(c * c for c in self.coeffs.values()))

    def normalized(self) -> "HermiteExpansion":
        norm = math.sqrt(self.norm_sq())
        if norm == 0.0:
            raise ValueError("cannot normalize the zero polynomial")
        return self * (1.0 / norm)

    def is_multilinear(self) -> bool:
        return all(max(S, default=0) <= 1 for S in self.coeffs)

    def to_multilinear(self) -> MultilinearPoly:
        if not self.is_multilinear():
            raise ValueError("expansion has a Hermite factor of degree > 1")
        out = {}
        for S, c in self.coeffs.items():
            out[sum(1 << j for j, s in enumerate(S) if s)] = c
        return MultilinearPoly(self.n, out)

    @cached_property
    def term_arrays(self) -> kernels.TermArrays:
        return kernels.TermArrays.from_factors(
            [([(j, s) for j, s in enumerate(S) if s], c) for S, c in self.coeffs.items()]
        )

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected shape (N, {self.n}), got {X.shape}")
        return kernels.eval_terms(X, self.term_arrays)


def evaluate_expansion(p: HermiteExpansion, x: Sequence[float]) -> float:
    if len(x) != p.n:
        raise ValueError(f"point has length {len(x)}, expansion has n = {p.n}")
    return float(sum(c * hermite_eval_multi(p.full_index(S), x) for S, c in p.coeffs.items()))


def gaussian_influence_poly(p: HermiteExpansion, i: int) -> float:
    """``GI_i(p) = sum_{S : S_i > 0} p^(S)^2``."""
    if not 1 <= i <= p.n:
        raise IndexError(f"variable {i} out of range 1..{p.n}")
    return float(sum(c * c for S, c in p.coeffs.items() if len(S) >= i and S[i - 1] > 0))


def slice_variable(p: HermiteExpansion, i: int) -> List[HermiteExpansion]:
    """Split ``p = sum_j p_j(x_{-i}) h_j(x_i)``.

    Returns ``[p_0, ..., p_d]`` with d the total degree of p (trailing
    entries may be zero); each ``p_j`` keeps all n variables but has zero
    degree in ``x_i``.
    """
    if not 1 <= i <= p.n:
        raise IndexError(f"variable {i} out of range 1..{p.n}")
    d = p.degree
    parts: List[Dict[MultiIndex, float]] = [{} for _ in range(d + 1)]
    for S, c in p.coeffs.items():
        full = list(p.full_index(S))
        j = full[i - 1]
        full[i - 1] = 0
        parts[j][tuple(full)] = c
    return [HermiteExpansion(p.n, part) for part in parts]
