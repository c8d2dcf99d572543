"""Multilinear polynomials and truth tables over the Boolean hypercube.

Conventions used throughout the package:

* variables are 1-based in the public API; bit ``j - 1`` of a subset mask
  stands for variable ``j``;
* truth-table index ``i`` encodes the point ``x`` with ``x_j = -1`` exactly
  when bit ``j - 1`` of ``i`` is set (so index 0 is the all-ones point);
* ``sign(0) = +1``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from . import kernels

MAX_TABLE_VARS = 26


class BudgetExceeded(ValueError):
    """Raised when an exact enumeration would exceed its size budget."""


def sign(values: np.ndarray) -> np.ndarray:
    """Elementwise sign as int8 with the ``sign(0) = +1`` convention."""
    return np.where(np.asarray(values) >= 0, 1, -1).astype(np.int8)


def popcounts(n: int) -> np.ndarray:
    """``popcount(i)`` for every ``0 <= i < 2**n``."""
    pc = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        pc = np.concatenate([pc, pc + 1])
    return pc


def mask_of(variables: Iterable[int]) -> int:
    mask = 0
    for v in variables:
        if v < 1:
            raise ValueError(f"variables are 1-based, got {v}")
        mask |= 1 << (v - 1)
    return mask


def vars_of(mask: int) -> Tuple[int, ...]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def hypercube_points(n: int) -> np.ndarray:
    """All ``2**n`` points as an int8 (2**n, n) array in truth-table order."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def _check_table_budget(n: int) -> None:
    if n > MAX_TABLE_VARS:
        raise BudgetExceeded(f"exact analysis limited to n <= {MAX_TABLE_VARS}, got n = {n}")


def _check_var(n: int, i: int) -> None:
    if not 1 <= i <= n:
        raise IndexError(f"variable {i} out of range 1..{n}")


@dataclass(frozen=True, eq=False)
class MultilinearPoly:
    """``p(x) = sum_S coeffs[S] * prod_{j in S} x_j`` with S stored as a bitmask."""

    n: int
    coeffs: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        clean: Dict[int, float] = {}
        limit = 1 << self.n
        for mask, c in self.coeffs.items():
            mask = int(mask)
            if mask < 0 or mask >= limit:
                raise ValueError(f"term mask {mask:#x} does not fit in {self.n} variables")
            c = float(c)
            if c != 0.0:
                clean[mask] = clean.get(mask, 0.0) + c
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(clean.items()) if v != 0.0})

    # construction -------------------------------------------------------

    @classmethod
    def from_terms(cls, n: int, terms: Mapping[Sequence[int], float]) -> "MultilinearPoly":
        """``from_terms(3, {(1, 2): 1.0, (3,): 1.0})`` is ``x1 x2 + x3``."""
        coeffs: Dict[int, float] = {}
        for variables, c in terms.items():
            variables = tuple(variables)
            if len(set(variables)) != len(variables):
                raise ValueError(f"repeated variable in term {variables}")
            if any(v > n for v in variables):
                raise ValueError(f"term {variables} references a variable above n = {n}")
            m = mask_of(variables)
            coeffs[m] = coeffs.get(m, 0.0) + float(c)
        return cls(n, coeffs)

    @classmethod
    def constant(cls, n: int, c: float) -> "MultilinearPoly":
        return cls(n, {0: c})

    @classmethod
    def variable(cls, n: int, i: int) -> "MultilinearPoly":
        _check_var(n, i)
        return cls(n, {1 << (i - 1): 1.0})

    # basic structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        return max((bin(m).count("1") for m in self.coeffs), default=0)

    def terms(self) -> list:
        """Canonical ``[(vars, coeff)]``: by degree, then lexicographic vars."""
        items = [(vars_of(m), c) for m, c in self.coeffs.items()]
        return sorted(items, key=lambda t: (len(t[0]), t[0]))

    def coefficient(self, variables: Sequence[int]) -> float:
        return self.coeffs.get(mask_of(variables), 0.0)

    def norm_sq(self) -> float:
        return float(sum(c * c for c in self.coeffs.values()))

    def variance(self) -> float:
        return float(sum(c * c for m, c in self.coeffs.items() if m))

    def support_vars(self) -> int:
        """Bitmask of variables appearing with a nonzero coefficient."""
        out = 0
        for m in self.coeffs:
            out |= m
        return out

    def __eq__(self, other):
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __repr__(self):
        body = " + ".join(
            f"{c:g}" + ("*" + "*".join(f"x{v}" for v in vs) if vs else "")
            for vs, c in self.terms()
        )
        return f"MultilinearPoly(n={self.n}, {body or '0'})"

    # arithmetic ---------------------------------------------------------

    def _same_n(self, other: "MultilinearPoly") -> None:
        if self.n != other.n:
            raise ValueError(f"variable counts differ: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = MultilinearPoly.constant(self.n, other)
        self._same_n(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return MultilinearPoly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultilinearPoly(self.n, {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return MultilinearPoly(self.n, {m: c * other for m, c in self.coeffs.items()})
        self._same_n(other)
        out: Dict[int, float] = {}
        for ma, ca in self.coeffs.items():
            for mb, cb in other.coeffs.items():
                m = ma ^ mb  # x_i^2 = 1 on the hypercube
                out[m] = out.get(m, 0.0) + ca * cb
        return MultilinearPoly(self.n, out)

    __rmul__ = __mul__

    # evaluation ---------------------------------------------------------

    @cached_property
    def term_arrays(self) -> kernels.TermArrays:
        return kernels.TermArrays.from_masks(self.coeffs)

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at every row of ``X``; rows may be real, not only +-1."""
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected shape (N, {self.n}), got {X.shape}")
        return kernels.eval_terms(X, self.term_arrays)

    def table_values(self) -> np.ndarray:
        """Values of p at all ``2**n`` points, in truth-table order."""
        _check_table_budget(self.n)
        dense = np.zeros(1 << self.n)
        for m, c in self.coeffs.items():
            dense[m] = c
        return kernels.fwht(dense)


def evaluate(p: MultilinearPoly, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n,):
        raise ValueError(f"point has length {x.size}, polynomial has n = {p.n}")
    total = 0.0
    for m, c in p.coeffs.items():
        term = c
        for v in vars_of(m):
            term *= x[v - 1]
        total += term
    return float(total)


# ---------------------------------------------------------------- truth tables


@dataclass(frozen=True, eq=False)
class TruthTable:
    """Dense +-1 table of a Boolean function, indexed as described above."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (1 << self.n,):
            raise ValueError(f"table length must be 2**{self.n}, got {values.shape}")
        if not np.all((values == 1) | (values == -1)):
            raise ValueError("truth table entries must be +-1")
        values = values.astype(np.int8)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[np.ndarray], int]) -> "TruthTable":
        _check_table_budget(n)
        pts = hypercube_points(n)
        return cls(n, np.array([fn(x) for x in pts], dtype=np.int8))

    @classmethod
    def sign_of(cls, p: MultilinearPoly) -> "TruthTable":
        return cls(p.n, sign(p.table_values()))

    def __call__(self, x: Sequence[int]) -> int:
        return int(self.values[index_of(x)])

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.n, self.values.tobytes()))

    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))


def index_of(x: Sequence[int]) -> int:
    idx = 0
    for j, xj in enumerate(x):
        if xj == -1:
            idx |= 1 << j
        elif xj != 1:
            raise ValueError("hypercube points must be +-1")
    return idx


def spectrum(values: np.ndarray) -> np.ndarray:
    """Dense Fourier coefficients ``f^(S)`` of a real table, indexed by mask."""
    size = values.shape[-1]
    dense = np.array(values, dtype=np.float64, order="C")
    kernels.fwht(dense)
    dense /= size
    return dense


def fourier_transform(f: TruthTable) -> MultilinearPoly:
    """Fourier expansion of ``f`` as a multilinear polynomial (fast WHT)."""
    dense = spectrum(f.values)
    nz = np.flatnonzero(dense)
    return MultilinearPoly(f.n, dict(zip(nz.tolist(), dense[nz].tolist())))


# ---------------------------------------------------------------- influences


def influence_poly(p: MultilinearPoly, i: int) -> float:
    """``Inf_i(p) = sum_{S containing i} p^(S)^2``."""
    _check_var(p.n, i)
    bit = 1 << (i - 1)
    return float(sum(c * c for m, c in p.coeffs.items() if m & bit))


def influences_poly(p: MultilinearPoly) -> np.ndarray:
    """All coordinate influences, entry ``i - 1`` for variable ``i``."""
    out = np.zeros(p.n)
    for m, c in p.coeffs.items():
        w = c * c
        for v in vars_of(m):
            out[v - 1] += w
    return out


def total_influence_poly(p: MultilinearPoly) -> float:
    return float(sum(bin(m).count("1") * c * c for m, c in p.coeffs.items()))


def derivative(p: MultilinearPoly, i: int) -> MultilinearPoly:
    """Formal derivative ``D_i p = sum_{S containing i} p^(S) x_{S - i}``."""
    _check_var(p.n, i)
    bit = 1 << (i - 1)
    return MultilinearPoly(p.n, {m ^ bit: c for m, c in p.coeffs.items() if m & bit})


@dataclass(frozen=True)
class Restriction:
    """Partial assignment ``{variable: +-1}`` with 1-based variables."""

    assignments: Mapping[int, int]

    def __post_init__(self):
        clean = {}
        for v, b in dict(self.assignments).items():
            v, b = int(v), int(b)
            if v < 1:
                raise ValueError(f"variables are 1-based, got {v}")
            if b not in (1, -1):
                raise ValueError(f"assignment for x{v} must be +-1, got {b}")
            clean[v] = b
        object.__setattr__(self, "assignments", dict(sorted(clean.items())))

    @classmethod
    def from_index(cls, variables: Sequence[int], index: int) -> "Restriction":
        """Assignment number ``index`` over ``variables`` (bit k set -> -1)."""
        return cls({v: -1 if (index >> k) & 1 else 1 for k, v in enumerate(variables)})

    def mask(self) -> int:
        return mask_of(self.assignments)

    def __hash__(self):
        return hash(tuple(self.assignments.items()))


def restrict(p: MultilinearPoly, rho: Restriction) -> MultilinearPoly:
    """Substitute the assigned variables; the result keeps ``n`` but only
    carries terms over the free variables."""
    for v in rho.assignments:
        if v > p.n:
            raise ValueError(f"restriction assigns x{v} but n = {p.n}")
    assigned = rho.mask()
    neg = mask_of(v for v, b in rho.assignments.items() if b == -1)
    out: Dict[int, float] = {}
    for m, c in p.coeffs.items():
        if bin(m & neg).count("1") & 1:
            c = -c
        free = m & ~assigned
        out[free] = out.get(free, 0.0) + c
    return MultilinearPoly(p.n, out)
