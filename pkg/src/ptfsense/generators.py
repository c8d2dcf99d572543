"""Random degree-d PTF families used by tests, suites and the CLI.

``dense``   Gaussian coefficients on every monomial of degree <= d.
``sparse``  Gaussian coefficients on ``terms`` distinct random monomials.
``regular`` equal-magnitude coefficients with random signs on every
            degree-d monomial, plus a +-1/2 constant so ``p`` never hits 0.

Hypercube samples are redrawn until ``min |p(x)|`` clears a relative margin,
so ``sign(0)`` ties never arise in exact analysis.
"""

import itertools
import math
from typing import List, Optional

import numpy as np

from .hermite import HermiteExpansion
from .poly import MAX_TABLE_VARS, MultilinearPoly, mask_of

FAMILIES = ("dense", "sparse", "regular")
TIE_MARGIN = 1e-9
MAX_REDRAWS = 100


def monomial_masks(n: int, d: int, exact: bool = False) -> List[int]:
    sizes = [d] if exact else range(d + 1)
    return [mask_of(c) for k in sizes for c in itertools.combinations(range(1, n + 1), k)]


def _draw(n: int, d: int, family: str, rng: np.random.Generator, terms: Optional[int]):
    if family == "dense":
        masks = monomial_masks(n, d)
        return dict(zip(masks, rng.standard_normal(len(masks)).tolist()))
    if family == "sparse":
        pool = monomial_masks(n, d)
        k = min(len(pool), terms if terms is not None else 2 * n)
        chosen = rng.choice(len(pool), size=k, replace=False)
        return {pool[c]: float(v) for c, v in zip(sorted(chosen.tolist()), rng.standard_normal(k))}
    if family == "regular":
        masks = monomial_masks(n, d, exact=True)
        coeffs = dict(zip(masks, rng.choice([-1.0, 1.0], size=len(masks)).tolist()))
        coeffs[0] = float(rng.choice([-0.5, 0.5]))
        return coeffs
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def random_poly(
    n: int,
    d: int,
    rng: np.random.Generator,
    family: str = "dense",
    terms: Optional[int] = None,
) -> MultilinearPoly:
    """A random degree-<=d multilinear polynomial (ties on the cube allowed)."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d = {d}, n = {n}")
    return MultilinearPoly(n, _draw(n, d, family, rng, terms))


def random_ptf(
    n: int,
    d: int,
    rng: np.random.Generator,
    family: str = "dense",
    terms: Optional[int] = None,
) -> MultilinearPoly:
    """A random degree-<=d multilinear polynomial with no hypercube zeros."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d = {d}, n = {n}")
    for _ in range(MAX_REDRAWS):
        p = MultilinearPoly(n, _draw(n, d, family, rng, terms))
        if not p.coeffs:
            continue
        if n > MAX_TABLE_VARS:
            return p
        margin = float(np.abs(p.table_values()).min())
        if margin > TIE_MARGIN * math.sqrt(p.norm_sq()):
            return p
    raise RuntimeError("could not draw a tie-free polynomial")


def multi_indices(n: int, d: int, exact: bool = False) -> List[tuple]:
    """Multi-indices in N^n with total degree <= d (or == d), graded order."""
    def rec(prefix: tuple, left: int, budget: int):
        if left == 0:
            yield prefix
            return
        for k in range(budget + 1):
            yield from rec(prefix + (k,), left - 1, budget - k)

    out = [S for S in rec((), n, d) if not exact or sum(S) == d]
    return sorted(out, key=lambda S: (sum(S), tuple(-s for s in S)))


def random_expansion(
    n: int,
    d: int,
    rng: np.random.Generator,
    family: str = "dense",
    max_univariate: Optional[int] = None,
) -> HermiteExpansion:
    """Random Hermite expansion of total degree <= d with ``||p||_2 = 1``.

    ``dense`` puts Gaussian weights on every multi-index of total degree
    1..d (plus a constant); ``regular`` puts equal-magnitude random-sign
    weights on every multi-index of total degree exactly d.
    """
    cap = d if max_univariate is None else max_univariate
    indices = [S for S in multi_indices(n, d, exact=(family == "regular")) if max(S, default=0) <= cap]
    if family == "dense":
        vals = rng.standard_normal(len(indices))
    elif family == "regular":
        vals = rng.choice([-1.0, 1.0], size=len(indices))
    else:
        raise ValueError(f"unknown expansion family {family!r}")
    return HermiteExpansion(n, dict(zip(indices, vals.tolist()))).normalized()
