"""Hot numeric kernels with a numba path and a pure-numpy path.

Every public kernel here dispatches on :func:`ptfsense._backend.get_backend`.
The two implementations perform the same floating-point operations in the
same order, so their outputs agree bit for bit; tests hold them to that.

Polynomials reach the kernels as a :class:`TermArrays` bundle, a CSR-style
encoding of ``sum_t coef[t] * prod_e h_{deg[e]}(x[var[e]])``.  Multilinear
polynomials are the special case where every degree is 1.
"""

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from ._backend import HAS_NUMBA, get_backend

_MAX_HERMITE_DEGREE = 64
_SQRT = np.sqrt(np.arange(_MAX_HERMITE_DEGREE + 2, dtype=np.float64))


@dataclass(frozen=True)
class TermArrays:
    """Flat encoding of a sparse polynomial for the evaluation kernels."""

    ptr: np.ndarray  # int64, len = terms + 1
    slot: np.ndarray  # int64, index into used_vars per factor
    deg: np.ndarray  # int64, Hermite degree per factor
    coef: np.ndarray  # float64 per term
    used_vars: np.ndarray  # int64, 0-based columns of X that appear
    maxdeg: np.ndarray  # int64, highest degree needed per used var

    @classmethod
    def from_factors(
        cls, terms: Sequence[Tuple[Sequence[Tuple[int, int]], float]]
    ) -> "TermArrays":
        """Build from ``[(((var0, deg), ...), coef), ...]`` with 0-based vars."""
        used: dict = {}
        for factors, _ in terms:
            for v, k in factors:
                used[v] = max(used.get(v, 0), k)
        used_vars = np.array(sorted(used), dtype=np.int64)
        slot_of = {v: s for s, v in enumerate(used_vars.tolist())}
        maxdeg = np.array([used[v] for v in used_vars.tolist()], dtype=np.int64)
        if maxdeg.size and maxdeg.max() > _MAX_HERMITE_DEGREE:
            raise ValueError(f"Hermite degree above {_MAX_HERMITE_DEGREE} is not supported")
        ptr = [0]
        slot, deg, coef = [], [], []
        for factors, c in terms:
            for v, k in factors:
                if k > 0:
                    slot.append(slot_of[v])
                    deg.append(k)
            ptr.append(len(slot))
            coef.append(float(c))
        return cls(
            ptr=np.array(ptr, dtype=np.int64),
            slot=np.array(slot, dtype=np.int64),
            deg=np.array(deg, dtype=np.int64),
            coef=np.array(coef, dtype=np.float64),
            used_vars=used_vars,
            maxdeg=maxdeg,
        )

    @classmethod
    def from_masks(cls, coeffs: Mapping[int, float]) -> "TermArrays":
        terms = []
        for mask, c in coeffs.items():
            factors = []
            j = 0
            while mask:
                if mask & 1:
                    factors.append((j, 1))
                mask >>= 1
                j += 1
            terms.append((factors, c))
        return cls.from_factors(terms)


# ---------------------------------------------------------------- numpy path


def _fwht_numpy(a: np.ndarray) -> None:
    size = a.shape[-1]
    lead = a.shape[:-1]
    h = 1
    while h < size:
        v = a.reshape(lead + (size // (2 * h), 2, h))
        x = v[..., 0, :].copy()
        v[..., 0, :] += v[..., 1, :]
        np.negative(v[..., 1, :], out=v[..., 1, :])
        v[..., 1, :] += x
        h *= 2


def _eval_terms_numpy(X, ptr, slot, deg, coef, used_vars, maxdeg, sq):
    N = X.shape[0]
    top = int(maxdeg.max()) if maxdeg.size else 0
    H = np.empty((used_vars.shape[0], top + 1, N))
    for u in range(used_vars.shape[0]):
        x = X[:, used_vars[u]]
        H[u, 0] = 1.0
        if maxdeg[u] >= 1:
            H[u, 1] = x
        for k in range(2, int(maxdeg[u]) + 1):
            H[u, k] = (x * H[u, k - 1] - sq[k - 1] * H[u, k - 2]) / sq[k]
    out = np.zeros(N)
    for t in range(ptr.shape[0] - 1):
        v = np.full(N, coef[t])
        for e in range(ptr[t], ptr[t + 1]):
            v *= H[slot[e], deg[e]]
        out += v
    return out


def _reduction_numpy(table, abits, alpha, m):
    T, n = abits.shape
    size = 1 << m
    u = np.arange(size, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    out = np.empty(T)
    for t in range(T):
        base = int((abits[t].astype(np.int64) << shifts).sum())
        bits = (u[:, None] >> alpha[t][None, :]) & 1
        idx = base ^ (bits << shifts[None, :]).sum(axis=1)
        g = table[idx]
        cnt = 0
        for r in range(m):
            cnt += int(np.count_nonzero(g != g[u ^ (1 << r)]))
        out[t] = cnt / size
    return out


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:
    from numba import njit

    @njit(cache=True, nogil=True)
    def _fwht_numba_1d(a):
        size = a.shape[0]
        h = 1
        while h < size:
            for i in range(0, size, 2 * h):
                for j in range(i, i + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
            h *= 2

    @njit(cache=True, nogil=True)
    def _fwht_numba_2d(a):
        for r in range(a.shape[0]):
            _fwht_numba_1d(a[r])

    @njit(cache=True, nogil=True)
    def _eval_terms_numba(X, ptr, slot, deg, coef, used_vars, maxdeg, sq):
        N = X.shape[0]
        nu = used_vars.shape[0]
        top = 0
        for u in range(nu):
            if maxdeg[u] > top:
                top = maxdeg[u]
        H = np.empty((nu, top + 1, N))
        for u in range(nu):
            for s in range(N):
                x = X[s, used_vars[u]]
                H[u, 0, s] = 1.0
                if maxdeg[u] >= 1:
                    H[u, 1, s] = x
                for k in range(2, maxdeg[u] + 1):
                    H[u, k, s] = (x * H[u, k - 1, s] - sq[k - 1] * H[u, k - 2, s]) / sq[k]
        out = np.zeros(N)
        B = 2048  # sample block kept in cache across all terms
        tmp = np.empty(B)
        for lo in range(0, N, B):
            hi = min(N, lo + B)
            for t in range(ptr.shape[0] - 1):
                for s in range(hi - lo):
                    tmp[s] = coef[t]
                for e in range(ptr[t], ptr[t + 1]):
                    h = H[slot[e], deg[e]]
                    for s in range(hi - lo):
                        tmp[s] *= h[lo + s]
                for s in range(hi - lo):
                    out[lo + s] += tmp[s]
        return out

    @njit(cache=True, nogil=True)
    def _reduction_numba(table, abits, alpha, m):
        T, n = abits.shape
        size = 1 << m
        out = np.empty(T)
        g = np.empty(size, dtype=np.int8)
        for t in range(T):
            base = 0
            for j in range(n):
                if abits[t, j]:
                    base |= 1 << j
            for u in range(size):
                idx = base
                for j in range(n):
                    if (u >> alpha[t, j]) & 1:
                        idx ^= 1 << j
                g[u] = table[idx]
            cnt = 0
            for u in range(size):
                for r in range(m):
                    if g[u] != g[u ^ (1 << r)]:
                        cnt += 1
            out[t] = cnt / size
        return out


# ---------------------------------------------------------------- dispatch


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis, in place.

    ``out[s] = sum_i a[i] * (-1)**popcount(i & s)``.  Applying it twice
    multiplies by the length.  ``a`` must be a C-contiguous float64 array
    whose last dimension is a power of two.
    """
    if a.dtype != np.float64 or not a.flags.c_contiguous:
        raise TypeError("fwht needs a C-contiguous float64 array")
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("last dimension must be a power of two")
    if get_backend() == "numba":
        if a.ndim == 1:
            _fwht_numba_1d(a)
        else:
            _fwht_numba_2d(a.reshape(-1, size))
    else:
        _fwht_numpy(a)
    return a


def eval_terms(X: np.ndarray, terms: TermArrays) -> np.ndarray:
    """Evaluate an encoded polynomial at every row of ``X`` (shape (N, n))."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    args = (X, terms.ptr, terms.slot, terms.deg, terms.coef,
            terms.used_vars, terms.maxdeg, _SQRT)
    if get_backend() == "numba":
        return _eval_terms_numba(*args)
    return _eval_terms_numpy(*args)


def reduction_total_influence(
    table: np.ndarray, abits: np.ndarray, alpha: np.ndarray, m: int
) -> np.ndarray:
    """Total influence of ``z -> f(a * z[alpha])`` for each sampled (a, alpha).

    ``table`` is the int8 truth table of f, ``abits[t, j]`` is 1 where
    ``a_j = -1`` and ``alpha[t, j]`` is the 0-based block of variable j.
    """
    table = np.ascontiguousarray(table, dtype=np.int8)
    abits = np.ascontiguousarray(abits, dtype=np.int64)
    alpha = np.ascontiguousarray(alpha, dtype=np.int64)
    if get_backend() == "numba":
        return _reduction_numba(table, abits, alpha, int(m))
    return _reduction_numpy(table, abits, alpha, int(m))
