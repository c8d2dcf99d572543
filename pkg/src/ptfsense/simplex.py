"""Dense bounded-variable revised simplex.

Pricing is Dantzig's largest-reduced-cost rule; after a run of degenerate
pivots it switches to Bland's lowest-index rule, which cannot cycle.

Solves ``max c^T x  s.t.  A x = b,  lo <= x <= hi`` with finite bounds on
the structural variables.  The optimal simplex multipliers ``pi`` (solving
``B^T pi = c_B``) are returned with the solution; L1 regression reads its
weights off them.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

TOL = 1e-9
BLAND_AFTER = 50  # consecutive degenerate pivots before switching to Bland's rule


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray  # simplex multipliers for the equality rows
    iterations: int


class _Tableau:
    def __init__(self, A, b, lo, hi):
        m, N = A.shape
        x = lo.astype(np.float64).copy()
        resid = b - A @ x
        signs = np.where(resid >= 0, 1.0, -1.0)
        # artificial j sits in column N + j with coefficient signs[j] in row j
        self.A = np.hstack([A, np.diag(signs)])
        self.lo = np.concatenate([lo, np.zeros(m)])
        self.hi = np.concatenate([hi, np.full(m, np.inf)])
        self.x = np.concatenate([x, np.abs(resid)])
        self.basis = list(range(N, N + m))
        self.m, self.N = m, N
        self.iterations = 0

    def multipliers(self, c):
        B = self.A[:, self.basis]
        return np.linalg.solve(B.T, c[self.basis])

    def optimize(self, c, max_iter):
        A, lo, hi, x = self.A, self.lo, self.hi, self.x
        scale = max(1.0, float(np.abs(c).max()))
        stall = 0
        while True:
            if self.iterations >= max_iter:
                raise LPError(f"simplex did not converge in {max_iter} iterations")
            pi = self.multipliers(c)
            d = c - A.T @ pi
            d[self.basis] = 0.0
            up = (d > TOL * scale) & (x < hi - TOL)
            down = (d < -TOL * scale) & (x > lo + TOL)
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                return pi
            if stall >= BLAND_AFTER:
                j = int(cand[0])  # Bland: lowest index, guarantees termination
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            step = 1.0 if up[j] else -1.0
            B = A[:, self.basis]
            alpha = np.linalg.solve(B, A[:, j]) * step
            # x_j moves by step * theta, basics move by -alpha * theta
            xb = x[self.basis]
            lob, hib = lo[self.basis], hi[self.basis]
            lims = np.full(self.m, np.inf)
            dec, inc = alpha > TOL, alpha < -TOL
            lims[dec] = (xb[dec] - lob[dec]) / alpha[dec]
            lims[inc] = (hib[inc] - xb[inc]) / -alpha[inc]
            lims = np.maximum(lims, 0.0)
            theta = hi[j] - lo[j]
            leave = None
            best = float(lims.min(initial=np.inf))
            if best < theta:
                theta = best
                ties = np.flatnonzero(lims <= best + TOL)
                leave = int(min(ties, key=lambda r: self.basis[r]))
            if not np.isfinite(theta):
                raise LPError("problem is unbounded")
            x[self.basis] = xb - alpha * theta
            x[j] += step * theta
            if leave is not None:
                out = self.basis[leave]
                x[out] = lo[out] if alpha[leave] > 0 else hi[out]
                self.basis[leave] = j
            stall = stall + 1 if theta <= TOL else 0
            self.iterations += 1


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    max_iter: int = 200_000,
) -> LPResult:
    """Maximize ``c^T x`` over ``{A x = b, lo <= x <= hi}``."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    m, N = A.shape
    if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
        raise ValueError("structural bounds must be finite")
    t = _Tableau(A, b, lo, hi)

    phase1 = np.concatenate([np.zeros(N), -np.ones(m)])
    t.optimize(phase1, max_iter)
    if t.x[N:].sum() > 1e-7 * max(1.0, float(np.abs(b).sum())):
        raise LPError("problem is infeasible")
    _drive_out_artificials(t)
    t.hi[N:] = 0.0  # artificials may no longer move

    full = np.concatenate([c, np.zeros(m)])
    pi = t.optimize(full, max_iter)
    x = t.x[:N].copy()
    return LPResult(x, float(c @ x), pi, t.iterations)


def _drive_out_artificials(t: _Tableau) -> None:
    """Pivot basic artificials (all at zero) out where a structural column can
    replace them; rows with no replacement are redundant and keep theirs."""
    for r in range(t.m):
        art = t.basis[r]
        if art < t.N:
            continue
        B = t.A[:, t.basis]
        row = np.linalg.solve(B.T, np.eye(t.m)[r]) @ t.A[:, : t.N]
        basic = set(t.basis)
        for j in np.flatnonzero(np.abs(row) > 1e-7):
            if int(j) not in basic:
                t.basis[r] = int(j)
                t.x[art] = 0.0
                break


def solve_lp_scipy(c, A, b, lo, hi) -> LPResult:
    """Same problem through scipy's HiGHS backend."""
    from scipy.optimize import linprog

    res = linprog(-np.asarray(c), A_eq=A, b_eq=b, bounds=list(zip(lo, hi)), method="highs")
    if res.status != 0:
        raise LPError(res.message)
    duals = -np.asarray(res.eqlin.marginals)
    return LPResult(res.x, float(np.dot(c, res.x)), duals, int(res.nit))


def residual(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    return float(np.abs(A @ x - b).max(initial=0.0))


SOLVERS = {"simplex": solve_lp, "highs": solve_lp_scipy}


def get_solver(name: Optional[str]):
    try:
        return SOLVERS[name or "simplex"]
    except KeyError:
        raise ValueError(f"unknown LP solver {name!r}; expected one of {sorted(SOLVERS)}") from None
