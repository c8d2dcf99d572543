"""Agnostic learning of PTF-like concepts by L1 polynomial regression.

Fit ``p`` of degree <= d minimizing ``sum_j |p(x_j) - y_j|``, then output
``sign(p(x) - t)`` with the threshold t minimizing training error.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .hermite import HermiteExpansion, hermite_eval
from .poly import MultilinearPoly, mask_of, sign
from .simplex import get_solver

BASES = ("multilinear", "hermite")
Feature = Tuple[int, ...]


def feature_index(n: int, d: int, basis: str = "multilinear") -> List[Feature]:
    """Canonical feature order: by degree, then lexicographic.

    Multilinear features are sorted variable tuples (1-based); Hermite
    features are full-length multi-indices, larger exponents on earlier
    variables first within a degree.
    """
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got d = {d}, n = {n}")
    if basis == "multilinear":
        return [c for k in range(d + 1) for c in itertools.combinations(range(1, n + 1), k)]
    if basis == "hermite":
        out = []
        for k in range(d + 1):
            level = []
            for cut in itertools.combinations_with_replacement(range(n), k):
                S = [0] * n
                for v in cut:
                    S[v] += 1
                level.append(tuple(S))
            out.extend(sorted(set(level), reverse=True))
        return out
    raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")


def feature_matrix(X: np.ndarray, d: int, basis: str = "multilinear") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-d sample matrix")
    N, n = X.shape
    feats = feature_index(n, d, basis)
    out = np.ones((N, len(feats)))
    if basis == "multilinear":
        for f, S in enumerate(feats):
            for v in S:
                out[:, f] *= X[:, v - 1]
        return out
    H = np.stack([hermite_eval(k, X) if k else np.ones_like(X) for k in range(d + 1)])
    for f, S in enumerate(feats):
        for v, k in enumerate(S):
            if k:
                out[:, f] *= H[k, :, v]
    return out


def feature_map(x: Sequence[float], d: int, basis: str = "multilinear") -> np.ndarray:
    """Feature vector of one point in canonical order."""
    return feature_matrix(np.asarray(x, dtype=np.float64)[None, :], d, basis)[0]


@dataclass(frozen=True)
class RegressionModel:
    n: int
    degree: int
    basis: str
    weights: Dict[Feature, float]
    threshold: float
    objective: Optional[float] = None  # training L1 loss of the fitted polynomial

    def weight_vector(self) -> np.ndarray:
        return np.array([self.weights.get(S, 0.0) for S in feature_index(self.n, self.degree, self.basis)])

    def scores(self, X: np.ndarray) -> np.ndarray:
        return feature_matrix(X, self.degree, self.basis) @ self.weight_vector()

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sign(self.scores(X) - self.threshold)

    def polynomial(self):
        """The fitted polynomial as a :class:`MultilinearPoly` or :class:`HermiteExpansion`."""
        if self.basis == "multilinear":
            return MultilinearPoly(self.n, {mask_of(S): w for S, w in self.weights.items()})
        return HermiteExpansion(self.n, dict(self.weights))


def l1_objective(Phi: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    return float(np.abs(Phi @ w - y).sum())


def l1_regression(Phi: np.ndarray, y: np.ndarray, solver: Optional[str] = None) -> np.ndarray:
    """Weights minimizing ``||Phi w - y||_1``.

    Solved through the dual ``max y^T u  s.t.  Phi^T u = 0, -1 <= u <= 1``,
    whose optimal multipliers are the primal weights.
    """
    Phi = np.asarray(Phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    N = Phi.shape[0]
    res = get_solver(solver)(y, Phi.T, np.zeros(Phi.shape[1]), -np.ones(N), np.ones(N))
    return np.asarray(res.duals, dtype=np.float64)


def best_threshold(scores: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Threshold minimizing the training error of ``sign(score - t)``.

    Candidates are the midpoints between consecutive distinct scores plus
    one point beyond each end; ties go to the candidate of smallest |t|.
    Returns ``(t, error_rate)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    vals = np.unique(scores)
    cands = np.concatenate([[vals[0] - 1.0], (vals[:-1] + vals[1:]) / 2.0, [vals[-1] + 1.0]])
    order = np.argsort(scores, kind="stable")
    s, ys = scores[order], y[order]
    pos_below = np.concatenate([[0], np.cumsum(ys > 0)])
    neg_total = int(np.count_nonzero(ys < 0))
    neg_below = np.concatenate([[0], np.cumsum(ys < 0)])
    k = np.searchsorted(s, cands, side="left")  # points with score < t predict -1
    errors = pos_below[k] + (neg_total - neg_below[k])
    best = np.flatnonzero(errors == errors.min())
    pick = min(best, key=lambda c: (abs(cands[c]), cands[c]))
    return float(cands[pick]), float(errors[pick]) / y.size


def l1_fit(
    X: np.ndarray,
    y: np.ndarray,
    d: int,
    basis: str = "multilinear",
    solver: Optional[str] = None,
) -> RegressionModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("dataset must be a nonempty 2-d array")
    if X.shape[0] != y.size:
        raise ValueError("sample and label counts differ")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +-1")
    n = X.shape[1]
    feats = feature_index(n, d, basis)
    if (X == X[0]).all():
        # every feature is constant: the L1 optimum is a constant, the median label
        w = {(): float(np.median(y))} if basis == "multilinear" else {(0,) * n: float(np.median(y))}
        Phi = np.ones((X.shape[0], 1))
        t, _ = best_threshold(np.full(y.size, w[next(iter(w))]), y)
        return RegressionModel(n, d, basis, w, t, l1_objective(Phi, y, np.array(list(w.values()))))
    Phi = feature_matrix(X, d, basis)
    w = l1_regression(Phi, y, solver)
    scores = Phi @ w
    t, _ = best_threshold(scores, y)
    weights = {S: float(v) for S, v in zip(feats, w) if v != 0.0}
    return RegressionModel(n, d, basis, weights, t, l1_objective(Phi, y, w))


def evaluate(model: RegressionModel, X: np.ndarray, y: np.ndarray) -> float:
    """Misclassification rate of the model on a labelled set."""
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("test set is empty")
    return float(np.mean(model.predict(X) != y))


# ---------------------------------------------------------------- degree choice


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 0.5:
        raise ValueError(f"accuracy must lie in (0, 1/2), got {eps}")


def noise_budget(eps: float, setting: str) -> float:
    """Noise sensitivity level below which degree ``1/gamma`` suffices."""
    _check_eps(eps)
    if setting == "hypercube":
        return (1.0 - math.exp(-2.0)) * eps * eps / 2.0
    if setting == "gaussian":
        return (1.0 - math.exp(-1.0)) * eps * eps / 2.0
    raise ValueError(f"unknown setting {setting!r}; expected 'hypercube' or 'gaussian'")


def log_inverse_noise_rate(eps: float, setting: str, d_target: int) -> float:
    """``ln(1/gamma)`` for the noise rate gamma at which the degree-d bound
    (hidden constants set to 1) meets the budget.

    hypercube: ``gamma^(1/2^d) = budget``.
    gaussian:  ``d sqrt(ln(1/gamma)) gamma^(1/(2d)) = budget``, taking the root
    with ``gamma < min(1/2, e^-d)`` where the left side is increasing.
    """
    if d_target < 1:
        raise ValueError("target degree must be at least 1")
    budget = noise_budget(eps, setting)
    if setting == "hypercube":
        return 2.0**d_target * math.log(1.0 / budget)
    d = d_target
    lo = max(math.log(2.0), float(d))

    def g(s):  # log of the bound minus log of the budget, s = ln(1/gamma)
        return math.log(d) + 0.5 * math.log(s) - s / (2 * d) - math.log(budget)

    if g(lo) <= 0:
        return lo
    hi = 2 * lo
    while g(hi) > 0:
        hi *= 2
    return brentq(g, lo, hi, xtol=1e-12)


def choose_degree(eps: float, setting: str, d_target: int) -> int:
    """``ceil(1/gamma)`` for the noise rate gamma above."""
    s = log_inverse_noise_rate(eps, setting, d_target)
    try:
        return int(math.ceil(math.exp(s)))
    except OverflowError:
        raise ValueError(f"degree exp({s:.1f}) is beyond any usable size") from None
