"""Empirical covariance, empirical partial correlations, and an L1-penalized
least-squares solver by cyclic coordinate descent."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampler import SampleBatch

DEGENERATE = 1 - 1e-12


class InsufficientSamplesError(ValueError):
    """Covariance submatrix is singular or the sample count is too small."""


class DegenerateCorrelationError(ValueError):
    pass


class LassoConvergenceError(RuntimeError):
    def __init__(self, residual: float, n_iter: int):
        super().__init__(f"lasso did not converge in {n_iter} sweeps (KKT residual {residual:.3g})")
        self.residual = residual
        self.n_iter = n_iter


@dataclass(frozen=True, eq=False)
class EmpiricalCov:
    """Uncentered second-moment matrix ``X^T X / n`` of a zero-mean sample.

    Data must not be shifted; no mean is removed.
    """

    support: tuple
    n: int
    S_hat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_pos", {v: k for k, v in enumerate(self.support)})

    def idx(self, vertices) -> list[int]:
        try:
            return [self._pos[v] for v in vertices]
        except KeyError as exc:
            raise ValueError(f"vertex {exc.args[0]} is not in the covariance support") from None


def empirical_cov(batch: SampleBatch) -> EmpiricalCov:
    X = batch.data
    n = X.shape[0]
    S_hat = X.T @ X / n if n else np.zeros((X.shape[1], X.shape[1]))
    return EmpiricalCov(batch.support, n, (S_hat + S_hat.T) / 2)


def _check_sizes(cov: EmpiricalCov, i, j, S):
    if i == j or i in S or j in S:
        raise ValueError("need i != j and both outside the conditioning set")
    if cov.n <= len(S) + 2:
        raise InsufficientSamplesError(f"insufficient samples: n={cov.n} with |S|={len(S)}")


def empirical_partial_corr_inv(cov: EmpiricalCov, i: int, j: int, S=()) -> float:
    """Partial correlation by inverting the ({i,j} u S) block of ``S_hat``."""
    S = list(S)
    _check_sizes(cov, i, j, S)
    idx = cov.idx([i, j] + S)
    block = cov.S_hat[np.ix_(idx, idx)]
    try:
        theta = np.linalg.inv(block)
    except np.linalg.LinAlgError:
        raise InsufficientSamplesError("insufficient samples: singular covariance submatrix") from None
    denom = theta[0, 0] * theta[1, 1]
    if not denom > 0:
        raise InsufficientSamplesError("insufficient samples: singular covariance submatrix")
    return float(np.clip(-theta[0, 1] / math.sqrt(denom), -1.0, 1.0))


def empirical_partial_corr_rec(cov: EmpiricalCov, i: int, j: int, S=()) -> float:
    """Partial correlation by the recursion that peels one conditioning
    variable at a time off plain correlations (memoized over subsets)."""
    S = tuple(S)
    _check_sizes(cov, i, j, S)
    pos = dict(zip(S + (i, j), cov.idx(S + (i, j))))
    C = cov.S_hat
    memo: dict = {}

    def rho(a, b, cond):
        key = (min(a, b), max(a, b), cond)
        if key in memo:
            return memo[key]
        if not cond:
            pa, pb = pos[a], pos[b]
            d = C[pa, pa] * C[pb, pb]
            if not d > 0:
                raise InsufficientSamplesError("insufficient samples: zero variance")
            val = float(np.clip(C[pa, pb] / math.sqrt(d), -1.0, 1.0))
        else:
            k, rest = cond[-1], cond[:-1]
            r_ab, r_ak, r_bk = rho(a, b, rest), rho(a, k, rest), rho(b, k, rest)
            if abs(r_ak) >= DEGENERATE or abs(r_bk) >= DEGENERATE:
                raise DegenerateCorrelationError("degenerate correlation in recursion")
            val = (r_ab - r_ak * r_bk) / math.sqrt((1 - r_ak**2) * (1 - r_bk**2))
            val = float(np.clip(val, -1.0, 1.0))
        memo[key] = val
        return val

    return rho(i, j, tuple(sorted(S)))


def partial_corr_row(cov: EmpiricalCov, i: int, S=(), others=None) -> dict:
    """rho_hat_{i,j|S} for every ``j`` in ``others`` (default: all support
    vertices outside S and i), from the conditional covariance given X_S.

    Algebraically the same estimate as :func:`empirical_partial_corr_inv`.
    """
    S = [v for v in S]
    if others is None:
        excl = set(S) | {i}
        others = [v for v in cov.support if v not in excl]
    others = list(others)
    if not others:
        return {}
    if cov.n <= len(S) + 2:
        raise InsufficientSamplesError(f"insufficient samples: n={cov.n} with |S|={len(S)}")
    C = cov.S_hat
    ii = cov.idx([i])[0]
    R = cov.idx(others)
    if S:
        s = cov.idx(S)
        css = C[np.ix_(s, s)]
        try:
            W = np.linalg.solve(css, C[np.ix_(s, R + [ii])])
        except np.linalg.LinAlgError:
            raise InsufficientSamplesError("insufficient samples: singular covariance submatrix") from None
        Wr, wi = W[:, :-1], W[:, -1]
        c_iR = C[ii, R] - C[ii, s] @ Wr
        c_ii = C[ii, ii] - C[ii, s] @ wi
        c_RR = C[R, R] - np.einsum("kr,kr->r", C[np.ix_(s, R)], Wr)
    else:
        c_iR, c_ii, c_RR = C[ii, R], C[ii, ii], C[R, R]
    denom = c_ii * c_RR
    if not (c_ii > 0 and np.all(denom > 0)):
        raise InsufficientSamplesError("insufficient samples: singular covariance submatrix")
    vals = np.clip(c_iR / np.sqrt(denom), -1.0, 1.0)
    return dict(zip(others, vals.tolist()))


# --- lasso --------------------------------------------------------------------


@dataclass
class LassoSolution:
    beta_hat: np.ndarray
    lam: float
    n_iter: int
    kkt_residual: float


def lasso_objective(y, X, beta, lam) -> float:
    y, X = np.asarray(y, float), np.asarray(X, float)
    r = y - X @ beta
    return float(r @ r / (2 * len(y)) + lam * np.abs(beta).sum())


def kkt_residual(grad: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Largest violation of the stationarity conditions given the
    correlation ``grad = X^T (y - X beta) / n``."""
    if grad.size == 0:
        return 0.0
    active = beta != 0
    res = np.where(active, np.abs(grad - lam * np.sign(beta)), np.maximum(np.abs(grad) - lam, 0.0))
    return float(res.max())


def _soft(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def lasso_gram(G, c, lam: float, tol: float = 1e-7, max_iter: int = 100_000,
               callback=None) -> LassoSolution:
    """Coordinate descent on ``0.5 b^T G b - c^T b + lam |b|_1``.

    ``G = X^T X / n`` and ``c = X^T y / n`` give the usual lasso problem.
    Sweeps alternate between the full coordinate set and the current active
    set; the run stops once a full sweep moves no coordinate by ``tol`` or
    more and the KKT residual is below ``tol``. ``callback(beta)`` is called
    after every sweep.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    G = np.asarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    q = c.shape[0]
    beta = np.zeros(q)
    if q == 0:
        return LassoSolution(beta, lam, 0, 0.0)
    diag = np.diag(G).tolist()
    grad = c.copy()
    b = [0.0] * q
    full = list(range(q))
    n_iter = 0
    coords = full
    while n_iter < max_iter:
        n_iter += 1
        max_delta = 0.0
        for j in coords:
            gjj = diag[j]
            old = b[j]
            new = _soft(grad[j] + gjj * old, lam) / gjj if gjj > 0 else 0.0
            delta = new - old
            if delta != 0.0:
                b[j] = new
                grad -= G[:, j] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        if callback is not None:
            callback(np.array(b))
        if max_delta < tol:
            if coords is full:
                beta = np.array(b)
                grad = c - G @ beta
                res = kkt_residual(grad, beta, lam)
                if res < tol:
                    return LassoSolution(beta, lam, n_iter, res)
            coords = full
        else:
            coords = [j for j in full if b[j] != 0.0] if coords is full else coords
            if not coords:
                coords = full
    beta = np.array(b)
    raise LassoConvergenceError(kkt_residual(c - G @ beta, beta, lam), n_iter)


def lasso_cd(y, X, lam: float, tol: float = 1e-7, max_iter: int = 100_000, callback=None) -> LassoSolution:
    """Minimize ``||y - X b||^2 / (2n) + lam ||b||_1`` by cyclic coordinate descent."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"design shape {X.shape} does not match response length {y.shape[0]}")
    n = X.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    return lasso_gram(X.T @ X / n, X.T @ y / n, lam, tol=tol, max_iter=max_iter, callback=callback)


def top_k_support(beta, k: int) -> list[int]:
    """Indices of the ``k`` largest ``|beta|`` when the support is larger than
    ``k``, otherwise the whole support. Ties go to the lower index."""
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    beta = np.asarray(beta)
    support = [int(j) for j in np.flatnonzero(beta)]
    if len(support) <= k:
        return support
    ranked = sorted(support, key=lambda j: (-abs(beta[j]), j))
    return sorted(ranked[:k])
