"""Gaussian models faithful to a graph, population partial correlations, and
small-scale diagnostics for the recovery assumptions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, degree_stats, format_edge_list, parse_edge_list

EIG_FLOOR = 0.05


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GaussianModel:
    graph: Graph
    K: np.ndarray
    Sigma: np.ndarray
    chol: np.ndarray

    @property
    def p(self) -> int:
        return self.graph.p

    @classmethod
    def from_precision(cls, K, graph: Graph | None = None, tol: float = 0.0) -> "GaussianModel":
        K = np.array(K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"precision must be square, got shape {K.shape}")
        if not np.allclose(K, K.T, atol=1e-12):
            raise ValueError("precision matrix is not symmetric")
        p = K.shape[0]
        try:
            np.linalg.cholesky(K)
        except np.linalg.LinAlgError as exc:
            lam = np.linalg.eigvalsh(K).min()
            raise NotPositiveDefiniteError(
                f"precision matrix is not positive definite (min eigenvalue {lam:.3g})"
            ) from exc
        support = Graph.from_edges(
            p, [(i, j) for i in range(p) for j in range(i + 1, p) if abs(K[i, j]) > tol]
        )
        if graph is None:
            graph = support
        elif graph != support:
            raise ValueError("off-diagonal support of K does not match the graph")
        Sigma = np.linalg.inv(K)
        Sigma = (Sigma + Sigma.T) / 2
        return cls(graph, K, Sigma, np.linalg.cholesky(Sigma))


def default_edge_weight(g: Graph) -> float:
    return 0.3 / math.sqrt(max(degree_stats(g).d_max, 1))


def precision_from_graph(g: Graph, edge_weight: float | None = None, diag_boost: float = 0.0) -> GaussianModel:
    """Build ``K = (1 + diag_boost) I + w A`` for the adjacency matrix ``A``.

    If the smallest eigenvalue of ``I + w A`` falls to ``EIG_FLOOR`` or below,
    the off-diagonal weight is shrunk to ``w * 0.95 * (1 - EIG_FLOOR) / |lam_min - 1|``,
    which puts the smallest eigenvalue at ``1 - 0.95 * 0.95``.
    """
    w = default_edge_weight(g) if edge_weight is None else float(edge_weight)
    if w == 0:
        raise ValueError("edge_weight must be nonzero")
    if diag_boost < 0:
        raise ValueError(f"diag_boost must be nonnegative, got {diag_boost}")
    A = g.adjacency()
    K = np.eye(g.p) + w * A
    if g.p:
        lam = np.linalg.eigvalsh(K).min()
        if lam <= EIG_FLOOR:
            w = w * 0.95 * (1 - EIG_FLOOR) / abs(lam - 1)
            K = np.eye(g.p) + w * A
    K += diag_boost * np.eye(g.p)
    return GaussianModel.from_precision(K, graph=g)


def _partial_from_block(block: np.ndarray) -> float:
    try:
        theta = np.linalg.inv(block)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular covariance submatrix") from exc
    denom = theta[0, 0] * theta[1, 1]
    if not denom > 0:
        raise np.linalg.LinAlgError("singular covariance submatrix")
    return float(-theta[0, 1] / math.sqrt(denom))


def population_partial_correlation(Sigma, i: int, j: int, S=()) -> float:
    """rho_{i,j|S} from the inverse of the ({i,j} u S) block of ``Sigma``."""
    S = list(S)
    if i == j:
        raise ValueError("i and j must differ")
    if i in S or j in S:
        raise ValueError("conditioning set must exclude i and j")
    idx = [i, j] + S
    return _partial_from_block(np.asarray(Sigma)[np.ix_(idx, idx)])


def schur_marginal_precision(K, F) -> np.ndarray:
    """Precision of the marginal on ``F``: K_FF - K_FC K_CC^{-1} K_CF."""
    K = np.asarray(K)
    F = list(F)
    C = [k for k in range(K.shape[0]) if k not in set(F)]
    out = K[np.ix_(F, F)]
    if C:
        out = out - K[np.ix_(F, C)] @ np.linalg.solve(K[np.ix_(C, C)], K[np.ix_(C, F)])
    return out


def regression_coefficients(Sigma, i: int, F) -> tuple[list, np.ndarray]:
    """Population coefficients of X_i regressed on X_{F \\ {i}}.

    Returns the regressor indices and ``Sigma_iG Sigma_GG^{-1}``.
    """
    G = [k for k in F if k != i]
    Sigma = np.asarray(Sigma)
    beta = np.linalg.solve(Sigma[np.ix_(G, G)], Sigma[G, i])
    return G, beta


@dataclass
class AssumptionReport:
    m_hat: float | None
    M_hat: float
    Cmin_hat: float | None
    Cmax_hat: float | None
    gamma_hat: float | None
    search_depth: int
    triples: int

    @property
    def xi(self) -> float | None:
        """Half the smallest dependent partial correlation, the usual threshold."""
        return None if self.m_hat is None else self.m_hat / 2


def assumption_scan(model: GaussianModel, max_cond_size: int, cap: int = 1_000_000) -> AssumptionReport:
    """Brute-force extremes of population partial correlations over all
    ``(i, j, S)`` with ``|S| <= max_cond_size``, plus eigenvalue and
    incoherence diagnostics per vertex. Exponential; meant for small p."""
    p = model.p
    if max_cond_size < 0 or (p >= 2 and max_cond_size > p - 2):
        raise ValueError(f"max_cond_size must be in [0, p-2], got {max_cond_size}")
    pairs = p * (p - 1) // 2
    total = pairs * sum(math.comb(p - 2, k) for k in range(max_cond_size + 1)) if p >= 2 else 0
    if total > cap:
        raise ValueError(f"scan would enumerate {total} triples, above the cap of {cap}")
    g = model.graph
    Sigma = model.Sigma
    m_hat = None
    M_hat = 0.0
    for i, j in itertools.combinations(range(p), 2):
        rest = [k for k in range(p) if k not in (i, j)]
        for size in range(max_cond_size + 1):
            for S in itertools.combinations(rest, size):
                r = abs(population_partial_correlation(Sigma, i, j, S))
                M_hat = max(M_hat, r)
                if not g.separated(i, j, S):
                    m_hat = r if m_hat is None else min(m_hat, r)

    cmin = cmax = None
    worst = None
    for i in range(p):
        nb = sorted(g.neighbors(i))
        if not nb:
            continue
        block = Sigma[np.ix_(nb, nb)]
        eig = np.linalg.eigvalsh(block)
        cmin = eig[0] if cmin is None else min(cmin, eig[0])
        cmax = eig[-1] if cmax is None else max(cmax, eig[-1])
        out = [k for k in range(p) if k != i and k not in g.neighbors(i)]
        if out:
            inc = np.abs(Sigma[np.ix_(out, nb)] @ np.linalg.inv(block)).sum(axis=1).max()
            worst = inc if worst is None else max(worst, inc)
    gamma = None if worst is None else 1.0 - worst
    return AssumptionReport(
        m_hat=m_hat,
        M_hat=M_hat,
        Cmin_hat=None if cmin is None else float(cmin),
        Cmax_hat=None if cmax is None else float(cmax),
        gamma_hat=None if gamma is None else float(gamma),
        search_depth=max_cond_size,
        triples=total,
    )


def edge_partial_floor(model: GaussianModel) -> float | None:
    """Smallest |rho_{i,j|rest}| = |K_ij| / sqrt(K_ii K_jj) over edges."""
    K = model.K
    vals = [abs(K[i, j]) / math.sqrt(K[i, i] * K[j, j]) for i, j in model.graph.edges]
    return min(vals) if vals else None


# --- dense text format --------------------------------------------------------


def format_matrix(M) -> str:
    return "\n".join(" ".join(repr(float(x)) for x in row) for row in np.asarray(M)) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    M = np.array([[float(x) for x in r] for r in rows])
    if M.size and M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix is not square: {M.shape}")
    return M


def write_model(model: GaussianModel, prefix) -> tuple[Path, Path]:
    prefix = str(prefix)
    kpath, epath = Path(prefix + "_precision.txt"), Path(prefix + "_edges.txt")
    kpath.write_text(format_matrix(model.K))
    epath.write_text(format_edge_list(model.graph))
    return kpath, epath


def read_model(precision_path, edges_path=None) -> GaussianModel:
    K = parse_matrix(Path(precision_path).read_text())
    graph = parse_edge_list(Path(edges_path).read_text()) if edges_path else None
    return GaussianModel.from_precision(K, graph=graph)
