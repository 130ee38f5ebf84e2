"""Active neighborhood selection by doubling stages over the unsettled
vertices, and its two Gaussian instantiations (exhaustive partial
correlation search, and lasso selection with partial correlation
verification), plus the passive lasso neighborhood regression baseline."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .estimators import EmpiricalCov, empirical_cov, lasso_gram, partial_corr_row, top_k_support
from .graph import Graph
from .sampler import SampleBatch, SamplingLedger, stage_rng

Candidate = Optional[frozenset]

DEFAULT_ENUM_CAP = 10**7


class EnumerationCapError(RuntimeError):
    pass


class StageSamples:
    """One stage's batch with its empirical covariance computed on demand."""

    def __init__(self, batch: SampleBatch):
        self.batch = batch

    @property
    def support(self) -> tuple:
        return self.batch.support

    @property
    def n(self) -> int:
        return self.batch.n

    @cached_property
    def cov(self) -> EmpiricalCov:
        return empirical_cov(self.batch)


@dataclass
class SubroutinePair:
    select: Callable[[int, int, StageSamples], Candidate]
    verify: Callable[[int, Candidate, StageSamples], bool]
    g: Callable[[int], int]
    h: Callable[[int], int]
    name: str = "custom"


@dataclass
class StageRecord:
    stage: int
    ell: int
    subset_size: int
    n_select: int
    n_verify: int
    scalar_total: int
    found: tuple = ()
    settled: tuple = ()


@dataclass
class RecoveredGraph:
    graph: Graph
    nbhds: list
    trace: list
    status: str
    ledger: SamplingLedger
    found_at: dict = field(default_factory=dict)
    settled_at: dict = field(default_factory=dict)

    @property
    def scalar_total(self) -> int:
        return self.ledger.scalar_total

    @property
    def budget_exceeded(self) -> bool:
        return self.status == "budget_exceeded"


def run_meta(sampler, subs: SubroutinePair, budget: int | None = None, seed: int = 0) -> RecoveredGraph:
    """Run the doubling loop until ell >= 2p, every neighborhood is found, or
    the next stage would push the scalar count past ``budget``.

    Each stage draws ``g(ell)`` selection and ``h(ell)`` verification samples
    of the unsettled vertices, proposes and verifies a neighborhood for every
    vertex not yet found, then settles found vertices whose estimated
    neighbors are all found. Samples are discarded at the end of the stage.
    The returned graph combines neighborhoods by the OR rule.
    """
    p = sampler.p
    ledger = SamplingLedger(budget=budget)
    nbhds = [frozenset() for _ in range(p)]
    found: set = set()
    settled: set = set()
    found_at: dict = {}
    settled_at: dict = {}
    trace: list = []
    status = "complete"
    if p <= 1:
        return RecoveredGraph(Graph(p), nbhds, trace, status, ledger, {0: 1} if p else {}, {})

    ell, stage = 1, 0
    while True:
        unsettled = [v for v in range(p) if v not in settled]
        n_sel, n_ver = int(subs.g(ell)), int(subs.h(ell))
        if ledger.would_exceed(len(unsettled) * (n_sel + n_ver)):
            status = "budget_exceeded"
            break
        sel = StageSamples(sampler.draw(unsettled, n_sel, stage_rng(seed, stage, 0)))
        ver = StageSamples(sampler.draw(unsettled, n_ver, stage_rng(seed, stage, 1)))
        ledger.record(unsettled, n_sel)
        ledger.record(unsettled, n_ver)

        newly_found = []
        for i in unsettled:
            if i in found:
                continue
            cand = subs.select(i, ell, sel)
            if cand is not None:
                cand = frozenset(cand)
                if i in cand or cand & settled:
                    raise RuntimeError(f"selection for vertex {i} returned settled or self vertices")
            nbhds[i] = cand if cand is not None else frozenset()
            if subs.verify(i, cand, ver):
                newly_found.append(i)
        found.update(newly_found)
        for i in newly_found:
            found_at[i] = ell
        newly_settled = [i for i in sorted(found - settled) if nbhds[i] <= found]
        settled.update(newly_settled)
        for i in newly_settled:
            settled_at[i] = ell
        trace.append(
            StageRecord(stage, ell, len(unsettled), n_sel, n_ver, ledger.scalar_total,
                        tuple(newly_found), tuple(newly_settled))
        )
        ell *= 2
        stage += 1
        if len(found) == p:
            break
        if ell >= 2 * p:
            status = "ell_limit"
            break
    if status == "complete" and len(found) < p:
        status = "ell_limit"
    graph = Graph.from_neighborhoods(p, nbhds)
    return RecoveredGraph(graph, nbhds, trace, status, ledger, found_at, settled_at)


# --- sample complexity functions -----------------------------------------------


def log_scaled(c: float, p: int) -> Callable[[int], int]:
    """ell -> ceil(c * ell * ln p)."""
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    logp = math.log(p)
    return lambda ell: math.ceil(c * ell * logp)


def _zero(ell: int) -> int:
    return 0


def default_lambda_rule(lambda0: float):
    """lambda = lambda0 * sqrt(ln p / n)."""
    def rule(ell: int, n: int, p: int) -> float:
        return lambda0 * math.sqrt(math.log(p) / n)
    return rule


# --- exhaustive partial correlation search -----------------------------------


def adpact_select(i: int, ell: int, samples: StageSamples, xi: float,
                  enum_cap: int = DEFAULT_ENUM_CAP, zero_case: bool = True) -> Candidate:
    """Search subsets S of the other unsampled-so-far vertices with
    ``ell/2 < |S| <= ell`` in increasing size; on the first size where some S
    has ``max_j |rho_hat_{i,j|S}| <= xi``, return the S minimizing that max.

    With ``zero_case`` and ``ell == 1`` the empty set is tried first, so an
    isolated vertex can return a real (empty) neighborhood. ``None`` means no
    candidate was found.
    """
    others = [v for v in samples.support if v != i]
    sizes = list(range(ell // 2 + 1, ell + 1))
    if ell == 1 and zero_case:
        sizes = [0] + sizes
    cov = samples.cov
    for k in sizes:
        if k > len(others):
            break
        count = math.comb(len(others), k)
        if count > enum_cap:
            raise EnumerationCapError(
                f"vertex {i}: {count} subsets of size {k} exceed the cap of {enum_cap}"
            )
        best, best_stat = None, math.inf
        for S in itertools.combinations(others, k):
            rest = [v for v in others if v not in S]
            rho = partial_corr_row(cov, i, S, rest)
            stat = max((abs(r) for r in rho.values()), default=0.0)
            if stat <= xi and stat < best_stat:
                best, best_stat = S, stat
        if best is not None:
            return frozenset(best)
    return None


def adpact_pair(c: float, xi: float, p: int, enum_cap: int = DEFAULT_ENUM_CAP,
                zero_case: bool = True) -> SubroutinePair:
    return SubroutinePair(
        select=lambda i, ell, s: adpact_select(i, ell, s, xi, enum_cap, zero_case),
        verify=lambda i, cand, s: cand is not None,
        g=log_scaled(c, p),
        h=_zero,
        name="adpact",
    )


# --- lasso selection with partial correlation verification -------------------


def ampl_select(i: int, ell: int, samples: StageSamples, lambda_rule, p: int,
                tol: float = 1e-7, max_iter: int = 100_000) -> frozenset:
    """Lasso of X_i on the other sampled vertices, truncated to the ``ell``
    largest coefficients in magnitude."""
    others = [v for v in samples.support if v != i]
    if not others:
        return frozenset()
    cov = samples.cov
    o = cov.idx(others)
    ii = cov.idx([i])[0]
    lam = lambda_rule(ell, samples.n, p)
    sol = lasso_gram(cov.S_hat[np.ix_(o, o)], cov.S_hat[o, ii], lam, tol=tol, max_iter=max_iter)
    return frozenset(others[k] for k in top_k_support(sol.beta_hat, ell))


def ampl_verify(i: int, cand: Candidate, samples: StageSamples, xi: float) -> bool:
    """True iff |rho_hat_{i,j|cand}| <= xi for every sampled j outside cand and i."""
    if cand is None:
        return False
    rest = [v for v in samples.support if v != i and v not in cand]
    if not rest:
        return True
    rho = partial_corr_row(samples.cov, i, sorted(cand), rest)
    return all(abs(r) <= xi for r in rho.values())


def ampl_pair(c: float, xi: float, p: int, lambda_rule=None, lambda0: float = 1.0) -> SubroutinePair:
    rule = lambda_rule or default_lambda_rule(lambda0)
    g = log_scaled(c, p)
    return SubroutinePair(
        select=lambda i, ell, s: ampl_select(i, ell, s, rule, p),
        verify=lambda i, cand, s: ampl_verify(i, cand, s, xi),
        g=g,
        h=g,
        name="ampl",
    )


# --- oracle subroutines (mechanics testing) -------------------------------------


def oracle_pair(graph: Graph, g=None, h=None) -> SubroutinePair:
    """Subroutines that read the true graph: selection returns N(i) once
    ``d_i <= ell`` and ``None`` before; verification returns whether the true
    neighborhood is contained in the candidate."""
    return SubroutinePair(
        select=lambda i, ell, s: graph.neighbors(i) if graph.degree(i) <= ell else None,
        verify=lambda i, cand, s: cand is not None and graph.neighbors(i) <= cand,
        g=g or (lambda ell: ell),
        h=h or (lambda ell: ell),
        name="oracle",
    )


# --- passive baseline ------------------------------------------------------------


def mb_passive(sampler, n: int, lam: float | None = None, lambda0: float = 1.0,
               seed: int = 0) -> RecoveredGraph:
    """Single-stage neighborhood regression: ``n`` full-dimensional samples,
    one lasso per vertex against all others, OR-rule combination.

    ``lam`` defaults to ``lambda0 * sqrt(ln p / n)``.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    p = sampler.p
    ledger = SamplingLedger()
    verts = list(range(p))
    if lam is None:
        lam = default_lambda_rule(lambda0)(1, n, p) if p > 1 else 0.0
    batch = StageSamples(sampler.draw(verts, n, stage_rng(seed, 0, 0)))
    ledger.record(verts, n)
    nbhds = []
    C = batch.cov.S_hat
    for i in verts:
        others = [v for v in verts if v != i]
        if not others:
            nbhds.append(frozenset())
            continue
        sol = lasso_gram(C[np.ix_(others, others)], C[others, i], lam)
        nbhds.append(frozenset(others[k] for k in np.flatnonzero(sol.beta_hat)))
    trace = [StageRecord(0, 1, p, n, 0, ledger.scalar_total, tuple(verts), tuple(verts))]
    return RecoveredGraph(Graph.from_neighborhoods(p, nbhds), nbhds, trace, "complete", ledger)
