"""Marginal sampling oracle and scalar-sample accounting."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import DegreeStats
from .model import GaussianModel

TRACE_COLUMNS = ["stage", "ell", "subset_size", "n_select", "n_verify", "scalar_total"]


def stage_rng(root_seed: int, *key: int) -> np.random.Generator:
    """Independent stream for ``(root_seed, *key)``.

    The key is folded into the seed sequence entropy, so streams depend only
    on the tuple and not on the order in which they are requested.
    """
    return np.random.default_rng([int(root_seed), *map(int, key)])


@dataclass(frozen=True, eq=False)
class SampleBatch:
    support: tuple
    data: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def column(self, v: int) -> int:
        return self.support.index(v)


def draw(model: GaussianModel, S, n: int, rng: np.random.Generator) -> SampleBatch:
    """``n`` i.i.d. draws of X_S ~ N(0, Sigma[S, S]) via the Cholesky factor
    of the submatrix. Columns follow the sorted support."""
    support = tuple(sorted(set(int(v) for v in S)))
    if not support:
        raise ValueError("cannot sample an empty vertex subset")
    if n < 0:
        raise ValueError(f"sample count must be nonnegative, got {n}")
    block = model.Sigma[np.ix_(support, support)]
    try:
        L = np.linalg.cholesky(block)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"covariance block on {support} is not positive definite") from exc
    z = rng.standard_normal((n, len(support)))
    return SampleBatch(support, z @ L.T)


class MarginalSampler:
    """Sampling interface the engine talks to; wraps one model."""

    def __init__(self, model: GaussianModel):
        self.model = model

    @property
    def p(self) -> int:
        return self.model.p

    def draw(self, S, n: int, rng: np.random.Generator) -> SampleBatch:
        return draw(self.model, S, n, rng)


@dataclass
class SamplingLedger:
    budget: int | None = None
    stages: list = field(default_factory=list)
    scalar_total: int = 0

    def record(self, S, n: int) -> "SamplingLedger":
        S = tuple(sorted(S))
        self.stages.append((S, int(n)))
        self.scalar_total += len(S) * int(n)
        assert self.scalar_total == self.recomputed_total(), "ledger audit failed"
        return self

    def recomputed_total(self) -> int:
        return sum(len(S) * n for S, n in self.stages)

    def would_exceed(self, cost: int) -> bool:
        return self.budget is not None and self.scalar_total + cost > self.budget


def record(ledger: SamplingLedger, S, n: int) -> SamplingLedger:
    return ledger.record(S, n)


def sufficient_budget(stats: DegreeStats, g: Callable[[int], int], h: Callable[[int], int]) -> int:
    """Sum over vertices of sum_{k=0}^{ceil(log2 d_i^max)} g(2^k) + h(2^k).

    Vertices with local maximum degree 0 or 1 contribute only the k = 0 term.
    """
    total = 0
    for d in stats.local_max:
        top = math.ceil(math.log2(d)) if d > 1 else 0
        total += sum(g(2**k) + h(2**k) for k in range(top + 1))
    return total


def trace_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in rows:
        w.writerow([getattr(r, c) for c in TRACE_COLUMNS])
    return buf.getvalue()


def trace_from_csv(text: str) -> list[dict]:
    reader = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [{k: int(v) for k, v in row.items()} for row in reader]
