"""Seeded trial batteries, effective-sample-complexity summaries, Hamming
curves, and a concentration probe for empirical partial correlations."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .engine import EnumerationCapError, adpact_pair, ampl_pair, mb_passive, run_meta
from .estimators import InsufficientSamplesError, LassoConvergenceError
from .graph import (
    Graph,
    gen_multi_clique_chain,
    gen_power_law,
    gen_single_clique_chain,
    hamming_distance,
)
from .model import GaussianModel, edge_partial_floor, population_partial_correlation, precision_from_graph
from .sampler import MarginalSampler

log = logging.getLogger(__name__)

FAMILIES = ("single-clique", "multi-clique", "power-law")
ALGOS = ("adpact", "ampl", "mb")
REPORT_COLUMNS = [
    "algo", "graph", "seed", "c", "hamming", "exact", "scalar_total",
    "effective_samples", "edges_correct_fraction", "status",
]
ESC_COLUMNS = ["algo", "graph", "target", "mean_esc", "trials", "censored"]
CURVE_COLUMNS = ["algo", "c", "effective_samples", "mean_hamming"]


def geometric_grid(start: float, stop: float, ratio: float = 1.3) -> list[int]:
    """Increasing integer grid from ``start`` to at most ``stop``; consecutive
    values differ by a factor of about ``ratio`` (duplicates dropped)."""
    if start <= 0 or ratio <= 1:
        raise ValueError("need start > 0 and ratio > 1")
    out: list[int] = []
    x = float(start)
    while x <= stop * (1 + 1e-12):
        v = int(round(x))
        if not out or v > out[-1]:
            out.append(v)
        x *= ratio
    return out


@dataclass
class BenchConfig:
    family: str = "single-clique"
    p: int = 60
    clique: int = 12
    cliques: list = field(default_factory=lambda: [5, 8, 10, 11])
    seed_size: int = 5
    edges_per_step: int = 1
    graph_seed: int = 0
    edge_weight: float | None = None
    algos: list = field(default_factory=lambda: ["ampl", "mb"])
    c_grid: list = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    n_grid: list | None = None
    n_min: int = 20
    n_max: int = 20000
    n_ratio: float = 1.3
    xi: float | None = None
    lambda0: float = 1.0
    budget: int | None = None
    trials: int = 10
    seed: int = 0
    pair_mb: bool = False
    enum_cap: int = 10**7

    def mb_grid(self) -> list[int]:
        if self.n_grid is not None:
            return [int(n) for n in self.n_grid]
        return geometric_grid(self.n_min, self.n_max, self.n_ratio)

    def as_header(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _opt(conv):
    return lambda s: None if s.lower() == "none" else conv(s)


def _list(conv):
    return lambda s: [conv(x.strip()) for x in s.split(",") if x.strip()]


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _bool(s: str) -> bool:
    low = s.lower()
    if low not in ("true", "false", "1", "0", "yes", "no"):
        raise ValueError(f"expected a boolean, got {s!r}")
    return low in ("true", "1", "yes")


_CONVERTERS = {
    "family": str,
    "p": _int,
    "clique": _int,
    "cliques": _list(_int),
    "seed_size": _int,
    "edges_per_step": _int,
    "graph_seed": _int,
    "edge_weight": _opt(float),
    "algos": _list(str),
    "c_grid": _list(float),
    "n_grid": _opt(_list(_int)),
    "n_min": _int,
    "n_max": _int,
    "n_ratio": float,
    "xi": _opt(float),
    "lambda0": float,
    "budget": _opt(_int),
    "trials": _int,
    "seed": _int,
    "pair_mb": _bool,
    "enum_cap": _int,
}


def parse_config(text: str) -> BenchConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment; lists are
    comma-separated; ``none`` clears an optional value."""
    cfg = BenchConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        setattr(cfg, key, _CONVERTERS[key](val))
    if cfg.family not in FAMILIES:
        raise ValueError(f"unknown graph family {cfg.family!r}")
    bad = [a for a in cfg.algos if a not in ALGOS]
    if bad:
        raise ValueError(f"unknown algorithms {bad}")
    return cfg


def load_config(path) -> BenchConfig:
    return parse_config(Path(path).read_text())


def build_graph(cfg: BenchConfig) -> Graph:
    if cfg.family == "single-clique":
        return gen_single_clique_chain(cfg.p, cfg.clique)
    if cfg.family == "multi-clique":
        return gen_multi_clique_chain(cfg.p, cfg.cliques)
    return gen_power_law(cfg.p, cfg.seed_size, cfg.edges_per_step, cfg.graph_seed)


def default_xi(model: GaussianModel) -> float:
    """Half the smallest |K_ij| / sqrt(K_ii K_jj) over edges (0.05 if edgeless)."""
    floor = edge_partial_floor(model)
    return 0.05 if floor is None else floor / 2


def trial_seed(root: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(root), int(trial)]).generate_state(1)[0])


# --- reports -----------------------------------------------------------------------


@dataclass
class TrialReport:
    """One run. ``c`` is the algorithm's scaling knob: the sample constant
    for active algorithms, the per-vertex sample size for ``mb``."""

    algo: str
    graph: str
    seed: int
    c: float
    hamming: int
    exact: bool
    scalar_total: int
    effective_samples: float
    edges_correct_fraction: float
    status: str = "ok"


def make_report(algo, graph_id, seed, knob, truth: Graph, est: Graph | None, scalar_total, status) -> TrialReport:
    if est is None:
        est = Graph(truth.p)
    ham = hamming_distance(truth, est)
    missed = len(truth.edges - est.edges)
    frac = 1.0 - missed / len(truth.edges) if truth.edges else 1.0
    return TrialReport(algo, graph_id, int(seed), knob, ham, ham == 0, int(scalar_total),
                       scalar_total / truth.p, frac, status)


def run_trial(algo: str, model: GaussianModel, knob, seed: int, *, xi: float, lambda0: float,
              budget: int | None = None, enum_cap: int = 10**7, graph_id: str = "graph") -> TrialReport:
    sampler = MarginalSampler(model)
    p = model.p
    truth = model.graph
    try:
        if algo == "mb":
            res = mb_passive(sampler, int(knob), lambda0=lambda0, seed=seed)
        elif algo == "ampl":
            res = run_meta(sampler, ampl_pair(knob, xi, p, lambda0=lambda0), budget=budget, seed=seed)
        elif algo == "adpact":
            res = run_meta(sampler, adpact_pair(knob, xi, p, enum_cap=enum_cap), budget=budget, seed=seed)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
    except EnumerationCapError:
        return make_report(algo, graph_id, seed, knob, truth, None, 0, "enumeration_cap")
    except (InsufficientSamplesError, LassoConvergenceError) as exc:
        log.warning("trial %s seed=%s knob=%s failed: %s", algo, seed, knob, exc)
        return make_report(algo, graph_id, seed, knob, truth, None, 0, "error")
    status = "ok" if res.status == "complete" else res.status
    return make_report(algo, graph_id, seed, knob, truth, res.graph, res.scalar_total, status)


def run_battery(cfg: BenchConfig, model: GaussianModel | None = None) -> list[TrialReport]:
    """Every (algorithm, trial, knob) combination in a fixed order.

    Trial ``t`` uses the same sampling seed for every knob value, so grid
    scans are paired within a trial.
    """
    if model is None:
        model = precision_from_graph(build_graph(cfg), edge_weight=cfg.edge_weight)
    xi = cfg.xi if cfg.xi is not None else default_xi(model)
    reports: list[TrialReport] = []
    for algo in cfg.algos:
        grid = cfg.mb_grid() if algo == "mb" else [float(c) for c in cfg.c_grid]
        for t in range(cfg.trials):
            seed = trial_seed(cfg.seed, t)
            for knob in grid:
                rep = run_trial(algo, model, knob, seed, xi=xi, lambda0=cfg.lambda0,
                                budget=cfg.budget, enum_cap=cfg.enum_cap, graph_id=cfg.family)
                reports.append(rep)
                if algo == "ampl" and cfg.pair_mb:
                    n = max(2, int(round(rep.effective_samples)))
                    paired = run_trial("mb", model, n, seed, xi=xi, lambda0=cfg.lambda0,
                                       graph_id=cfg.family)
                    paired.algo, paired.c = "mb-paired", knob
                    reports.append(paired)
    return reports


# --- summaries -------------------------------------------------------------------------


@dataclass
class ESCSummary:
    algo: str
    graph: str
    target: float
    mean_esc: float | None
    trials: int
    censored: int


def _attains(rep: TrialReport, target: float) -> bool:
    if target >= 1.0:
        return rep.exact
    return rep.edges_correct_fraction >= target


def esc_summary(reports, target: float) -> list[ESCSummary]:
    """Per (algo, graph): mean over trials of the smallest effective sample
    count at which a run reached ``target`` (fraction of true edges found,
    or exact recovery for 1.0). Trials that never reach it are censored."""
    groups: dict = {}
    for r in reports:
        groups.setdefault((r.algo, r.graph), {}).setdefault(r.seed, []).append(r)
    out = []
    for (algo, graph), by_seed in groups.items():
        firsts = []
        censored = 0
        for runs in by_seed.values():
            hits = [r.effective_samples for r in runs if _attains(r, target)]
            if hits:
                firsts.append(min(hits))
            else:
                censored += 1
        mean = float(np.mean(firsts)) if firsts else None
        out.append(ESCSummary(algo, graph, target, mean, len(by_seed), censored))
    return out


def hamming_curve(reports) -> list[tuple]:
    """Rows ``(algo, c, mean effective samples, mean hamming)`` per
    (algo, knob), sorted by effective samples."""
    groups: dict = {}
    for r in reports:
        groups.setdefault((r.algo, r.c), []).append(r)
    rows = [
        (algo, c, float(np.mean([r.effective_samples for r in rs])), float(np.mean([r.hamming for r in rs])))
        for (algo, c), rs in groups.items()
    ]
    return sorted(rows, key=lambda row: (row[2], row[0], row[1]))


# --- CSV ---------------------------------------------------------------------------------


def _header_lines(header: dict | None) -> str:
    if not header:
        return ""
    return "".join(f"# {k}={v}\n" for k, v in header.items())


def _csv(columns, rows, header=None) -> str:
    buf = io.StringIO()
    buf.write(_header_lines(header))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def reports_to_csv(reports, header: dict | None = None) -> str:
    return _csv(REPORT_COLUMNS, [[getattr(r, c) for c in REPORT_COLUMNS] for r in reports], header)


def reports_from_csv(text: str) -> list[TrialReport]:
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    out = []
    for row in rows:
        out.append(TrialReport(
            algo=row["algo"],
            graph=row["graph"],
            seed=int(row["seed"]),
            c=float(row["c"]),
            hamming=int(row["hamming"]),
            exact=row["exact"] == "True",
            scalar_total=int(row["scalar_total"]),
            effective_samples=float(row["effective_samples"]),
            edges_correct_fraction=float(row["edges_correct_fraction"]),
            status=row["status"],
        ))
    return out


def esc_to_csv(summaries, header: dict | None = None) -> str:
    return _csv(ESC_COLUMNS, [[getattr(s, c) for c in ESC_COLUMNS] for s in summaries], header)


def curve_to_csv(rows, header: dict | None = None) -> str:
    return _csv(CURVE_COLUMNS, rows, header)


def write_outputs(cfg: BenchConfig, reports, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = cfg.as_header()
    summaries = esc_summary(reports, 0.9) + esc_summary(reports, 1.0)
    paths = {
        "reports": out / "trial_reports.csv",
        "esc": out / "esc_summary.csv",
        "curve": out / "hamming_curve.csv",
    }
    paths["reports"].write_text(reports_to_csv(reports, header))
    paths["esc"].write_text(esc_to_csv(summaries, header))
    paths["curve"].write_text(curve_to_csv(hamming_curve(reports), header))
    return paths


# --- concentration probe -----------------------------------------------------------------


def decay_probe(model: GaussianModel, i: int, j: int, S, eps: float, n_grid,
                       replicates: int = 2000, seed: int = 0) -> list[tuple[int, float]]:
    """Empirical frequency of ``|rho_hat_{i,j|S} - rho_{i,j|S}| >= eps`` over
    ``replicates`` independent samples, for each sample size in ``n_grid``."""
    S = list(S)
    if replicates < 500:
        raise ValueError(f"need at least 500 replicates, got {replicates}")
    if any(n < len(S) + 3 for n in n_grid):
        raise ValueError(f"every n must be at least |S| + 3 = {len(S) + 3}")
    rho = population_partial_correlation(model.Sigma, i, j, S)
    idx = [i, j] + S
    L = np.linalg.cholesky(model.Sigma[np.ix_(idx, idx)])
    rng = np.random.default_rng(seed)
    table = []
    for n in n_grid:
        x = rng.standard_normal((replicates, n, len(idx))) @ L.T
        cov = np.einsum("rna,rnb->rab", x, x) / n
        theta = np.linalg.inv(cov)
        est = np.clip(-theta[:, 0, 1] / np.sqrt(theta[:, 0, 0] * theta[:, 1, 1]), -1, 1)
        table.append((int(n), float(np.mean(np.abs(est - rho) >= eps))))
    return table
