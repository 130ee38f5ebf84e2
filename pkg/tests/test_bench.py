import pytest

from activegm.bench import (
    BenchConfig,
    TrialReport,
    curve_to_csv,
    decay_probe,
    default_xi,
    esc_summary,
    esc_to_csv,
    geometric_grid,
    hamming_curve,
    parse_config,
    reports_from_csv,
    reports_to_csv,
    run_battery,
    write_outputs,
)
from activegm.graph import Graph
from activegm.model import precision_from_graph

CHAIN3 = Graph.from_edges(3, [(0, 1), (1, 2)])


def chain3():
    return precision_from_graph(CHAIN3, edge_weight=0.4)


def rep(seed, knob, eff, hamming, frac, algo="ampl"):
    return TrialReport(algo, "g", seed, knob, hamming, hamming == 0, int(eff * 10), eff, frac)


class TestGrid:
    def test_geometric(self):
        assert geometric_grid(20, 50, 1.3) == [20, 26, 34, 44]

    def test_rejects(self):
        with pytest.raises(ValueError):
            geometric_grid(0, 10)
        with pytest.raises(ValueError):
            geometric_grid(1, 10, 1.0)


class TestBattery:
    def test_zero_trials(self):
        assert run_battery(BenchConfig(trials=0), model=chain3()) == []

    def test_deterministic(self):
        cfg = BenchConfig(algos=["ampl", "mb", "adpact"], c_grid=[5, 50], n_grid=[50, 500], trials=2, seed=4)
        assert run_battery(cfg, model=chain3()) == run_battery(cfg, model=chain3())

    def test_mb_error_shrinks_with_n(self):
        cfg = BenchConfig(algos=["mb"], n_grid=[50, 5000], trials=10, lambda0=3.0)
        reports = run_battery(cfg, model=chain3())
        by_seed = {}
        for r in reports:
            by_seed.setdefault(r.seed, {})[int(r.c)] = r.hamming
        assert sum(h[5000] <= h[50] for h in by_seed.values()) >= 9

    def test_pairing_gives_mb_the_same_samples(self):
        cfg = BenchConfig(algos=["ampl"], c_grid=[30], trials=2, pair_mb=True, lambda0=3.0)
        reports = run_battery(cfg, model=chain3())
        assert [r.algo for r in reports] == ["ampl", "mb-paired"] * 2
        for a, b in zip(reports[::2], reports[1::2]):
            assert b.c == a.c
            assert b.scalar_total == round(a.effective_samples) * 3

    def test_failures_are_recorded(self):
        cfg = BenchConfig(algos=["ampl"], c_grid=[5], trials=1, budget=1)
        (r,) = run_battery(cfg, model=chain3())
        assert r.status == "budget_exceeded" and r.scalar_total == 0 and not r.exact

    def test_default_xi(self):
        assert default_xi(chain3()) == pytest.approx(0.2)
        assert default_xi(precision_from_graph(Graph(3), edge_weight=1)) == 0.05


class TestSummaries:
    def test_smallest_attaining_knob_per_trial(self):
        reports = [
            rep(0, 1, 100, 3, 0.5), rep(0, 2, 200, 1, 0.95), rep(0, 4, 400, 0, 1.0),
            rep(1, 1, 110, 0, 1.0), rep(1, 2, 220, 0, 1.0),
        ]
        (s90,) = esc_summary(reports, 0.9)
        (s100,) = esc_summary(reports, 1.0)
        assert s90.mean_esc == pytest.approx((200 + 110) / 2)
        assert s100.mean_esc == pytest.approx((400 + 110) / 2)
        assert s90.mean_esc <= s100.mean_esc
        assert s100.trials == 2 and s100.censored == 0

    def test_all_exact_is_smallest_grid_value(self):
        reports = [rep(s, n, n, 0, 1.0, algo="mb") for s in range(3) for n in (50, 65, 85)]
        (s,) = esc_summary(reports, 1.0)
        assert s.mean_esc == 50

    def test_single_trial_effective_samples(self):
        r = TrialReport("ampl", "single-clique", 0, 8.0, 0, True, 1202 * 60, 1202.0, 1.0)
        assert esc_summary([r], 1.0)[0].mean_esc == 1202

    def test_censored(self):
        reports = [rep(s, 1, 100, 5, 0.5) for s in range(4)]
        (s,) = esc_summary(reports, 0.9)
        assert s.mean_esc is None and s.censored == 4 == s.trials

    def test_curve(self):
        reports = [rep(0, 2, 200, 2, 0.8), rep(1, 2, 220, 0, 1.0), rep(0, 1, 100, 4, 0.5)]
        rows = hamming_curve(reports)
        assert rows == [("ampl", 1, 100.0, 4.0), ("ampl", 2, 210.0, 1.0)]
        assert hamming_curve([]) == []
        assert curve_to_csv([]) == "algo,c,effective_samples,mean_hamming\n"


class TestCsvAndConfig:
    def test_reports_round_trip(self):
        reports = run_battery(BenchConfig(algos=["ampl", "mb"], c_grid=[3.7], n_grid=[40], trials=2),
                              model=chain3())
        text = reports_to_csv(reports, header={"seed": 0})
        assert text.startswith("# seed=0\nalgo,graph,seed,c,")
        assert reports_from_csv(text) == reports

    def test_esc_csv_header(self):
        text = esc_to_csv(esc_summary([rep(0, 1, 100, 0, 1.0)], 1.0))
        assert text.splitlines()[0] == "algo,graph,target,mean_esc,trials,censored"

    def test_parse_config(self):
        cfg = parse_config("""
            # comment
            family = power-law
            p = 30
            algos = ampl, mb
            c_grid = 1, 2.5
            n_grid = 50,100
            xi = none
            pair_mb = yes
            budget = 1e6
        """)
        assert cfg.family == "power-law" and cfg.p == 30
        assert cfg.algos == ["ampl", "mb"] and cfg.c_grid == [1.0, 2.5]
        assert cfg.mb_grid() == [50, 100]
        assert cfg.xi is None and cfg.pair_mb and cfg.budget == 10**6

    @pytest.mark.parametrize("text", ["bogus = 1", "p 30", "family = torus", "algos = pc", "p = 2.5"])
    def test_parse_config_rejects(self, text):
        with pytest.raises(ValueError):
            parse_config(text)

    def test_write_outputs(self, tmp_path):
        cfg = BenchConfig(algos=["mb"], n_grid=[40, 400], trials=2)
        paths = write_outputs(cfg, run_battery(cfg, model=chain3()), tmp_path / "out")
        for p in paths.values():
            lines = p.read_text().splitlines()
            assert any(line.startswith("# n_grid=") for line in lines)
        assert len(reports_from_csv(paths["reports"].read_text())) == 4


class TestDecayProbe:
    def test_huge_eps_never_deviates(self):
        table = decay_probe(chain3(), 0, 1, [], 2.0, [10, 40], replicates=500)
        assert [f for _, f in table] == [0.0, 0.0]

    def test_refuses_small_n_and_few_replicates(self):
        with pytest.raises(ValueError):
            decay_probe(chain3(), 0, 2, [1], 0.1, [3], replicates=500)
        with pytest.raises(ValueError):
            decay_probe(chain3(), 0, 1, [], 0.1, [50], replicates=100)

    def test_decreasing(self):
        table = decay_probe(chain3(), 0, 1, [], 0.1, [50, 200, 800], replicates=1000, seed=1)
        freqs = [f for _, f in table]
        assert freqs[0] > freqs[1] > freqs[2]
