import numpy as np
import pytest

from conftest import complete_graph
from maskmul.bench import (CSV_HEADER, ExperimentRecord, append_records,
                           density_sweep, gflops, mteps, performance_profile,
                           profile_table, read_records, run_experiment,
                           traffic_estimate)
from maskmul.generate import GeneratorSpec
from maskmul.graphs import BcConfig
from maskmul.mmio import write_matrix_market
from maskmul.multiply import ALGORITHMS, MultiplyPlan


class TestTrafficEstimate:
    def test_pull_formula(self):
        # nnzA + nnzM * (1 + nnzB/n)
        assert traffic_estimate("pull", 100, 200, 50, 20) == 650

    def test_pull_no_mask_entries(self):
        assert traffic_estimate("pull", 100, 200, 0, 20) == 100

    def test_push_formula(self):
        # nnzA + nnzA*L + flops
        assert traffic_estimate("push", 100, 0, 0, 1,
                                cache_line_words=8, flops=1000) == 1900

    def test_exact_integer_arithmetic(self):
        for nnz_a, nnz_b, nnz_m, n in [(7, 30, 3, 10), (1, 4, 2, 2),
                                       (1000, 5000, 250, 100)]:
            want = nnz_a + nnz_m + nnz_m * nnz_b // n
            assert traffic_estimate("pull", nnz_a, nnz_b, nnz_m, n) == want

    def test_validation(self):
        with pytest.raises(ValueError):
            traffic_estimate("pull", 1, 1, 1, 0)
        with pytest.raises(ValueError):
            traffic_estimate("pull", -1, 1, 1, 1)
        with pytest.raises(ValueError):
            traffic_estimate("sideways", 1, 1, 1, 1)


def rec(alg, inp, seconds, trial=0, benchmark="tricount", phases="1p"):
    return ExperimentRecord(benchmark, alg, phases, False, inp, 0, 0.0, 0.0,
                            1, trial, seconds, 1000, gflops(1000, seconds))


class TestPerformanceProfile:
    def test_single_algorithm_jumps_to_one(self):
        prof = performance_profile([rec("msa", "g1", 0.5), rec("msa", "g2", 0.25)])
        assert prof.curves["MSA-1P"] == [(1.0, 1.0)]
        assert prof.fraction_within("MSA-1P", 1.0) == 1.0

    def test_two_identical_algorithms(self):
        rows = [rec("msa", "g1", 0.5), rec("hash", "g1", 0.5),
                rec("msa", "g2", 0.1), rec("hash", "g2", 0.1)]
        prof = performance_profile(rows)
        for label in ("MSA-1P", "HASH-1P"):
            assert prof.fraction_within(label, 1.0) == 1.0

    def test_hand_built_three_inputs(self):
        # input times: msa 1/2/4, hash 2/2/2 -> best 1/2/2
        rows = [rec("msa", "a", 1.0), rec("hash", "a", 2.0),
                rec("msa", "b", 2.0), rec("hash", "b", 2.0),
                rec("msa", "c", 4.0), rec("hash", "c", 2.0)]
        prof = performance_profile(rows)
        # msa ratios: 1, 1, 2 -> y(1) = 2/3, y(2) = 1
        assert prof.fraction_within("MSA-1P", 1.0) == pytest.approx(2 / 3)
        assert prof.fraction_within("MSA-1P", 2.0) == pytest.approx(1.0)
        # hash ratios: 2, 1, 1 -> y(1) = 2/3, y(2) = 1
        assert prof.fraction_within("HASH-1P", 1.0) == pytest.approx(2 / 3)
        assert prof.fraction_within("HASH-1P", 1.99) == pytest.approx(2 / 3)
        assert prof.fraction_within("HASH-1P", 2.0) == pytest.approx(1.0)

    def test_min_over_trials(self):
        rows = [rec("msa", "a", 5.0, trial=0), rec("msa", "a", 1.0, trial=1),
                rec("hash", "a", 2.0)]
        prof = performance_profile(rows)
        assert prof.fraction_within("MSA-1P", 1.0) == 1.0
        assert prof.fraction_within("HASH-1P", 1.0) == 0.0

    def test_monotone_and_dnf(self):
        rows = [rec("msa", "a", 1.0), rec("hash", "a", 3.0),
                rec("msa", "b", 1.0)]  # hash missing on b
        prof = performance_profile(rows)
        ys = [prof.fraction_within("HASH-1P", x) for x in (1, 2, 3, 100)]
        assert ys == sorted(ys)
        assert prof.fraction_within("HASH-1P", 1e9) == pytest.approx(0.5)
        table = profile_table(prof)
        assert "MSA-1P" in table

    def test_metric_helpers(self):
        assert gflops(2_000_000_000, 2.0) == 1.0
        assert mteps(512, 1_000_000, 512.0) == 1.0


class TestCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "r.csv"
        rows = [rec("msa", "a", 0.125), rec("hash", "b", 0.5, trial=3)]
        append_records(p, rows)
        back = read_records(p)
        assert [r.key() for r in back] == [r.key() for r in rows]
        assert back[0].seconds == 0.125
        header = p.read_text().splitlines()[0]
        assert header == ",".join(CSV_HEADER)

    def test_metric_recomputable(self, tmp_path):
        p = tmp_path / "r.csv"
        append_records(p, [rec("msa", "a", 0.03125)])
        r = read_records(p)[0]
        assert r.metric == pytest.approx(gflops(r.flops, r.seconds), rel=1e-6)


class TestRunExperiment:
    def test_tricount_all_plans_on_k4(self, tmp_path):
        path = tmp_path / "k4.mtx"
        write_matrix_market(path, complete_graph(4), field="pattern")
        plans = [MultiplyPlan(algorithm=a) for a in ALGORITHMS]
        records = run_experiment("tricount", plans, [str(path)], trials=1)
        assert len(records) == len(ALGORITHMS)
        assert all(r.benchmark == "tricount" for r in records)
        assert len({r.flops for r in records}) == 1  # plan-independent flops

    def test_bc_skips_with_reason(self):
        spec = GeneratorSpec("rmat", 4, 3, seed=1)
        plans = [MultiplyPlan(algorithm=a) for a in ("msa", "inner", "mca", "heap")]
        skipped: list = []
        records = run_experiment("bc", plans, [spec], trials=1,
                                 bc_config=BcConfig(batch_size=8),
                                 skipped=skipped)
        assert {r.algorithm for r in records} == {"msa"}
        reasons = {label: reason for _, label, _, reason in skipped}
        assert "Inner-1P" in reasons and "MCA-1P" in reasons and "Heap-1P" in reasons
        assert "complemented" in reasons["Inner-1P"]

    def test_deterministic_flops(self):
        spec = GeneratorSpec("erdos-renyi", 5, 3, seed=7)
        plans = [MultiplyPlan(algorithm="msa")]
        r1 = run_experiment("tricount", plans, [spec], trials=1)
        r2 = run_experiment("tricount", plans, [spec], trials=1)
        assert r1[0].flops == r2[0].flops

    def test_resume_skips_existing(self, tmp_path):
        csv_path = tmp_path / "out.csv"
        spec = GeneratorSpec("erdos-renyi", 4, 3, seed=7)
        plans = [MultiplyPlan(algorithm="msa")]
        first = run_experiment("tricount", plans, [spec], trials=2,
                               csv_path=str(csv_path))
        assert len(first) == 2
        second = run_experiment("tricount", plans, [spec], trials=2,
                                csv_path=str(csv_path))
        assert second == []
        assert len(read_records(csv_path)) == 2

    def test_unknown_benchmark(self):
        with pytest.raises(ValueError):
            run_experiment("pagerank", [MultiplyPlan()], [])


class TestDensitySweep:
    def test_winner_per_cell_and_cross_validation(self, tmp_path):
        plans = [MultiplyPlan(algorithm=a) for a in ("msa", "hash", "inner")]
        winners, records = density_sweep([5], [2.0, 4.0], [2.0], plans,
                                         trials=1, seed=3,
                                         csv_path=str(tmp_path / "d.csv"))
        assert set(winners) == {(5, 2.0, 2.0), (5, 4.0, 2.0)}
        for label in winners.values():
            assert label in ("MSA-1P", "Hash-1P", "Inner-1P")
        assert len(records) == 2 * 3  # cells x plans, one trial each

    def test_sweep_resume(self, tmp_path):
        csv_path = str(tmp_path / "d.csv")
        plans = [MultiplyPlan(algorithm="msa")]
        density_sweep([4], [2.0], [2.0], plans, trials=1, seed=3, csv_path=csv_path)
        n1 = len(read_records(csv_path))
        _, records = density_sweep([4], [2.0], [2.0], plans, trials=1, seed=3,
                                   csv_path=csv_path)
        assert records == []
        assert len(read_records(csv_path)) == n1
