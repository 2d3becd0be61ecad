import warnings
from datetime import date, timedelta

import numpy as np
import pytest

import smoothbench.pipeline as pl
from smoothbench.errors import MissingBiomarker, SeriesTooShort
from smoothbench.clustering import cluster_methods
from smoothbench.pipeline import (
    PipelineConfig,
    method_seed,
    run_benchmark,
    run_raw_and_normalized,
)
from smoothbench.reportio import (
    parse_reports_json,
    read_reports,
    reports_json,
    write_reports,
)
from smoothbench.smoothers import MethodId
from smoothbench.synthetic import DEFAULT_F_NH4, bundled_records, catchment_suite
from smoothbench.timeseries import SurveillanceRecord

TINY = dict(ga_population=8, ga_iterations=3, elitism_fraction=0.15)


def tiny_config(**kw):
    merged = dict(TINY, f_nh4=DEFAULT_F_NH4)
    merged.update(kw)
    return PipelineConfig(**merged)


@pytest.fixture(scope="module")
def bundled():
    return bundled_records()


@pytest.fixture(scope="module")
def raw_report(bundled):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_benchmark(bundled, "raw", tiny_config())


def constant_records(n=12):
    start = date(2020, 10, 1)
    return [
        SurveillanceRecord(
            site="flat",
            timestamp=start + timedelta(days=i),
            c_virus=5e4,
            q_flow=1e8,
            c_nh4=0.03,
        )
        for i in range(n)
    ]


class TestRunBenchmark:
    def test_report_completeness(self, raw_report):
        assert raw_report.signal_kind == "raw"
        assert len(raw_report.outcomes) == 13
        assert all(o.ok for o in raw_report.outcomes)
        labels = set(raw_report.cluster.assignments.values())
        assert labels == {"best", "middle", "worst"}
        assert raw_report.optimal_method in {o.method for o in raw_report.outcomes}
        assert len(raw_report.cluster.medoids) == 3
        assert len(raw_report.smoothed) == len(raw_report.timestamps)

    def test_band_ordered_pointwise(self, raw_report):
        assert all(
            lo <= hi for lo, hi in zip(raw_report.band_lower, raw_report.band_upper)
        )

    def test_parameter_free_methods_skip_calibration(self, raw_report):
        for o in raw_report.outcomes:
            if o.method in (MethodId.TUK, MethodId.KAL, MethodId.FFT):
                assert o.ga_seed is None
                assert o.ga_evaluations == 0
            else:
                assert o.ga_seed is not None
                assert o.ga_evaluations > 0

    def test_provenance_counts(self, raw_report):
        counts = raw_report.provenance["evaluation_counts"]
        n = counts["series_length"]
        total = sum(
            (c["ga_evaluations"] + c["final_loocv_builds"]) * n
            for c in counts["per_method"].values()
        ) + 1
        assert counts["smoother_applications"] == total

    def test_regression_attached_when_incidence_present(self, raw_report):
        assert raw_report.regression is not None
        assert raw_report.regression.n > 10

    def test_determinism(self, bundled, raw_report):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            again = run_benchmark(bundled, "raw", tiny_config())
        assert again == raw_report
        assert reports_json([again]) == reports_json([raw_report])

    def test_constant_input_degenerate_path(self):
        report = run_benchmark(constant_records(), "raw", tiny_config())
        # every method ties at (numerically) zero error; the exactly-zero ones
        # exercise the -inf AIC sentinel and the degenerate clustering path
        sentinels = 0
        for o in report.outcomes:
            if o.ok:
                assert o.index.mae <= 1e-8
                assert o.index.var <= 1e-8
                sentinels += o.index.aic == float("-inf")
        assert sentinels >= 5
        repeat = run_benchmark(constant_records(), "raw", tiny_config())
        assert repeat.optimal_method == report.optimal_method
        assert repeat == report

    def test_too_few_samples(self):
        with pytest.raises(SeriesTooShort):
            run_benchmark(constant_records(4), "raw", tiny_config())

    def test_aic_sign_switch_shifts_by_2k(self, bundled):
        methods = (MethodId.TUK, MethodId.FFT, MethodId.SMA)
        subtracted = run_benchmark(bundled, "raw", tiny_config(methods=methods))
        added = run_benchmark(
            bundled, "raw", tiny_config(methods=methods, standard_aic_sign=True)
        )
        for p, s in zip(subtracted.outcomes, added.outcomes):
            assert s.index.aic == pytest.approx(p.index.aic + 4 * p.index.k, rel=1e-12)

    def test_no_standardize_flag_clusters_raw_features(self, bundled):
        methods = (MethodId.TUK, MethodId.FFT, MethodId.SMA, MethodId.KER)
        report = run_benchmark(
            bundled, "raw", tiny_config(methods=methods, standardize=False)
        )
        assert set(report.cluster.assignments.values()) == {"best", "middle", "worst"}

    def test_stage_isolation_recluster(self, raw_report):
        indices = [o.index for o in raw_report.outcomes if o.ok]
        redo = cluster_methods(indices, seed=raw_report.provenance["master_seed"])
        assert redo == raw_report.cluster

    def test_failed_method_excluded_with_warning(self, bundled, monkeypatch):
        real = pl.build_loocv_matrix

        def sabotage(spec, series):
            if spec.method is MethodId.TUK:
                raise SeriesTooShort("sabotaged for the test")
            return real(spec, series)

        monkeypatch.setattr(pl, "build_loocv_matrix", sabotage)
        config = tiny_config(methods=(MethodId.TUK, MethodId.FFT, MethodId.SMA, MethodId.KER))
        with pytest.warns(UserWarning, match="tuk"):
            report = run_benchmark(bundled, "raw", config)
        failed = next(o for o in report.outcomes if o.method is MethodId.TUK)
        assert not failed.ok
        assert "SeriesTooShort" in failed.error
        assert MethodId.TUK not in report.cluster.assignments
        assert len([o for o in report.outcomes if o.ok]) == 3


class TestRawAndNormalized:
    def test_missing_biomarker(self):
        records = [
            SurveillanceRecord(site="x", timestamp=date(2020, 1, 1) + timedelta(days=i), c_virus=1e4 + i)
            for i in range(10)
        ]
        raw = run_benchmark(records, "raw", tiny_config(methods=(MethodId.TUK, MethodId.FFT, MethodId.SMA)))
        assert raw.signal_kind == "raw"
        with pytest.raises(MissingBiomarker):
            run_benchmark(records, "normalized", tiny_config())

    def test_pair_runs_tagged(self, bundled):
        config = tiny_config(methods=(MethodId.TUK, MethodId.FFT, MethodId.SMA, MethodId.SPL))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            raw, norm = run_raw_and_normalized(bundled, config)
        assert (raw.signal_kind, norm.signal_kind) == ("raw", "normalized")
        assert raw.original != norm.original

    def test_constant_nh4_preserves_ranking_for_scale_equivariant_methods(self, bundled):
        # NH4 constant makes the normalized signal proportional to raw, so the
        # scale-equivariant subset must rank identically
        records = [
            SurveillanceRecord(
                site=r.site, timestamp=r.timestamp, c_virus=r.c_virus,
                q_flow=r.q_flow, c_nh4=0.025, active_cases=r.active_cases,
                incidence_7d=r.incidence_7d,
            )
            for r in bundled
        ]
        subset = (MethodId.SMA, MethodId.RRM, MethodId.TUK, MethodId.SPL,
                  MethodId.KER, MethodId.POL, MethodId.SGF, MethodId.FFT)
        config = tiny_config(methods=subset)
        raw, norm = run_raw_and_normalized(records, config)
        assert raw.optimal_method == norm.optimal_method
        assert raw.cluster.assignments == norm.cluster.assignments


class TestSeeds:
    def test_method_seeds_stable_and_distinct(self):
        seeds = {m: method_seed(42, m) for m in MethodId}
        assert len(set(seeds.values())) == 13
        assert all(method_seed(42, m) == s for m, s in seeds.items())
        assert method_seed(43, MethodId.SMA) != seeds[MethodId.SMA]

    def test_dropping_methods_leaves_others_untouched(self, bundled):
        config_full = tiny_config(methods=(MethodId.SMA, MethodId.SPL, MethodId.KER, MethodId.TUK))
        config_less = tiny_config(methods=(MethodId.SMA, MethodId.SPL, MethodId.TUK))
        full = run_benchmark(bundled, "raw", config_full)
        less = run_benchmark(bundled, "raw", config_less)
        by_method_full = {o.method: o for o in full.outcomes}
        by_method_less = {o.method: o for o in less.outcomes}
        for m in (MethodId.SMA, MethodId.SPL):
            assert by_method_full[m].params == by_method_less[m].params
            assert by_method_full[m].index == by_method_less[m].index


class TestReportIo:
    def test_json_round_trip_identity(self, raw_report):
        text = reports_json([raw_report])
        back = parse_reports_json(text)
        assert back == [raw_report]
        assert reports_json(back) == text

    def test_write_read_write_bytes_identical(self, raw_report, tmp_path):
        out1 = tmp_path / "first"
        out2 = tmp_path / "second"
        write_reports([raw_report], str(out1))
        loaded = read_reports(str(out1 / "report.json"))
        write_reports(loaded, str(out2))
        for name in ("report.json", "smoothed_raw.csv", "clusters.csv", "regression.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_all_four_payloads_exist_and_reparse(self, raw_report, tmp_path):
        paths = write_reports([raw_report], str(tmp_path))
        names = {p.split("/")[-1] for p in paths}
        assert names == {"report.json", "smoothed_raw.csv", "clusters.csv", "regression.csv"}
        import csv

        with open(tmp_path / "clusters.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 13
        assert {r["cluster"] for r in rows} <= {"best", "middle", "worst"}
        assert sum(int(r["is_optimal"]) for r in rows) == 1
        with open(tmp_path / "smoothed_raw.csv") as fh:
            srows = list(csv.DictReader(fh))
        assert len(srows) == len(raw_report.timestamps)
        assert float(srows[0]["smoothed"]) == raw_report.smoothed[0]

    def test_neg_inf_aic_round_trips(self, tmp_path):
        report = run_benchmark(constant_records(), "raw", tiny_config())
        ok = [o for o in report.outcomes if o.ok]
        assert any(o.index.aic == float("-inf") for o in ok)
        back = parse_reports_json(reports_json([report]))[0]
        assert back == report

    def test_loocv_traces_optional(self, bundled):
        config = tiny_config(methods=(MethodId.TUK, MethodId.SMA, MethodId.FFT), include_loocv=True)
        report = run_benchmark(bundled, "raw", config)
        n = len(report.timestamps)
        assert report.loocv_optimal is not None
        assert len(report.loocv_optimal) == n
        back = parse_reports_json(reports_json([report]))[0]
        assert back == report


class TestSynthetic:
    def test_bundled_shape(self, bundled):
        assert len(bundled) == 60
        assert sum(r.c_virus is None for r in bundled) == 1
        assert sum(r.c_nh4 is None for r in bundled) == 2
        assert all(r.incidence_7d is not None for r in bundled)

    def test_catchment_suite_noise_ordering(self):
        suite = catchment_suite()
        assert list(suite) == ["A", "B", "C", "D"]
        spreads = {}
        for site, (records, truth) in suite.items():
            values = np.array([r.c_virus for r in records])
            spreads[site] = np.std(np.log(values / np.maximum(truth.c_virus, 1e-12)))
        assert spreads["A"] < spreads["B"] < spreads["C"] < spreads["D"]
