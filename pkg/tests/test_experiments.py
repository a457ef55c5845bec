"""Experiment harness: curves, DE validation, rate regions, determinism."""

import numpy as np
import pytest

from jrcsim.config import SystemConfig
from jrcsim.experiments import (
    CurveSpec,
    chord_value,
    pareto_frontier,
    rate_region,
    run_curve,
    validate_de,
)


def desk_config(**kw):
    base = dict(M=64, K=4, N_t=4, N_r=4, frame_len=1024, tau_u=510, tau_d=510)
    base.update(kw)
    return SystemConfig(**base).validate()


class TestRunCurve:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown curve kind"):
            run_curve(desk_config(), CurveSpec(kind="nope"))

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            run_curve(desk_config(), CurveSpec(kind="ul-rate", grid=(10.0, 0.0)))

    def test_deterministic_bytes_across_thread_counts(self):
        cfg = desk_config(seed=100)
        spec1 = CurveSpec(kind="ul-rate", grid=(0.0, 10.0), trials=6, threads=1)
        spec4 = CurveSpec(kind="ul-rate", grid=(0.0, 10.0), trials=6, threads=4)
        a = run_curve(cfg, spec1)
        b = run_curve(cfg, spec4)
        assert a.csv == b.csv

    def test_rerun_identical(self):
        cfg = desk_config(seed=101)
        spec = CurveSpec(kind="est-mse", grid=(0.0, 10.0), trials=4)
        assert run_curve(cfg, spec).csv == run_curve(cfg, spec).csv

    def test_csv_header_contract(self):
        cfg = desk_config(seed=102)
        res = run_curve(cfg, CurveSpec(kind="ul-radar-rate", grid=(10.0,), trials=3))
        header = res.csv.splitlines()[0].split(",")
        assert header[:5] == ["x", "mean", "stderr", "trials", "failures"]

    def test_stderr_shrinks_with_trials(self):
        cfg = desk_config(seed=103)
        small = run_curve(cfg, CurveSpec(kind="ul-radar-rate", grid=(20.0,), trials=100))
        large = run_curve(cfg, CurveSpec(kind="ul-radar-rate", grid=(20.0,), trials=400))
        se_small = small.points[0]["radar_rate_stderr"]
        se_large = large.points[0]["radar_rate_stderr"]
        # 1/sqrt(trials): quadrupling the trials roughly halves the error
        assert se_large == pytest.approx(se_small / 2.0, rel=0.35)

    def test_failures_counted_not_hidden(self):
        cfg = desk_config(seed=104, de_max_iter=1, de_tol=1e-15)
        res = run_curve(cfg, CurveSpec(kind="ul-rate", grid=(10.0,), trials=3))
        assert res.failures == 3
        assert res.points[0]["failures"] == 3

    def test_est_mse_saturation_trend(self):
        # raising pilot SNR: a loud radar floors the estimation error while
        # the radar-free curve keeps improving decade per decade
        cfg = desk_config(seed=105, trials=40)
        spec = CurveSpec(kind="est-mse", grid=(10.0, 20.0, 30.0), trials=40)
        quiet = run_curve(cfg.replace(sigma_r2=0.0), spec)
        loud = run_curve(cfg.replace(sigma_r2=1e9), spec)
        q = [p["mse_known"] for p in quiet.points]
        l = [p["mse_known"] for p in loud.points]
        assert q[2] < 0.15 * q[1]          # still falling without the radar
        assert l[2] > 0.5 * l[1]           # floored by the radar residual
        assert l[2] > 50 * q[2]


class TestValidateDe:
    def test_desk_report_passes(self):
        cfg = desk_config(seed=106, sigma_r2=10.0)
        report = validate_de(cfg, trials=120, seed=7)
        assert report["failures"] == 0
        assert report["flags"] == []
        assert report["passed"]
        assert report["links"]["ul"]["gamma_rel_err"] <= 0.10
        assert report["links"]["dl"]["gamma_rel_err"] <= 0.10
        # the noise term is the cleanest cross-check of the trace machinery
        assert report["links"]["ul"]["zeta_rel_err"]["noise"] <= 0.05

    def test_radar_off_zeroes_terms_on_both_sides(self):
        cfg = desk_config(seed=107, sigma_r2=0.0)
        report = validate_de(cfg, trials=30, seed=8)
        ul = report["links"]["ul"]
        assert ul["zeta_emp"]["radar_canc"] == 0.0
        assert ul["zeta_de"]["radar_canc"] == 0.0
        assert ul["zeta_rel_err"]["radar_canc"] == 0.0


class TestRateRegion:
    def test_frontier_dominates_chord(self):
        cfg = desk_config(seed=108, trials=24)
        res = rate_region(cfg, mode="uplink",
                          radar_grid=tuple(np.logspace(-1, 1, 4)),
                          comm_grid=tuple(np.logspace(-1, 1, 4)),
                          trials=24, mc_check_trials=0)
        assert res.frontier
        for p in res.frontier:
            assert p["r_radar"] >= chord_value(res.chord, p["r_comm"]) - 1e-9

    def test_radar_off_collapses_to_comm_axis(self):
        cfg = desk_config(seed=109, sigma_r2=0.0, trials=10)
        res = rate_region(cfg, trials=10,
                          radar_grid=(0.5, 1.0), comm_grid=(0.5, 1.0),
                          mc_check_trials=0)
        assert all(p["r_radar"] == 0.0 for p in res.points)
        best = max(res.points, key=lambda p: p["r_comm"])
        assert any(p == best for p in res.frontier)

    def test_finer_grid_extends_frontier(self):
        cfg = desk_config(seed=110, trials=10)
        coarse_grid = tuple(np.logspace(-1, 1, 3))
        fine_grid = tuple(np.logspace(-1, 1, 5))  # superset of coarse
        coarse = rate_region(cfg, trials=10, radar_grid=coarse_grid,
                             comm_grid=coarse_grid, mc_check_trials=0)
        fine = rate_region(cfg, trials=10, radar_grid=fine_grid,
                           comm_grid=fine_grid, mc_check_trials=0)
        # every coarse frontier point is weakly dominated by the fine frontier
        for p in coarse.frontier:
            dominated = any(
                q["r_comm"] >= p["r_comm"] - 1e-12 and
                q["r_radar"] >= p["r_radar"] - 1e-12
                for q in fine.frontier)
            assert dominated

    def test_mc_spot_checks_recorded(self):
        cfg = desk_config(seed=111, trials=8)
        res = rate_region(cfg, trials=8, radar_grid=(1.0,), comm_grid=(1.0, 2.0),
                          mc_check_trials=12)
        assert len(res.manifest["mc_checks"]) == 2
        for check in res.manifest["mc_checks"]:
            assert check["r_comm_mc"] == pytest.approx(check["r_comm_de"], rel=0.15)


class TestPareto:
    def test_frontier_extraction(self):
        pts = [
            {"r_comm": 1.0, "r_radar": 5.0},
            {"r_comm": 2.0, "r_radar": 4.0},
            {"r_comm": 1.5, "r_radar": 3.0},   # dominated
            {"r_comm": 3.0, "r_radar": 1.0},
        ]
        front = pareto_frontier(pts)
        assert [(p["r_comm"], p["r_radar"]) for p in front] == [
            (1.0, 5.0), (2.0, 4.0), (3.0, 1.0)]

    def test_chord_interpolation(self):
        chord = [{"r_comm": 4.0, "r_radar": 1.0}, {"r_comm": 0.0, "r_radar": 5.0}]
        assert chord_value(chord, 2.0) == pytest.approx(3.0)
