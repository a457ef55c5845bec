"""Downlink precoding: null forming, empirical split, analytic SINR."""

import numpy as np
import pytest

from jrcsim import downlink, training
from jrcsim.channels import draw_channels
from jrcsim.config import SystemConfig
from jrcsim.scenario import build_scenario, power_control


def desk_config(**kw):
    base = dict(M=64, K=4, N_t=4, N_r=4, frame_len=1024, tau_u=510, tau_d=510)
    base.update(kw)
    return SystemConfig(**base).validate()


def full_pipeline(cfg, rng):
    scen = build_scenario(cfg, np.random.default_rng(cfg.seed))
    pw = power_control(scen, cfg)
    pilots = training.generate_pilots(cfg.K)
    real = draw_channels(scen, cfg, rng)
    s_p = training.pilot_radar_block(cfg, rng)
    rx = training.pilot_rx_block(real, scen, pw, pilots, s_p, cfg, rng)
    coeffs = training.lmmse_coefficients(scen, pw, cfg, sync_known=True)
    est = training.estimate_channels(rx, pilots, coeffs, radar_block=s_p,
                                     g_rb_hat=real.G_rb_hat)
    return scen, pw, real, est, coeffs


class TestPrecoder:
    def test_matched_filter_limit(self):
        cfg = desk_config(seed=80)
        rng = np.random.default_rng(1)
        _, _, real, est, _ = full_pipeline(cfg, rng)
        h_bar = np.concatenate([est.h_hat, real.G_br_hat], axis=1)
        alpha = 1e6 * np.linalg.norm(h_bar, 2) ** 2
        prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
        rel = (np.linalg.norm(alpha * prec.Q - est.h_hat, "fro")
               / np.linalg.norm(est.h_hat, "fro"))
        assert rel <= 1e-3

    def test_rank_one_identity(self):
        # K = 1 without a radar block: the regularized inverse cannot rotate
        # a single column, so Q is proportional to it
        cfg = SystemConfig(M=16, K=1, N_t=0, N_r=0, frame_len=1024,
                           tau_u=511, tau_d=512, sigma_r2=0.0, seed=81).validate()
        rng = np.random.default_rng(2)
        scen = build_scenario(cfg, np.random.default_rng(cfg.seed))
        real = draw_channels(scen, cfg, rng)
        est = training.ChannelEstimate(h_hat=real.H, b2=np.ones(1),
                                       b2_bar=np.zeros(1), sync_known=True)
        prec = downlink.rzf_precoder(est, real.G_br_hat, alpha=0.5)
        q, h = prec.Q[:, 0], real.H[:, 0]
        cosine = abs(q.conj() @ h) / (np.linalg.norm(q) * np.linalg.norm(h))
        assert cosine == pytest.approx(1.0, abs=1e-12)

    def test_null_block_property(self):
        # perfect interference CSI and small alpha: the radar-side response
        # is orders of magnitude below the user-side response
        cfg = desk_config(interf_err_frac=0.0, seed=82)
        rng = np.random.default_rng(3)
        _, pw, real, est, _ = full_pipeline(cfg, rng)
        h_bar = np.concatenate([est.h_hat, real.G_br_hat], axis=1)
        alpha = 1e-6 * np.linalg.norm(h_bar, 2) ** 2
        prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
        assert downlink.null_leakage_ratio(prec, pw) <= 1e-6

    def test_leakage_monotone_on_average(self):
        # ensemble mean of the leakage/served ratio falls monotonically over
        # seven decades of the regularizer and engages the null at the bottom
        cfg = desk_config(interf_err_frac=0.0, N0=0.0)
        rng = np.random.default_rng(4)
        ratios = np.zeros(7)
        drops = 40
        for d in range(drops):
            _, pw, real, est, _ = full_pipeline(cfg.replace(seed=2000 + d), rng)
            h_bar = np.concatenate([est.h_hat, real.G_br_hat], axis=1)
            norm2 = np.linalg.norm(h_bar, 2) ** 2
            for k in range(7):
                prec = downlink.rzf_precoder(est, real.G_br_hat, 10.0 ** (-k) * norm2)
                ratios[k] += downlink.null_leakage_ratio(prec, pw)
        ratios /= drops
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] <= 1e-6

    def test_alpha_must_be_positive(self):
        cfg = desk_config(seed=83)
        rng = np.random.default_rng(5)
        _, _, real, est, _ = full_pipeline(cfg, rng)
        with pytest.raises(ValueError):
            downlink.rzf_precoder(est, real.G_br_hat, 0.0)


class TestEmpirical:
    def test_decomposition_sums(self):
        cfg = desk_config(seed=84)
        rng = np.random.default_rng(6)
        scen, pw, real, est, _ = full_pipeline(cfg, rng)
        alpha = downlink.default_alpha(scen, pw, cfg)
        prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
        res = downlink.empirical_downlink_sinr(real, est, prec, pw, scen, cfg)
        total = sum(res.zeta[name] for name in downlink.ZETA_TERMS)
        np.testing.assert_allclose(res.total, total, rtol=1e-10)

    def test_radar_term_mean_is_closed_form(self):
        # sigma_r2 * eta_rk within three standard errors over many draws
        cfg = desk_config(seed=85, sigma_r2=25.0)
        scen = build_scenario(cfg)
        pw = power_control(scen, cfg)
        rng = np.random.default_rng(7)
        samples = []
        for _ in range(800):
            real = draw_channels(scen, cfg, rng)
            p_radar = cfg.sigma_r2 * np.sum(np.abs(real.g_rk) ** 2, axis=1) / cfg.N_t
            samples.append(p_radar)
        samples = np.array(samples)
        expected = cfg.sigma_r2 * scen.eta_rk
        for k in range(cfg.K):
            se = samples[:, k].std(ddof=1) / np.sqrt(samples.shape[0])
            assert abs(samples[:, k].mean() - expected[k]) <= 3 * se

    def test_zero_forcing_limit_kills_interference(self):
        cfg = desk_config(sigma_r2=0.0, interf_err_frac=0.0, N0=1e-9, seed=86)
        rng = np.random.default_rng(8)
        scen = build_scenario(cfg, np.random.default_rng(cfg.seed))
        pw = power_control(scen, cfg)
        real = draw_channels(scen, cfg, rng)
        est = training.ChannelEstimate(h_hat=real.H, b2=np.ones(cfg.K),
                                       b2_bar=np.zeros(cfg.K), sync_known=True)
        h_bar = np.concatenate([est.h_hat, real.G_br_hat], axis=1)
        alpha = 1e-9 * np.linalg.norm(h_bar, 2) ** 2
        prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
        res = downlink.empirical_downlink_sinr(real, est, prec, pw, scen, cfg)
        assert np.all(res.zeta["inter_user"] <= 1e-9 * res.zeta["signal"])


class TestDeterministicEquivalent:
    def test_matches_monte_carlo(self):
        cfg = desk_config(seed=87, sigma_r2=10.0)
        rng = np.random.default_rng(9)
        emp = []
        scen, pw, real, est, coeffs = full_pipeline(cfg, rng)
        alpha = downlink.default_alpha(scen, pw, cfg)
        for _ in range(150):
            scen, pw, real, est, coeffs = full_pipeline(cfg, rng)
            prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
            emp.append(downlink.empirical_downlink_sinr(
                real, est, prec, pw, scen, cfg).gamma)
        de = downlink.de_downlink_sinr(scen, pw, cfg, coeffs.b2, alpha)
        np.testing.assert_allclose(np.mean(emp, axis=0), de.gamma, rtol=0.10)

    def test_classical_rzf_reduction(self):
        # no radar at all: the analytic SINR still matches Monte Carlo
        cfg = SystemConfig(M=48, K=4, N_t=0, N_r=0, frame_len=1024,
                           tau_u=510, tau_d=510, sigma_r2=0.0, seed=88).validate()
        rng = np.random.default_rng(10)
        emp = []
        scen, pw, real, est, coeffs = full_pipeline(cfg, rng)
        alpha = downlink.default_alpha(scen, pw, cfg)
        for _ in range(200):
            scen, pw, real, est, coeffs = full_pipeline(cfg, rng)
            prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
            emp.append(downlink.empirical_downlink_sinr(
                real, est, prec, pw, scen, cfg).gamma)
        de = downlink.de_downlink_sinr(scen, pw, cfg, coeffs.b2, alpha)
        assert np.all(de.zeta["radar"] == 0)
        np.testing.assert_allclose(np.mean(emp, axis=0), de.gamma, rtol=0.10)

    def test_perfect_csi_zeroes_error_term(self):
        cfg = desk_config(seed=89)
        scen = build_scenario(cfg)
        pw = power_control(scen, cfg)
        de = downlink.de_downlink_sinr(scen, pw, cfg, np.ones(cfg.K), alpha=0.1)
        assert np.all(de.zeta["est_error"] == 0)

    def test_radar_term_is_alpha_independent(self):
        cfg = desk_config(seed=90)
        scen = build_scenario(cfg)
        pw = power_control(scen, cfg)
        coeffs = training.lmmse_coefficients(scen, pw, cfg, sync_known=True)
        a = downlink.de_downlink_sinr(scen, pw, cfg, coeffs.b2, alpha=0.01)
        b = downlink.de_downlink_sinr(scen, pw, cfg, coeffs.b2, alpha=1.0)
        np.testing.assert_array_equal(a.zeta["radar"], b.zeta["radar"])
        np.testing.assert_allclose(a.zeta["radar"], cfg.sigma_r2 * scen.eta_rk)


class TestRadarNoisePower:
    def test_matches_simulated_interference(self):
        cfg = desk_config(seed=91, eps_dn_data=100.0, cell_radius=30.0)
        rng = np.random.default_rng(11)
        scen, pw, real, est, coeffs = full_pipeline(cfg, rng)
        alpha = downlink.default_alpha(scen, pw, cfg)
        noise_de = downlink.de_radar_noise_power(scen, pw, cfg, coeffs.b2, alpha)
        acc = 0.0
        trials = 300
        for _ in range(trials):
            _, _, real, est, _ = full_pipeline(cfg, rng)
            prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
            tx = prec.Q * np.sqrt(pw.eps_dn_data)[None, :]
            leak = real.G_br.conj().T @ tx
            acc += np.mean(np.sum(np.abs(leak) ** 2, axis=1))
        emp = cfg.N0 + acc / trials
        assert emp == pytest.approx(noise_de, rel=0.10)

    def test_collapses_to_thermal_noise(self):
        # eta_e = 0, vanishing downlink power, vanishing alpha: only N0 left
        cfg = desk_config(interf_err_frac=0.0, eps_dn_data=1e-12, seed=92)
        scen = build_scenario(cfg)
        pw = power_control(scen, cfg)
        coeffs = training.lmmse_coefficients(scen, pw, cfg, sync_known=True)
        noise = downlink.de_radar_noise_power(scen, pw, cfg, coeffs.b2, alpha=1e-9)
        assert noise == pytest.approx(cfg.N0, rel=1e-9)

    def test_downlink_radar_rate_beats_uplink(self):
        # matched powers: the null makes the downlink subframe quieter for
        # the radar than the uplink pilots
        from jrcsim import radar

        cfg = desk_config(seed=93, eps_up_pilot=10.0, eps_dn_data=10.0)
        ul_rates, dl_rates = [], []
        trials = 60
        for t in range(trials):
            cfg_t = cfg.replace(seed=1000 + t)
            scen = build_scenario(cfg_t)
            pw = power_control(scen, cfg_t)
            coeffs = training.lmmse_coefficients(scen, pw, cfg_t, sync_known=True)
            alpha = downlink.default_alpha(scen, pw, cfg_t)
            dl_noise = downlink.de_radar_noise_power(scen, pw, cfg_t, coeffs.b2, alpha)
            ul_rates.append(radar.crb("uplink", scen, pw, cfg_t).radar_rate)
            dl_rates.append(radar.crb("downlink", scen, pw, cfg_t,
                                      dl_noise_power=dl_noise).radar_rate)
        assert np.mean(dl_rates) > np.mean(ul_rates)
