"""Monte Carlo harness: figure-style curves, DE validation and rate regions.

Every experiment is reproducible byte-for-byte from (config, seed): each
trial draws its randomness from a counter-derived stream keyed by
(seed, grid-point index, trial index), results are slotted by trial index,
and aggregation is an ordered reduction, so neither thread count nor
scheduling order can change the output.
"""

from __future__ import annotations

import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, downlink, radar, training, uplink
from .channels import draw_channels
from .config import SystemConfig
from .de import DeError
from .scenario import build_scenario, power_control

CURVE_KINDS = (
    "est-mse", "aoa-mse", "ul-rate", "ul-radar-rate", "dl-rate", "dl-radar-rate",
)
ALL_KINDS = CURVE_KINDS + ("rate-region", "validate-de")

# Which per-trial metric fills the canonical "mean" CSV column.
PRIMARY_METRIC = {
    "est-mse": "mse_known",
    "aoa-mse": "aoa_sq_err",
    "ul-rate": "rate_emp",
    "dl-rate": "rate_emp",
    "ul-radar-rate": "radar_rate",
    "dl-radar-rate": "radar_rate",
}

DEFAULT_SWEEPS = {
    "est-mse": ("snr_db", (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)),
    "aoa-mse": ("radar_snr_db", (0.0, 10.0, 20.0, 30.0, 40.0)),
    "ul-rate": ("snr_db", (0.0, 5.0, 10.0, 15.0, 20.0)),
    "dl-rate": ("snr_db", (0.0, 5.0, 10.0, 15.0, 20.0)),
    "ul-radar-rate": ("radar_snr_db", (0.0, 10.0, 20.0, 30.0, 40.0)),
    "dl-radar-rate": ("radar_snr_db", (0.0, 10.0, 20.0, 30.0, 40.0)),
}

_SNR_KEY_BY_KIND = {
    "est-mse": "eps_up_pilot",
    "ul-rate": "eps_up_data",
    "dl-rate": "eps_dn_data",
}


@dataclass(frozen=True)
class CurveSpec:
    """One curve request: what to sweep, how finely, and how often."""

    kind: str
    sweep: str | None = None
    grid: tuple[float, ...] | None = None
    trials: int | None = None
    seed: int | None = None
    threads: int = 1

    def resolved(self, config: SystemConfig) -> "CurveSpec":
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind '{self.kind}'")
        sweep, grid = DEFAULT_SWEEPS[self.kind]
        grid_values = tuple(float(x) for x in (self.grid or grid))
        if not grid_values:
            raise ValueError("sweep grid must not be empty")
        if list(grid_values) != sorted(grid_values):
            raise ValueError("sweep grid must be sorted ascending")
        return CurveSpec(
            kind=self.kind,
            sweep=self.sweep or sweep,
            grid=grid_values,
            trials=self.trials if self.trials is not None else config.trials,
            seed=self.seed if self.seed is not None else config.seed,
            threads=max(1, self.threads),
        )


@dataclass(frozen=True)
class CurveResult:
    kind: str
    points: list[dict]
    csv: str
    manifest: dict
    failures: int


def apply_sweep(config: SystemConfig, kind: str, sweep: str, x: float) -> SystemConfig:
    """Move one grid coordinate into the configuration."""
    if sweep == "snr_db":
        key = _SNR_KEY_BY_KIND.get(kind)
        if key is None:
            raise ValueError(f"'snr_db' sweep undefined for kind '{kind}'")
        return config.replace(**{key: config.N0 * 10.0 ** (x / 10.0)})
    if sweep == "pilot_snr_db":
        return config.replace(eps_up_pilot=config.N0 * 10.0 ** (x / 10.0))
    if sweep == "radar_snr_db":
        return config.replace(radar_snr=10.0 ** (x / 10.0))
    if sweep == "sigma_r2_db":
        return config.replace(sigma_r2=config.N0 * 10.0 ** (x / 10.0))
    return config.replace(**{sweep: x})


def _trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, point, trial)))


def _run_point(trial_fn, config, n_trials, seed, point_idx, threads):
    """Run one grid point; returns (ordered per-trial dicts or None, failures)."""
    results: list[dict | None] = [None] * n_trials

    def one(t: int):
        rng = _trial_rng(seed, point_idx, t)
        try:
            results[t] = trial_fn(config, rng)
        except DeError:
            results[t] = None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(n_trials)))
    else:
        for t in range(n_trials):
            one(t)
    failures = sum(r is None for r in results)
    return results, failures


def _aggregate(results: list[dict | None]) -> dict[str, tuple[float, float]]:
    """Mean and standard error per metric over the successful trials."""
    good = [r for r in results if r is not None]
    if not good:
        return {}
    out = {}
    for key in good[0]:
        vals = np.array([r[key] for r in good], dtype=float)
        mean = float(vals.mean())
        if vals.size > 1 and np.all(np.isfinite(vals)):
            stderr = float(vals.std(ddof=1) / np.sqrt(vals.size))
        else:
            stderr = 0.0
        out[key] = (mean, stderr)
    return out


# --------------------------------------------------------------------------
# Per-trial pipelines
# --------------------------------------------------------------------------

def run_comm_trial(config: SystemConfig, rng: np.random.Generator) -> dict:
    """One full drop through both links; empirical and analytic sides paired."""
    scen = build_scenario(config, rng)
    pw = power_control(scen, config)
    real = draw_channels(scen, config, rng)
    pilots = training.generate_pilots(config.K)
    s_pilot = training.pilot_radar_block(config, rng)
    rx = training.pilot_rx_block(real, scen, pw, pilots, s_pilot, config, rng)
    coeffs = training.lmmse_coefficients(scen, pw, config, sync_known=True)
    est = training.estimate_channels(rx, pilots, coeffs, radar_block=s_pilot,
                                     g_rb_hat=real.G_rb_hat)

    comb = uplink.mmse_combiner(est, real.G_rb_hat, scen, pw, config)
    ul_emp = uplink.empirical_uplink_sinr(real, est, comb, pw, scen, config)
    ul_de = uplink.de_uplink_sinr(scen, pw, config, real.G_rb_hat, coeffs.b2)

    alpha = config.alpha_dl or downlink.default_alpha(scen, pw, config)
    prec = downlink.rzf_precoder(est, real.G_br_hat, alpha)
    dl_emp = downlink.empirical_downlink_sinr(real, est, prec, pw, scen, config)
    dl_de = downlink.de_downlink_sinr(scen, pw, config, coeffs.b2, alpha)

    return {
        "scenario": scen, "powers": pw, "estimate": est, "alpha": alpha,
        "ul_emp": ul_emp, "ul_de": ul_de, "dl_emp": dl_emp, "dl_de": dl_de,
    }


def _trial_est_mse(config: SystemConfig, rng: np.random.Generator) -> dict:
    scen = build_scenario(config, rng)
    pw = power_control(scen, config)
    real = draw_channels(scen, config, rng)
    pilots = training.generate_pilots(config.K)
    s_pilot = training.pilot_radar_block(config, rng)
    rx = training.pilot_rx_block(real, scen, pw, pilots, s_pilot, config, rng)

    coeffs_k = training.lmmse_coefficients(scen, pw, config, sync_known=True)
    est_k = training.estimate_channels(rx, pilots, coeffs_k, radar_block=s_pilot,
                                       g_rb_hat=real.G_rb_hat)
    row_norms = np.sum(np.abs(real.G_rb_hat) ** 2, axis=1)
    coeffs_u = training.lmmse_coefficients(scen, pw, config, sync_known=False,
                                           g_hat_row_norms=row_norms)
    est_u = training.estimate_channels(rx, pilots, coeffs_u)

    return {
        "mse_known": float(np.mean(np.abs(real.H - est_k.h_hat) ** 2)),
        "mse_unknown": float(np.mean(np.abs(real.H - est_u.h_hat) ** 2)),
        "analytic_known": float(np.mean(coeffs_k.b2_bar)),
        "analytic_unknown": float(np.mean(coeffs_u.b2_bar)),
    }


def _trial_aoa_mse(config: SystemConfig, rng: np.random.Generator) -> dict:
    scen = build_scenario(config, rng)
    pw = power_control(scen, config)
    real = draw_channels(scen, config, rng)
    pilots = training.generate_pilots(config.K)
    manifold = radar.array_manifold(scen.theta, config.N_t, config.N_r)
    s_block = radar.radar_waveform(config.N_t, config.sigma_r2, rng)
    z = radar.simulate_radar_receive(
        manifold, scen, s_block, config, rng, mode="uplink-pilot",
        pilots=pilots, powers=pw, realization=real,
    )
    theta_hat, ok = radar.music_aoa(z, config.music_grid_deg, s_block=s_block)
    metrics = radar.crb("uplink", scen, pw, config, manifold=manifold)
    return {
        "aoa_sq_err": (theta_hat - scen.theta) ** 2,
        "crb": metrics.crb,
        "music_failed": 0.0 if ok else 1.0,
    }


def _trial_ul_rate(config: SystemConfig, rng: np.random.Generator) -> dict:
    out = run_comm_trial(config, rng)
    return {
        "rate_emp": float(np.mean(np.log2(1.0 + out["ul_emp"].gamma))),
        "rate_de": float(np.mean(out["ul_de"].rate)),
        "gamma_emp": float(np.mean(out["ul_emp"].gamma)),
        "gamma_de": float(np.mean(out["ul_de"].gamma)),
    }


def _trial_dl_rate(config: SystemConfig, rng: np.random.Generator) -> dict:
    out = run_comm_trial(config, rng)
    return {
        "rate_emp": float(np.mean(np.log2(1.0 + out["dl_emp"].gamma))),
        "rate_de": float(np.mean(out["dl_de"].rate)),
        "gamma_emp": float(np.mean(out["dl_emp"].gamma)),
        "gamma_de": float(np.mean(out["dl_de"].gamma)),
    }


def _trial_ul_radar_rate(config: SystemConfig, rng: np.random.Generator) -> dict:
    scen = build_scenario(config, rng)
    pw = power_control(scen, config)
    metrics = radar.crb("uplink", scen, pw, config)
    return {"radar_rate": metrics.radar_rate, "crb": metrics.crb}


def _trial_dl_radar_rate(config: SystemConfig, rng: np.random.Generator) -> dict:
    scen = build_scenario(config, rng)
    pw = power_control(scen, config)
    coeffs = training.lmmse_coefficients(scen, pw, config, sync_known=True)
    alpha = config.alpha_dl or downlink.default_alpha(scen, pw, config)
    noise = downlink.de_radar_noise_power(scen, pw, config, coeffs.b2, alpha)
    metrics = radar.crb("downlink", scen, pw, config, dl_noise_power=noise)
    return {"radar_rate": metrics.radar_rate, "crb": metrics.crb,
            "sigma2_wr_d": noise}


_TRIAL_FN = {
    "est-mse": _trial_est_mse,
    "aoa-mse": _trial_aoa_mse,
    "ul-rate": _trial_ul_rate,
    "dl-rate": _trial_dl_rate,
    "ul-radar-rate": _trial_ul_radar_rate,
    "dl-radar-rate": _trial_dl_radar_rate,
}


# --------------------------------------------------------------------------
# Curves
# --------------------------------------------------------------------------

def _format_csv(header: list[str], rows: list[list[float]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(f"{v:.10g}" for v in row) + "\n")
    return buf.getvalue()


def run_curve(config: SystemConfig, spec: CurveSpec) -> CurveResult:
    """Sweep one variable, averaging the kind's metrics at each grid point."""
    spec = spec.resolved(config)
    trial_fn = _TRIAL_FN[spec.kind]
    primary = PRIMARY_METRIC[spec.kind]
    t_start = time.time()

    points = []
    total_failures = 0
    for idx, x in enumerate(spec.grid):
        cfg_x = apply_sweep(config, spec.kind, spec.sweep, x)
        results, failures = _run_point(
            trial_fn, cfg_x, spec.trials, spec.seed, idx, spec.threads)
        total_failures += failures
        stats = _aggregate(results)
        point = {"x": x, "trials": spec.trials, "failures": failures}
        for key, (mean, stderr) in stats.items():
            point[key] = mean
            point[f"{key}_stderr"] = stderr
        points.append(point)

    extra_keys = [k for k in points[0]
                  if k not in ("x", "trials", "failures", primary, f"{primary}_stderr")
                  and not k.endswith("_stderr")]
    header = ["x", "mean", "stderr", "trials", "failures"] + extra_keys
    rows = []
    for p in points:
        row = [p["x"], p.get(primary, float("nan")),
               p.get(f"{primary}_stderr", float("nan")),
               p["trials"], p["failures"]]
        row += [p.get(k, float("nan")) for k in extra_keys]
        rows.append(row)

    manifest = {
        "kind": spec.kind,
        "version": __version__,
        "sweep": spec.sweep,
        "grid": list(spec.grid),
        "trials": spec.trials,
        "seed": spec.seed,
        "threads": spec.threads,
        "config": config.as_dict(),
        "failures": total_failures,
        "wall_time_s": round(time.time() - t_start, 3),
        "primary_metric": primary,
    }
    return CurveResult(kind=spec.kind, points=points,
                       csv=_format_csv(header, rows),
                       manifest=manifest, failures=total_failures)


# --------------------------------------------------------------------------
# DE validation report
# --------------------------------------------------------------------------

def _relative_errors(emp_means: dict, de_means: dict) -> dict:
    report = {}
    for key, de_val in de_means.items():
        emp_val = emp_means[key]
        if de_val == 0.0 and emp_val == 0.0:
            report[key] = 0.0
        elif de_val == 0.0:
            report[key] = float("inf")
        else:
            report[key] = abs(emp_val - de_val) / abs(de_val)
    return report


def validate_de(
    config: SystemConfig,
    trials: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    gamma_threshold: float = 0.10,
    term_threshold: float = 0.10,
) -> dict:
    """Run both pipelines on identical drops; report per-term relative errors.

    Empirical and analytic SINR terms are averaged over the same trials and
    compared term by term. A term is flagged when its relative error exceeds
    the threshold *and* it carries at least 1% of the interference-plus-noise
    power: negligible terms have arbitrarily large relative Monte Carlo noise
    without influencing the SINR. Solver failures are counted, never hidden.
    """
    trials = trials if trials is not None else config.trials
    seed = seed if seed is not None else config.seed
    t_start = time.time()

    def trial(cfg, rng):
        out = run_comm_trial(cfg, rng)
        rec = {}
        for side in ("ul", "dl"):
            emp, de = out[f"{side}_emp"], out[f"{side}_de"]
            rec[f"{side}_gamma_emp"] = float(np.mean(emp.gamma))
            rec[f"{side}_gamma_de"] = float(np.mean(de.gamma))
            rec[f"{side}_rate_emp"] = float(np.mean(np.log2(1.0 + emp.gamma)))
            rec[f"{side}_rate_de"] = float(np.mean(de.rate))
            for term, vals in emp.zeta.items():
                rec[f"{side}_zeta_{term}_emp"] = float(np.mean(vals))
            for term, vals in de.zeta.items():
                rec[f"{side}_zeta_{term}_de"] = float(np.mean(vals))
        return rec

    results, failures = _run_point(trial, config, trials, seed, 0, threads)
    stats = _aggregate(results)
    means = {k: v[0] for k, v in stats.items()}
    errs = {k: v[1] for k, v in stats.items()}

    report = {"trials": trials, "seed": seed, "failures": failures,
              "config": config.as_dict(), "links": {}, "flags": []}
    for side, terms in (("ul", uplink.ZETA_TERMS), ("dl", downlink.ZETA_TERMS)):
        link = {
            "gamma_emp": means[f"{side}_gamma_emp"],
            "gamma_de": means[f"{side}_gamma_de"],
            "rate_emp": means[f"{side}_rate_emp"],
            "rate_de": means[f"{side}_rate_de"],
        }
        emp_terms = {t: means[f"{side}_zeta_{t}_emp"] for t in terms}
        de_terms = {t: means[f"{side}_zeta_{t}_de"] for t in terms}
        link["zeta_emp"] = emp_terms
        link["zeta_de"] = de_terms
        link["zeta_rel_err"] = _relative_errors(emp_terms, de_terms)
        link["gamma_rel_err"] = _relative_errors(
            {"g": link["gamma_emp"]}, {"g": link["gamma_de"]})["g"]
        link["rate_rel_err"] = _relative_errors(
            {"r": link["rate_emp"]}, {"r": link["rate_de"]})["r"]
        if link["gamma_rel_err"] > gamma_threshold:
            report["flags"].append(f"{side}_gamma")
        denom = sum(v for t, v in de_terms.items() if t != "signal")
        for term, err in link["zeta_rel_err"].items():
            if err <= term_threshold or de_terms[term] == 0:
                continue
            # a flag needs both a significant share of the interference
            # budget and a gap the Monte Carlo noise cannot explain
            matters = de_terms[term] > 0.01 * denom or term == "signal"
            gap = abs(emp_terms[term] - de_terms[term])
            beyond_noise = gap > 3.0 * errs[f"{side}_zeta_{term}_emp"]
            if matters and beyond_noise:
                report["flags"].append(f"{side}_zeta_{term}")
        report["links"][side] = link
    report["wall_time_s"] = round(time.time() - t_start, 3)
    report["passed"] = not report["flags"] and failures == 0
    return report


# --------------------------------------------------------------------------
# Rate region
# --------------------------------------------------------------------------

DEFAULT_RADAR_GRID = tuple(np.logspace(-2.0, 2.0, 8))
DEFAULT_COMM_GRID = tuple(np.logspace(-1.5, 1.5, 8))


@dataclass(frozen=True)
class RateRegionResult:
    mode: str
    points: list[dict]          # all knob combinations
    frontier: list[dict]        # Pareto-dominant subset, sorted by r_comm
    chord: list[dict]           # the two time-sharing endpoints
    csv: str
    manifest: dict
    failures: int


def _region_trial(config, rng, mode, radar_grid, comm_grid):
    """Analytic rates at every knob for one geometry drop.

    The target's reflection coefficient is fixed by the base configuration,
    so scaling the radar transmit power moves the echo SNR and the
    interference together; comm multipliers scale every user energy.
    """
    scen = build_scenario(config, rng)
    manifold = radar.array_manifold(scen.theta, config.N_t, config.N_r)
    h_rr_abs2 = abs(scen.h_rr) ** 2
    need_g = mode == "uplink" and config.sigma_r2 > 0
    g_rb_hat = draw_channels(scen, config, rng).G_rb_hat if need_g else None

    r_comm = np.zeros((len(radar_grid), len(comm_grid)))
    r_radar = np.zeros_like(r_comm)
    base_pw = power_control(scen, config)
    for ib, b in enumerate(comm_grid):
        pw = base_pw.scaled(b)
        for ia, a in enumerate(radar_grid):
            cfg_a = config.replace(sigma_r2=config.sigma_r2 * a)
            coeffs = training.lmmse_coefficients(scen, pw, cfg_a, sync_known=True)
            if mode == "uplink":
                de = uplink.de_uplink_sinr(scen, pw, cfg_a, g_rb_hat, coeffs.b2)
                sigma2_eff = radar.uplink_effective_noise(scen, pw, cfg_a)
            else:
                alpha = cfg_a.alpha_dl or downlink.default_alpha(scen, pw, cfg_a)
                de = downlink.de_downlink_sinr(scen, pw, cfg_a, coeffs.b2, alpha)
                sigma2_eff = downlink.de_radar_noise_power(
                    scen, pw, cfg_a, coeffs.b2, alpha)
            r_comm[ia, ib] = float(np.mean(de.rate))
            bound = radar.crb_theta(manifold, cfg_a.sigma_r2, h_rr_abs2, sigma2_eff)
            r_radar[ia, ib] = radar.radar_rate(bound)
    return {"r_comm": r_comm, "r_radar": r_radar}


def _mc_rate_at_knob(config, mode, a, b, trials, seed, threads):
    """Monte Carlo spot-check of the mean rate at one knob combination."""
    cfg = config.replace(
        sigma_r2=config.sigma_r2 * a,
        eps_up_pilot=config.eps_up_pilot * b,
        eps_up_data=config.eps_up_data * b,
        eps_dn_data=config.eps_dn_data * b,
    )
    trial_fn = _trial_ul_rate if mode == "uplink" else _trial_dl_rate
    results, failures = _run_point(trial_fn, cfg, trials, seed, 9999, threads)
    stats = _aggregate(results)
    return stats.get("rate_emp", (float("nan"), 0.0))[0], failures


def rate_region(
    config: SystemConfig,
    mode: str = "uplink",
    radar_grid: tuple[float, ...] | None = None,
    comm_grid: tuple[float, ...] | None = None,
    trials: int | None = None,
    seed: int | None = None,
    threads: int = 1,
    mc_check_trials: int | None = None,
) -> RateRegionResult:
    """Achievable (communication rate, radar rate) pairs over a power grid.

    Interiors are evaluated with the deterministic equivalents averaged over
    geometry drops; the two axis-extreme vertices are spot-checked by Monte
    Carlo. Returns all points, the Pareto frontier and the time-sharing
    chord between the frontier's endpoints.
    """
    if mode not in ("uplink", "downlink"):
        raise ValueError(f"unknown mode '{mode}'")
    radar_grid = tuple(radar_grid or DEFAULT_RADAR_GRID)
    comm_grid = tuple(comm_grid or DEFAULT_COMM_GRID)
    trials = trials if trials is not None else config.trials
    seed = seed if seed is not None else config.seed
    t_start = time.time()

    def trial(cfg, rng):
        return _region_trial(cfg, rng, mode, radar_grid, comm_grid)

    results, failures = _run_point(trial, config, trials, seed, 0, threads)
    good = [r for r in results if r is not None]
    if not good:
        raise DeError("all rate-region trials failed")
    r_comm = np.mean([g["r_comm"] for g in good], axis=0)
    r_radar = np.mean([g["r_radar"] for g in good], axis=0)

    points = []
    for ia, a in enumerate(radar_grid):
        for ib, b in enumerate(comm_grid):
            points.append({
                "radar_mult": a, "comm_mult": b,
                "r_comm": float(r_comm[ia, ib]), "r_radar": float(r_radar[ia, ib]),
            })

    frontier = pareto_frontier(points)
    for p in points:
        p["on_frontier"] = p in frontier

    max_comm = max(frontier, key=lambda p: p["r_comm"])
    max_radar = max(frontier, key=lambda p: p["r_radar"])
    chord = [max_comm, max_radar]

    mc_checks = []
    if mc_check_trials is None:
        mc_check_trials = min(trials, 200)
    if mc_check_trials > 0:
        for vertex in (max_comm, max_radar):
            mc_rate, mc_fail = _mc_rate_at_knob(
                config, mode, vertex["radar_mult"], vertex["comm_mult"],
                mc_check_trials, seed, threads)
            mc_checks.append({
                "radar_mult": vertex["radar_mult"],
                "comm_mult": vertex["comm_mult"],
                "r_comm_de": vertex["r_comm"],
                "r_comm_mc": mc_rate,
                "failures": mc_fail,
            })

    header = ["radar_mult", "comm_mult", "r_comm", "r_radar", "on_frontier",
              "trials", "failures"]
    rows = [[p["radar_mult"], p["comm_mult"], p["r_comm"], p["r_radar"],
             1.0 if p["on_frontier"] else 0.0, trials, failures] for p in points]

    manifest = {
        "kind": "rate-region",
        "version": __version__,
        "mode": mode,
        "radar_grid": list(radar_grid),
        "comm_grid": list(comm_grid),
        "trials": trials,
        "seed": seed,
        "threads": threads,
        "config": config.as_dict(),
        "failures": failures,
        "mc_checks": mc_checks,
        "wall_time_s": round(time.time() - t_start, 3),
    }
    return RateRegionResult(
        mode=mode, points=points, frontier=frontier, chord=chord,
        csv=_format_csv(header, rows), manifest=manifest, failures=failures,
    )


def pareto_frontier(points: list[dict]) -> list[dict]:
    """Pareto-dominant subset, sorted by increasing communication rate."""
    ordered = sorted(points, key=lambda p: (-p["r_comm"], -p["r_radar"]))
    frontier = []
    best_radar = -np.inf
    for p in ordered:
        if p["r_radar"] > best_radar:
            frontier.append(p)
            best_radar = p["r_radar"]
    return sorted(frontier, key=lambda p: p["r_comm"])


def chord_value(chord: list[dict], r_comm: float) -> float:
    """Radar rate of the time-sharing segment at a given comm rate."""
    (p_comm, p_radar) = chord
    x0, y0 = p_comm["r_comm"], p_comm["r_radar"]
    x1, y1 = p_radar["r_comm"], p_radar["r_radar"]
    if x0 == x1:
        return min(y0, y1)
    t = (r_comm - x0) / (x1 - x0)
    return y0 + t * (y1 - y0)
