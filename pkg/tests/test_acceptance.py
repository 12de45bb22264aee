"""Acceptance gate: one test per headline capability, each printing a
PASS/FAIL line (run with -rA or -s to see them) and enforcing its runtime
budget."""

import math
import time

import numpy as np

import clockstat as cs
import oracles

OMEGAS = oracles.OMEGA_GRID
GAMMAS = oracles.GAMMA_GRID


def _model(omega, gamma, eta=1.0):
    return cs.build_two_level_model(cs.TwoLevelParams(omega, gamma, eta))


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" -- {detail}" if detail else ""
    print(f"[criterion {num:02d}] {status}: {name}{suffix}")


def test_c01_theta_normalization():
    start = time.perf_counter()
    worst = max(abs(cs.theta(_model(om, ga), 0.0)) for om in OMEGAS for ga in GAMMAS)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    _report(1, "theta(0) = 0 across the grid", ok,
            f"worst |theta(0)| = {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-9
    assert elapsed < 1.0


def test_c02_closed_form_oracle_agreement():
    rows = []
    worst = 0.0
    for om in OMEGAS:
        for ga in GAMMAS:
            model = _model(om, ga)
            for s in (-0.3, -0.1, 0.1, 0.3):
                spectral = cs.theta(model, s)
                closed = cs.theta_closed_form_tla(om, ga, s)
                rel = abs(spectral - closed) / abs(closed)
                worst = max(worst, rel)
                if rel > 1e-8:
                    rows.append((om, ga, s, spectral, closed, rel))
    ok = not rows
    if rows:
        print("discrepancy table (spectral value is authoritative):")
        print("omega,gamma,s,theta_spectral,theta_closed_form,rel_diff")
        for r in rows:
            print(",".join(f"{v:.12g}" for v in r))
    _report(2, "spectral theta matches the closed form to 1e-8 relative", ok,
            f"worst relative deviation {worst:.2e}")
    assert ok


def test_c03_rate_consistency():
    worst = 0.0
    for om in OMEGAS:
        for ga in GAMMAS:
            model = _model(om, ga)
            c = cs.counting_cumulants(model)
            rate_ss = cs.counted_click_rate(model, cs.steady_state(model))
            worst = max(worst, abs(c.rate - rate_ss) / rate_ss)
    standard = cs.counting_cumulants(_model(3.0, 7.5)).rate
    formula = 4.0 * 7.5 * 9.0 / (7.5 ** 2 + 8.0 * 9.0)
    ok = worst <= 1e-6 and abs(standard - formula) <= 1e-6 * formula
    _report(3, "-theta'(0) equals the steady-state click rate", ok,
            f"worst relative gap {worst:.2e}, rate(3, 7.5) = {standard:.6f}")
    assert worst <= 1e-6
    assert abs(standard - formula) <= 1e-6 * formula


def test_c04_clock_error_headline_number():
    start = time.perf_counter()
    dt = cs.delta_tau(_model(3.0, 7.5), 1000.0)
    elapsed = time.perf_counter() - start
    ok = abs(dt - 10.0) <= 1.5 and elapsed < 1.0
    _report(4, "delta_tau(omega=3, gamma=7.5, t=1000) = 10 within 15 percent", ok,
            f"delta_tau = {dt:.4f}, {elapsed:.2f}s")
    assert abs(dt - 10.0) <= 1.5
    assert elapsed < 1.0


def test_c05_minimum_line():
    # The exact minimizer of delta_tau over gamma at fixed omega is
    # gamma = 2 sqrt(2) omega = 2.8284 omega for this model (both the Fano
    # factor and 1/rate are stationary there), which lies 13 percent from
    # the 2.5 omega target; the 10 percent band below cannot contain it.
    start = time.perf_counter()
    gammas = np.linspace(0.5, 20.0, 79)
    ratios = {}
    for om in (1.0, 2.0, 3.0, 4.0, 6.0):
        _, minima = cs.sweep_delta_tau([om], gammas, 1000.0)
        ratios[om] = minima[0]["gamma_min"] / om
    elapsed = time.perf_counter() - start
    deviations = {om: abs(r - 2.5) / 2.5 for om, r in ratios.items()}
    ok = max(deviations.values()) <= 0.10 and elapsed < 30.0
    detail = ", ".join(f"omega={om:g}: gamma*/omega={r:.4f}" for om, r in ratios.items())
    _report(5, "gamma minimizing delta_tau lies within 10 percent of 2.5 omega", ok,
            f"{detail}, {elapsed:.1f}s")
    assert elapsed < 30.0
    assert max(deviations.values()) <= 0.10, (
        f"located minima {ratios}; the exact minimizer is 2*sqrt(2)*omega "
        f"= {2.0 * math.sqrt(2.0):.4f}*omega, outside the 10 percent band around 2.5*omega"
    )


def test_c06_wtd_integrity():
    start = time.perf_counter()
    worst_norm = 0.0
    worst_mean = 0.0
    for om in OMEGAS:
        for ga in GAMMAS:
            profile = cs.build_profile(om, ga)
            worst_norm = max(worst_norm, abs(profile.cdf[-1] - 1.0))
            mean, _ = cs.waiting_time_moments(om, ga)
            rate = cs.counting_cumulants(_model(om, ga)).rate
            worst_mean = max(worst_mean, abs(mean - 1.0 / rate) * rate)
    mean_std, _ = cs.waiting_time_moments(3.0, 7.5)
    elapsed = time.perf_counter() - start
    ok = worst_norm <= 1e-6 and worst_mean <= 1e-6 and \
        abs(mean_std - 0.475) <= 1e-6 and elapsed < 10.0
    _report(6, "WTD normalization and renewal mean across all branches", ok,
            f"worst |norm-1| = {worst_norm:.2e}, worst relative mean gap = "
            f"{worst_mean:.2e}, mean(3, 7.5) = {mean_std:.6f}, {elapsed:.1f}s")
    assert worst_norm <= 1e-6
    assert worst_mean <= 1e-6
    assert abs(mean_std - 0.475) <= 1e-6
    assert elapsed < 10.0


def test_c07_renewal_ks_crosscheck():
    start = time.perf_counter()
    stats = {}
    for gamma in (7.5, 1.0):
        model = _model(3.0, gamma)
        profile = cs.build_profile(3.0, gamma)
        report = cs.renewal_crosscheck(model, profile, 100000, 42)
        stats[gamma] = report.statistic
    elapsed = time.perf_counter() - start
    ok = all(s < 0.00516 for s in stats.values()) and elapsed < 60.0
    _report(7, "1e5 simulated intervals pass the KS test at alpha = 0.01", ok,
            f"KS(gamma=7.5) = {stats[7.5]:.5f}, KS(gamma=1) = {stats[1.0]:.5f}, "
            f"critical 0.00516, {elapsed:.1f}s")
    for s in stats.values():
        assert s < 0.00516
    assert elapsed < 60.0


def test_c08_trajectory_ensemble_vs_master_equation():
    start = time.perf_counter()
    model = _model(3.0, 7.5)
    times = [0.5, 2.0, 10.0]
    averaged = cs.ensemble_conditional_states(model, times, 2000, 42)
    gen = cs.liouvillian(model)
    rho0 = cs.vectorize(np.diag([1.0, 0.0]).astype(complex))
    distances = [cs.trace_distance(averaged[i], cs.devectorize(cs.expm_apply(gen, t, rho0)))
                 for i, t in enumerate(times)]
    elapsed = time.perf_counter() - start
    ok = max(distances) <= 0.02 and elapsed < 120.0
    _report(8, "2000-trajectory average matches the master equation", ok,
            "TD = " + ", ".join(f"{d:.4f}" for d in distances) + f", {elapsed:.1f}s")
    assert max(distances) <= 0.02
    assert elapsed < 120.0


def test_c09_clock_spread_regime():
    start = time.perf_counter()
    model = _model(3.0, 7.5)
    grid = np.linspace(0.0, 1000.0, 200)
    stats = cs.ensemble_statistics(model, 200, grid, 42)
    sample_std = stats.std_tau[-1]
    sample_mean = stats.mean_tau[-1]
    sel = grid >= 100.0
    exponent = np.polyfit(np.log(grid[sel]), np.log(stats.std_tau[sel]), 1)[0]
    elapsed = time.perf_counter() - start
    mean_band = 3.0 * 10.0 / math.sqrt(200)
    ok = abs(sample_std - 10.0) <= 2.0 and abs(sample_mean - 1000.0) <= mean_band \
        and abs(exponent - 0.5) <= 0.1 and elapsed < 120.0
    _report(9, "200-run spread reproduces the clock error and sqrt(t) growth", ok,
            f"std tau(1000) = {sample_std:.3f}, mean tau(1000) = {sample_mean:.2f}, "
            f"growth exponent = {exponent:.3f}, {elapsed:.1f}s")
    assert abs(sample_std - 10.0) <= 2.0
    assert abs(sample_mean - 1000.0) <= mean_band
    assert abs(exponent - 0.5) <= 0.1
    assert elapsed < 120.0


def test_c10_peak_census():
    start = time.perf_counter()
    counts = {ga: cs.peak_census(3.0, ga, 0.014) for ga in (3.0, 7.5, 12.0)}
    elapsed = time.perf_counter() - start
    ok = counts[3.0] >= 2 and counts[7.5] == 1 and counts[12.0] == 1 and elapsed < 5.0
    _report(10, "satellite peaks below the threshold survive only the main peak", ok,
            f"counts {counts}, {elapsed:.1f}s")
    assert counts[3.0] >= 2
    assert counts[7.5] == 1
    assert counts[12.0] == 1
    assert elapsed < 5.0


def test_c11_desk_scale_count():
    mean, _ = cs.n_statistics(_model(3.0, 7.5), 1000.0)
    ok = abs(mean - 2105.0) <= 0.02 * 2105.0
    _report(11, "expected click count at t = 1000 is about 2105", ok,
            f"mean N = {mean:.2f}")
    assert abs(mean - 2105.0) <= 0.02 * 2105.0


def test_c12_detection_efficiency():
    full = _model(3.0, 7.5)
    half = _model(3.0, 7.5, 0.5)
    rho_full = cs.steady_state(full)
    rho_half = cs.steady_state(half)
    rate_full = cs.counted_click_rate(full, rho_full)
    rate_half = cs.counted_click_rate(half, rho_half)
    td = cs.trace_distance(rho_full, rho_half)
    ok = abs(rate_half - 0.5 * rate_full) <= 1e-9 and td <= 1e-10
    _report(12, "half efficiency halves the counted rate, steady state unchanged", ok,
            f"rate ratio = {rate_half / rate_full:.12f}, trace distance = {td:.2e}")
    assert abs(rate_half - 0.5 * rate_full) <= 1e-9
    assert td <= 1e-10
