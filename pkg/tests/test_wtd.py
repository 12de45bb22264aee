import math

import numpy as np
import pytest

import clockstat as cs
import oracles
from clockstat.errors import InconsistencyError, ValidationError

GRID = [(om, ga) for om in oracles.OMEGA_GRID for ga in oracles.GAMMA_GRID]


def test_pdf_vanishes_at_origin():
    for om, ga in [(3.0, 7.5), (1.0, 4.0), (0.5, 20.0)]:
        assert cs.wtd_pdf(om, ga, 0.0) == 0.0


def test_pdf_degenerate_branch_closed_form():
    # gamma = 4 omega: the density is exactly g W^2 t^2 e^{-g t / 2}
    ts = np.linspace(0.0, 3.0, 301)
    w = cs.wtd_pdf(3.0, 12.0, ts)
    ref = 12.0 * 9.0 * ts * ts * np.exp(-6.0 * ts)
    assert np.allclose(w, ref, rtol=1e-13, atol=1e-300)


def test_pdf_oscillatory_zeros():
    omega, gamma = 3.0, 7.5
    b = math.sqrt(16.0 * omega ** 2 - gamma ** 2)
    w_max = cs.wtd_pdf(omega, gamma, 0.3824)
    for k in (1, 2, 3):
        t_k = 4.0 * math.pi * k / b
        assert cs.wtd_pdf(omega, gamma, t_k) < 1e-12 * w_max


def test_pdf_branch_continuity_across_degenerate_point():
    # straddle gamma = 4 omega with a perturbation small enough that the
    # genuine gamma dependence (d log w / dA ~ t^2/24) stays below 1e-9
    eps = 1e-10
    for t in (0.1, 1.0 / 3.0, 1.0):
        below = cs.wtd_pdf(3.0, 12.0 - eps, t)
        above = cs.wtd_pdf(3.0, 12.0 + eps, t)
        assert abs(above - below) <= 1e-9 * max(below, 1e-300)


def test_pdf_series_switch_continuity():
    # just below the series cutoff the power series must match the exact
    # branch formula evaluated directly
    omega, gamma = 3.0, 12.0000001
    a = gamma * gamma - 16.0 * omega * omega
    t = 0.999 * math.sqrt(1e-6 / a)
    assert abs(a) * t * t < 1e-6
    q = math.sqrt(a) / 4.0
    exact = gamma * omega * omega * math.exp(-gamma * t / 2.0) * (math.sinh(q * t) / q) ** 2
    assert abs(cs.wtd_pdf(omega, gamma, t) - exact) <= 1e-12 * exact


def test_pdf_rejects_negative_times():
    with pytest.raises(ValueError):
        cs.wtd_pdf(3.0, 7.5, -0.1)
    with pytest.raises(ValidationError):
        cs.wtd_pdf(0.0, 7.5, 1.0)


def test_pdf_nonnegative_on_grid():
    ts = np.linspace(0.0, 20.0, 5000)
    for om, ga in GRID:
        assert np.all(cs.wtd_pdf(om, ga, ts) >= 0.0)


@pytest.mark.parametrize("omega,gamma", GRID)
def test_profile_normalization_and_mean(omega, gamma):
    prof = cs.build_profile(omega, gamma)
    assert prof.cdf[0] == 0.0
    assert np.all(np.diff(prof.cdf) >= 0.0)
    assert prof.cdf[-1] >= 1.0 - 1e-10
    assert abs(prof.cdf[-1] - 1.0) <= 1e-6
    mean, var = cs.waiting_time_moments(omega, gamma)
    assert abs(mean - oracles.wtd_mean(omega, gamma)) <= 1e-6 * mean
    assert abs(var - oracles.wtd_variance(omega, gamma)) <= 1e-6 * var


def test_standard_point_moments():
    mean, var = cs.waiting_time_moments(3.0, 7.5)
    assert abs(mean - 0.475) < 1e-9
    assert abs(math.sqrt(var) - 0.242813371405558) < 1e-9
    # desk-scale sanity: the main peak has width of order one
    ts = np.linspace(0.0, 3.0, 30001)
    w = cs.wtd_pdf(3.0, 7.5, ts)
    half = w.max() / 2.0
    above = ts[w >= half]
    fwhm = above[-1] - above[0]
    assert 0.3 < fwhm < 3.0


@pytest.mark.parametrize("omega,gamma", GRID)
def test_renewal_identities_against_cumulants(omega, gamma):
    c = cs.counting_cumulants(cs.build_two_level_model(cs.TwoLevelParams(omega, gamma)))
    mean, var = cs.waiting_time_moments(omega, gamma)
    assert abs(mean - 1.0 / c.rate) <= 1e-6 * mean
    assert abs(c.fano - var / mean ** 2) <= 1e-4


def test_sampling_statistics(standard_profile):
    rng = np.random.default_rng(1)
    samples = cs.sample_waiting_times(standard_profile, 100000, rng)
    assert samples.min() >= 0.0
    assert samples.max() <= standard_profile.t_cut
    assert abs(samples.mean() - 0.475) <= 0.01
    samples.sort()
    assert cs.ks_distance(samples, standard_profile) < 0.00516


def test_single_sample_api(standard_profile):
    rng = np.random.default_rng(2)
    t = cs.sample_waiting_time(standard_profile, rng)
    assert 0.0 <= t <= standard_profile.t_cut


def test_ks_single_sample_at_median(standard_profile):
    d = cs.ks_distance(np.array([standard_profile.median()]), standard_profile)
    assert abs(d - 0.5) <= 1e-9


def test_ks_distinguishes_doubled_gamma(standard_profile):
    other = cs.build_profile(3.0, 15.0)
    # brute-force comparison of the two CDFs
    ts = np.linspace(0.0, standard_profile.t_cut, 200001)
    brute = np.abs(standard_profile.cdf_at(ts) - other.cdf_at(ts)).max()
    assert 0.10 < brute < 0.13
    rng = np.random.default_rng(3)
    samples = np.sort(cs.sample_waiting_times(other, 100000, rng))
    assert cs.ks_distance(samples, standard_profile) > 0.05


def test_ks_validation(standard_profile):
    with pytest.raises(ValueError):
        cs.ks_distance(np.array([]), standard_profile)
    with pytest.raises(ValidationError):
        cs.ks_distance(np.array([2.0, 1.0]), standard_profile)
    with pytest.raises(ValidationError):
        cs.ks_critical_value(1000, alpha=0.2)


def test_ks_critical_value_examples():
    assert abs(cs.ks_critical_value(100000, 0.01) - 0.00515) < 1e-4


@pytest.mark.parametrize("gamma", [7.5, 1.0])
def test_renewal_crosscheck(gamma, standard_profile):
    profile = standard_profile if gamma == 7.5 else cs.build_profile(3.0, gamma)
    model = cs.build_two_level_model(cs.TwoLevelParams(3.0, gamma))
    report = cs.renewal_crosscheck(model, profile, 20000, 42)
    assert report.passed
    assert report.statistic < report.critical_value
    assert abs(report.rate_empirical - report.rate_expected) <= report.rate_tolerance


def test_renewal_crosscheck_requires_full_detection(standard_profile):
    partial = cs.build_two_level_model(cs.TwoLevelParams(3.0, 7.5, 0.5))
    with pytest.raises(ValidationError):
        cs.renewal_crosscheck(partial, standard_profile, 1000, 0)


def test_renewal_crosscheck_detects_wrong_profile():
    model = cs.build_two_level_model(cs.TwoLevelParams(3.0, 7.5))
    wrong = cs.build_profile(3.0, 15.0)
    with pytest.raises(InconsistencyError):
        cs.renewal_crosscheck(model, wrong, 5000, 0)


@pytest.mark.parametrize("gamma,expected", [(3.0, 3), (7.5, 1), (12.0, 1), (16.0, 1), (1.0, 8)])
def test_peak_census(gamma, expected):
    assert cs.peak_census(3.0, gamma, 0.014) == expected


def test_find_peaks_structure():
    peaks = cs.find_peaks(3.0, 3.0, 0.014)
    assert len(peaks) == 3
    ts = [t for t, _ in peaks]
    ws = [w for _, w in peaks]
    assert all(ts[i] < ts[i + 1] for i in range(len(ts) - 1))
    assert all(w >= 0.014 for w in ws)
    assert ws[0] > ws[1] > ws[2]


def test_peak_census_validation():
    with pytest.raises(ValidationError):
        cs.peak_census(3.0, 7.5, 0.0)
