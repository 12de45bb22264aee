"""Waiting-time distribution of the driven two-level atom.

The density of the interval between consecutive clicks is

    w(omega, gamma, t) = gamma omega^2 e^{-gamma t / 2} K(A, t)^2,
    A = gamma^2 - 16 omega^2,

where K(x, t) = sinh(sqrt(x) t / 4) / (sqrt(x) / 4) continued analytically:
a sin branch for x < 0 (the oscillatory regime), K = t at x = 0, and a
power series around x t^2 = 0 to keep the branches continuous.  The
overdamped branch is evaluated with the e^{-gamma t / 4} factor folded into
the exponentials so sinh never overflows.

Each jump resets the atom to the ground state, so inter-click intervals are
i.i.d. draws of w and the click record is a renewal process; profiles built
here provide the numeric CDF for inverse sampling and Kolmogorov-Smirnov
tests against simulated trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lindblad, qjmc
from .errors import InconsistencyError, ValidationError
from .ldp import counting_cumulants
from .quadrature import cell_integrals

# |A| t^2 below this is evaluated by series; keeps the three branches continuous
_SERIES_CUT = 1e-6

# coefficient of 1/sqrt(n) in the Smirnov critical distance, by significance level
_KS_COEFF = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}


def _check_params(omega: float, gamma: float):
    if not (omega > 0):
        raise ValidationError(f"omega must be > 0, got {omega}")
    if not (gamma > 0):
        raise ValidationError(f"gamma must be > 0, got {gamma}")


def wtd_pdf(omega: float, gamma: float, t):
    """Waiting-time density; scalar or array in t, domain t >= 0."""
    _check_params(omega, gamma)
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("waiting times are non-negative")
    a = gamma * gamma - 16.0 * omega * omega
    quarter = 0.25 * gamma
    # y = K(a, t) * exp(-gamma t / 4); w = gamma omega^2 y^2
    y = np.empty_like(arr)
    series = np.abs(a) * arr * arr < _SERIES_CUT
    ts = arr[series]
    u = a * ts * ts
    y[series] = ts * (1.0 + u / 96.0 + u * u / 30720.0) * np.exp(-quarter * ts)
    rest = ~series
    tr = arr[rest]
    if tr.size:
        if a > 0:
            q = math.sqrt(a) / 4.0
            y[rest] = (np.exp((q - quarter) * tr) - np.exp(-(q + quarter) * tr)) / (2.0 * q)
        else:
            b = math.sqrt(-a) / 4.0
            y[rest] = np.sin(b * tr) * np.exp(-quarter * tr) / b
    w = gamma * omega * omega * y * y
    return float(w) if np.isscalar(t) or arr.ndim == 0 else w


def tail_cut(omega: float, gamma: float, eps: float = 1e-11) -> float:
    """Time beyond which the remaining WTD mass is provably below eps."""
    _check_params(omega, gamma)
    a = gamma * gamma - 16.0 * omega * omega
    cuts = []
    if a > 1e-8:
        # sinh bound: w <= gamma omega^2 e^{-(gamma - sqrt(A)) t / 2} * 4 / A
        nu = 0.5 * (gamma - math.sqrt(a))
        amp = 4.0 * gamma * omega * omega / a
        cuts.append(math.log(max(amp / (nu * eps), 2.0)) / nu)
    else:
        if a < -1e-8:
            # sin bound: w <= gamma omega^2 e^{-gamma t / 2} * 16 / |A|
            nu = 0.5 * gamma
            amp = 16.0 * gamma * omega * omega / (-a)
            cuts.append(math.log(max(amp / (nu * eps), 2.0)) / nu)
        # t^2 bound (|K| <= t holds only for A <= 0):
        # w <= gamma omega^2 (8/(gamma e))^2 e^{-gamma t / 4}
        nu = 0.25 * gamma
        amp = 2.0 * gamma * omega * omega * (8.0 / (gamma * math.e)) ** 2
        cuts.append(math.log(max(amp / (nu * eps), 2.0)) / nu)
    mean = (gamma * gamma + 8.0 * omega * omega) / (4.0 * gamma * omega * omega)
    return 1.05 * max(min(cuts), 10.0 * mean)


@dataclass(frozen=True)
class WtdProfile:
    """Numeric CDF table of the waiting-time density on [0, t_cut]."""

    omega: float
    gamma: float
    grid: np.ndarray
    cdf: np.ndarray
    t_cut: float

    def pdf(self, t):
        return wtd_pdf(self.omega, self.gamma, t)

    def cdf_at(self, t):
        """CDF by linear interpolation on the table (grid is dense enough
        that the interpolation error stays below the build tolerance)."""
        return np.interp(t, self.grid, self.cdf, left=0.0, right=self.cdf[-1])

    def median(self) -> float:
        return float(np.interp(0.5, self.cdf, self.grid))


def build_profile(omega: float, gamma: float, cdf_tol: float = 1e-11,
                  interp_tol: float = 1e-8, norm_tol: float = 1e-4) -> WtdProfile:
    """Tabulate the CDF by per-cell Simpson quadrature with interval halving.

    The grid pitch is chosen from a scan of |w'| so that linear interpolation
    of the CDF stays below interp_tol.  The total mass must come out as 1;
    a deviation beyond norm_tol means a branch or formula bug and raises.
    """
    t_cut = tail_cut(omega, gamma, eps=cdf_tol)
    scan = np.linspace(0.0, t_cut, 4001)
    w_scan = wtd_pdf(omega, gamma, scan)
    slope = np.abs(np.gradient(w_scan, scan)).max()
    pitch = math.sqrt(8.0 * interp_tol / max(slope, 1e-12))
    n_cells = int(np.clip(math.ceil(t_cut / pitch), 2048, 400_000))
    grid = np.linspace(0.0, t_cut, n_cells + 1)
    cells = cell_integrals(lambda ts: wtd_pdf(omega, gamma, ts), grid, tol=cdf_tol)
    cdf = np.concatenate(([0.0], np.cumsum(cells)))
    norm = cdf[-1]
    if abs(norm - 1.0) > norm_tol:
        raise InconsistencyError(
            f"WTD normalization {norm!r} deviates from 1 beyond {norm_tol:.1e} "
            f"at omega={omega}, gamma={gamma}",
            values=(norm,),
        )
    return WtdProfile(omega=omega, gamma=gamma, grid=grid, cdf=cdf, t_cut=t_cut)


def waiting_time_moments(omega: float, gamma: float, tol: float = 1e-10) -> tuple[float, float]:
    """Mean and variance of the waiting time by tolerance-driven quadrature."""
    t_cut = tail_cut(omega, gamma, eps=min(tol, 1e-11) / 10.0)
    grid = np.linspace(0.0, t_cut, 4097)
    mean = cell_integrals(lambda ts: ts * wtd_pdf(omega, gamma, ts), grid, tol=tol).sum()
    second = cell_integrals(lambda ts: ts * ts * wtd_pdf(omega, gamma, ts), grid, tol=tol).sum()
    return mean, second - mean * mean


def sample_waiting_times(profile: WtdProfile, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n waiting times by inverse-CDF table lookup with local interpolation."""
    if n < 1:
        raise ValidationError(f"need at least one sample, got {n}")
    u = rng.uniform(0.0, profile.cdf[-1], size=n)
    idx = np.searchsorted(profile.cdf, u, side="right")
    idx = np.clip(idx, 1, profile.cdf.size - 1)
    f_lo = profile.cdf[idx - 1]
    span = profile.cdf[idx] - f_lo
    frac = (u - f_lo) / span
    return profile.grid[idx - 1] + frac * (profile.grid[idx] - profile.grid[idx - 1])


def sample_waiting_time(profile: WtdProfile, rng: np.random.Generator) -> float:
    """Single inverse-CDF draw."""
    return float(sample_waiting_times(profile, 1, rng)[0])


def ks_distance(sorted_samples, profile: WtdProfile) -> float:
    """Two-sided Kolmogorov-Smirnov statistic of samples against the profile CDF."""
    x = np.asarray(sorted_samples, dtype=float)
    if x.size == 0:
        raise ValueError("KS distance needs at least one sample")
    if np.any(np.diff(x) < 0):
        raise ValidationError("samples must be sorted ascending")
    n = x.size
    f = profile.cdf_at(x)
    steps = np.arange(1, n + 1) / n
    return float(max((steps - f).max(), (f - (steps - 1.0 / n)).max()))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Smirnov asymptotic critical distance coeff(alpha) / sqrt(n)."""
    try:
        coeff = _KS_COEFF[alpha]
    except KeyError:
        raise ValidationError(f"unsupported significance level {alpha}; use one of {sorted(_KS_COEFF)}")
    return coeff / math.sqrt(n)


@dataclass(frozen=True)
class KsReport:
    """Outcome of the trajectory-vs-analytic waiting-time comparison."""

    n_samples: int
    statistic: float
    critical_value: float
    alpha: float
    rate_empirical: float
    rate_expected: float
    rate_tolerance: float
    passed: bool
    samples: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "ks_statistic": self.statistic,
            "ks_critical_value": self.critical_value,
            "alpha": self.alpha,
            "rate_empirical": self.rate_empirical,
            "rate_expected": self.rate_expected,
            "rate_tolerance": self.rate_tolerance,
            "passed": self.passed,
        }


def renewal_crosscheck(model: lindblad.LindbladModel, profile: WtdProfile,
                       n_samples: int, seed: int, alpha: float = 0.01,
                       t_max: float = 1000.0) -> KsReport:
    """Compare simulated inter-click intervals against the analytic WTD.

    Intervals are harvested from quantum-jump trajectories started in the
    ground state (the renewal state), so the interval from t = 0 to the
    first click is itself a waiting-time draw.  Both the KS test at level
    alpha and a 3-standard-error check of 1/mean(interval) against the
    spectral rate must pass; failure raises InconsistencyError.
    """
    if model.dim != 2 or any(not ch.counted for ch in model.channels):
        raise ValidationError("renewal cross-check expects the fully counted two-level model")
    if n_samples < 10:
        raise ValidationError("need at least 10 intervals")

    rate_expected = counting_cumulants(model).rate
    per_traj = max(rate_expected * t_max, 1.0)
    intervals = []
    collected = 0
    index = 0
    while collected < n_samples:
        traj = qjmc.simulate_trajectory(model, t_max, seed, traj_index=index)
        clicks = traj.click_times
        if clicks.size:
            gaps = np.diff(clicks, prepend=0.0)
            intervals.append(gaps)
            collected += gaps.size
        index += 1
        if index > 20 + 10 * n_samples / per_traj:
            raise InconsistencyError("trajectories produce too few clicks to harvest intervals")
    samples = np.concatenate(intervals)[:n_samples]
    samples.sort()

    stat = ks_distance(samples, profile)
    critical = ks_critical_value(n_samples, alpha)
    mean = float(samples.mean())
    rate_emp = 1.0 / mean
    # delta method: se(1/mean) = std / (sqrt(n) mean^2)
    rate_tol = float(3.0 * samples.std(ddof=1) / (math.sqrt(n_samples) * mean * mean))
    passed = bool(stat < critical and abs(rate_emp - rate_expected) <= rate_tol)
    report = KsReport(
        n_samples=n_samples, statistic=stat, critical_value=critical, alpha=alpha,
        rate_empirical=rate_emp, rate_expected=rate_expected, rate_tolerance=rate_tol,
        passed=passed, samples=samples,
    )
    if not passed:
        err = InconsistencyError(
            f"simulated intervals disagree with the analytic WTD: {report.as_dict()}",
            values=(stat, critical, rate_emp, rate_expected),
        )
        err.report = report
        raise err
    return report


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section maximization on a bracketing interval."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def find_peaks(omega: float, gamma: float, threshold: float) -> list[tuple[float, float]]:
    """Local maxima of the WTD with density at least threshold.

    Grid scan at step min(0.001, period / 40) followed by golden-section
    refinement of every strict local maximum.
    """
    _check_params(omega, gamma)
    if not (threshold > 0):
        raise ValidationError(f"threshold must be > 0, got {threshold}")
    t_cut = tail_cut(omega, gamma)
    a = gamma * gamma - 16.0 * omega * omega
    step = 1e-3
    if a < 0:
        period = math.pi / (math.sqrt(-a) / 4.0)
        step = min(step, period / 40.0)
    ts = np.arange(0.0, t_cut + step, step)
    w = wtd_pdf(omega, gamma, ts)
    interior = (w[1:-1] > w[:-2]) & (w[1:-1] > w[2:])
    peaks = []
    for i in np.nonzero(interior)[0] + 1:
        t_ref, w_ref = _golden_max(lambda t: wtd_pdf(omega, gamma, t), ts[i - 1], ts[i + 1])
        if w_ref >= threshold:
            peaks.append((t_ref, w_ref))
    return peaks


def peak_census(omega: float, gamma: float, threshold: float) -> int:
    """Number of local WTD maxima with density at least threshold."""
    return len(find_peaks(omega, gamma, threshold))
