"""Large-deviation analysis of the click count.

theta(s) is the scaled cumulant generating function of the counted record:
the maximum real eigenvalue of the biased generator.  Its derivatives at
s = 0 give the asymptotic click rate R = -theta'(0) and the variance rate
theta''(0), from which the clock error is

    delta_tau(t) = sqrt(theta''(0) * t) / |theta'(0)|.

For the driven two-level atom theta(s) is also available in closed radical
form (the Cardano solution of the cubic characteristic polynomial of the
tilted generator); it serves as an independent oracle for the spectral
value.  Printed radical expressions are cube-root-branch ambiguous, so the
closed form is evaluated on all three branches and the real one with the
largest real part is returned.  The spectral value stays authoritative.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import lindblad
from .errors import InconsistencyError, BranchError, SpectralAnomalyError, ValidationError
from .linalg import max_real_eigenpair

_CBRT_UNITY = tuple(cmath.exp(2j * math.pi * k / 3) for k in range(3))
_THIRD_ROOT_3 = 3.0 ** (1.0 / 3.0)
_TWO_THIRDS_ROOT_3 = 3.0 ** (2.0 / 3.0)


@dataclass(frozen=True)
class CumulantEstimates:
    """First two scaled cumulants of the click count at one parameter point."""

    theta_at_zero: float
    rate: float
    variance_rate: float
    fano: float
    fd_step: float


def theta(model: lindblad.LindbladModel, s: float, imag_tol: float = 1e-10,
          gap_tol: float = 1e-9) -> float:
    """Maximum real eigenvalue of the biased generator at tilt s.

    The leading eigenvalue of these generators is real; an imaginary part
    beyond imag_tol raises SpectralAnomalyError.
    """
    lam, _, _ = max_real_eigenpair(lindblad.biased_liouvillian(model, s), gap_tol=gap_tol)
    if abs(lam.imag) > imag_tol:
        raise SpectralAnomalyError(
            f"leading eigenvalue {lam} has imaginary part beyond {imag_tol:.1e}"
        )
    return float(lam.real)


def theta_closed_form_tla(omega: float, gamma: float, s: float,
                          imag_tol: float = 1e-9) -> float:
    """Closed-form scaled CGF of the driven two-level atom.

    Evaluates, over all three cube-root branches,

        theta = ( -gamma + e^{-4s} C / 3^(2/3) + e^{4s} A / (3^(1/3) C) ) / 2
        A = gamma^2 - 16 omega^2
        B = 72 gamma omega^2 e^{11 s}
        C = cbrt( sqrt(B^2 - 3 e^{24 s} A^3) + B )

    and returns the branch with the largest real part among those whose
    imaginary residue is below imag_tol.
    """
    if not (omega > 0):
        raise ValidationError(f"omega must be > 0, got {omega}")
    if not (gamma > 0):
        raise ValidationError(f"gamma must be > 0, got {gamma}")
    a = gamma * gamma - 16.0 * omega * omega
    b = 72.0 * gamma * omega * omega * math.exp(11.0 * s)
    disc = complex(b * b - 3.0 * math.exp(24.0 * s) * a ** 3)
    c0 = (cmath.sqrt(disc) + b) ** (1.0 / 3.0)
    candidates = []
    for root in _CBRT_UNITY:
        c = c0 * root
        candidates.append(
            0.5 * (-gamma
                   + math.exp(-4.0 * s) * c / _TWO_THIRDS_ROOT_3
                   + math.exp(4.0 * s) * a / (_THIRD_ROOT_3 * c))
        )
    real = [t for t in candidates if abs(t.imag) <= imag_tol]
    if not real:
        raise BranchError(
            f"no real cube-root branch at omega={omega}, gamma={gamma}, s={s}; "
            f"candidates {candidates}",
            candidates=candidates,
        )
    return max(t.real for t in real)


def counting_cumulants(model: lindblad.LindbladModel, h: float = 1e-3,
                       rate_rel_tol: float = 1e-6) -> CumulantEstimates:
    """Rate and variance rate by Richardson-extrapolated central differences.

    The first derivative is cross-checked against the steady-state rate
    Tr(c^dag c rho_ss); disagreement beyond rate_rel_tol raises
    InconsistencyError carrying both values.
    """
    if not (h > 0):
        raise ValidationError(f"finite-difference step must be > 0, got {h}")
    if not model.counted_channels:
        raise ValidationError("counting statistics need at least one counted channel")

    t0 = theta(model, 0.0)
    if abs(t0) > 1e-9:
        raise InconsistencyError(
            f"theta(0) = {t0:.3e} is not zero; the generator violates normalization",
            values=(t0,),
        )
    tp, tm = theta(model, h), theta(model, -h)
    tp2, tm2 = theta(model, h / 2), theta(model, -h / 2)

    d_h = (tp - tm) / (2.0 * h)
    d_h2 = (tp2 - tm2) / h
    first = (4.0 * d_h2 - d_h) / 3.0

    s_h = (tp - 2.0 * t0 + tm) / (h * h)
    s_h2 = (tp2 - 2.0 * t0 + tm2) / (h * h / 4.0)
    second = (4.0 * s_h2 - s_h) / 3.0

    rate_fd = -first
    rate_ss = lindblad.counted_click_rate(model, lindblad.steady_state(model))
    if rate_ss > 0 and abs(rate_fd - rate_ss) / rate_ss > rate_rel_tol:
        raise InconsistencyError(
            f"rate from -theta'(0) = {rate_fd!r} disagrees with steady-state rate {rate_ss!r}",
            values=(rate_fd, rate_ss),
        )
    return CumulantEstimates(
        theta_at_zero=t0,
        rate=rate_fd,
        variance_rate=second,
        fano=second / rate_fd if rate_fd != 0 else math.inf,
        fd_step=h,
    )


def delta_tau(model: lindblad.LindbladModel, t: float, h: float = 1e-3) -> float:
    """Root-mean-square error of the clock readout after running time t."""
    if not (t > 0):
        raise ValidationError(f"duration must be > 0, got {t}")
    c = counting_cumulants(model, h)
    return math.sqrt(c.variance_rate * t) / abs(c.rate)


def n_statistics(model: lindblad.LindbladModel, t: float, h: float = 1e-3) -> tuple[float, float]:
    """Asymptotic mean and standard deviation of the click count at time t."""
    if t < 0:
        raise ValidationError(f"duration must be >= 0, got {t}")
    if t == 0:
        return 0.0, 0.0
    c = counting_cumulants(model, h)
    return c.rate * t, math.sqrt(c.variance_rate * t)


def raw_cumulant_diff(model: lindblad.LindbladModel, order: int, h: float = 1e-2) -> float:
    """Raw central finite difference of theta at s = 0 for order 3 or 4.

    No Richardson step and no error control; higher cumulants are exposed
    only as these raw stencils.
    """
    if order not in (3, 4):
        raise ValidationError("only orders 3 and 4 are available")
    th = [theta(model, k * h) for k in range(-2, 3)]
    if order == 3:
        return (th[4] - 2.0 * th[3] + 2.0 * th[1] - th[0]) / (2.0 * h ** 3)
    return (th[0] - 4.0 * th[1] + 6.0 * th[2] - 4.0 * th[3] + th[4]) / h ** 4


def refine_minimum(xs: np.ndarray, ys: np.ndarray) -> float:
    """Location of the minimum of sampled data, parabolically refined.

    Fits a parabola through the discrete minimum and its neighbours; falls
    back to the grid point at the boundary or for degenerate fits.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 1:
        raise ValidationError("refine_minimum needs matching non-empty samples")
    j = int(np.nanargmin(ys))
    if j == 0 or j == xs.size - 1:
        return float(xs[j])
    x0, x1, x2 = xs[j - 1], xs[j], xs[j + 1]
    y0, y1, y2 = ys[j - 1], ys[j], ys[j + 1]
    denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if denom == 0:
        return float(x1)
    vertex = x1 - 0.5 * ((x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)) / denom
    return float(min(max(vertex, x0), x2))


def sweep_delta_tau(omegas, gammas, t: float, eta: float = 1.0, h: float = 1e-3):
    """delta_tau over an (omega, gamma) grid.

    Returns (rows, minima): rows are dicts with keys omega, gamma, rate,
    theta2, delta_tau, error (error empty on success, message otherwise, the
    numeric fields then NaN); minima holds, per omega, the gamma minimizing
    delta_tau after parabolic refinement around the grid minimum.
    """
    omegas = np.asarray(omegas, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    rows = []
    minima = []
    for om in omegas:
        dts = np.full(gammas.size, np.nan)
        for j, ga in enumerate(gammas):
            row = {"omega": float(om), "gamma": float(ga), "rate": math.nan,
                   "theta2": math.nan, "delta_tau": math.nan, "error": ""}
            try:
                model = lindblad.build_two_level_model(lindblad.TwoLevelParams(om, ga, eta))
                c = counting_cumulants(model, h)
                row["rate"] = c.rate
                row["theta2"] = c.variance_rate
                row["delta_tau"] = math.sqrt(c.variance_rate * t) / abs(c.rate)
                dts[j] = row["delta_tau"]
            except Exception as exc:  # per-point failure must not kill the sweep
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
        if np.any(np.isfinite(dts)):
            gamma_min = refine_minimum(gammas, dts)
            minima.append({
                "omega": float(om),
                "gamma_min": gamma_min,
                "gamma_over_omega": gamma_min / float(om) if om != 0 else math.nan,
                "delta_tau_min": float(np.nanmin(dts)),
            })
    return rows, minima
