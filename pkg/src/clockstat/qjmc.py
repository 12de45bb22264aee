"""Quantum-jump Monte Carlo unraveling with norm-tracking click detection.

Between jumps the unnormalized state evolves under exp(-i H_eff t) with
H_eff = H - (i/2) sum_k c_k^dag c_k over *all* channels, counted or not.
Click times are located by norm tracking: draw r ~ U(0, 1), scan the squared
norm of the unnormalized state in coarse steps of 0.01 / gamma_total until
it drops below r (the norm is monotone non-increasing for a time-independent
H_eff), then bisect the bracketing step down to 1e-10 / gamma_total.  The
jump channel is drawn with probability proportional to |c_k psi|^2; the
collapsed state is renormalized and only counted channels append the click
time to the record.  gamma_total is the largest eigenvalue of the total
decay operator sum_k c_k^dag c_k.

For dim = 2 the propagator uses the exact closed form of the 2x2 matrix
exponential (safe at the defective point gamma = 4 omega, exponentials
arranged so nothing overflows); general dimensions step a cached
matrix exponential with step capped at 0.1 / ||H_eff||.

Randomness: trajectory i of base seed s consumes the generator seeded with
the hash of (s, i) (numpy SeedSequence), drawing one uniform per interval
plus one per jump when several channels compete.  Identical (seed, index)
always reproduces the identical click record.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import ldp, lindblad
from .errors import ClockstatError, PropagatorError, ValidationError

COARSE_STEP_FACTOR = 0.01
BISECT_TOL_FACTOR = 1e-10
_NORM_INCREASE_TOL = 1e-9
_SERIES_CUT = 1e-4


@dataclass(frozen=True)
class Trajectory:
    """Ordered counted-click times of one realization."""

    click_times: np.ndarray
    t_max: float
    seed: int
    traj_index: int = 0
    model_id: str = ""


@dataclass(frozen=True)
class ClockSeries:
    """Clock readout tau(t) = N(t) / rate on a reference time grid."""

    grid: np.ndarray
    tau: np.ndarray


@dataclass(frozen=True)
class EnsembleStats:
    """Per-grid-point sample statistics of tau and N across trajectories."""

    grid: np.ndarray
    mean_tau: np.ndarray
    std_tau: np.ndarray
    mean_n: np.ndarray
    std_n: np.ndarray
    n_traj: int


class _TwoLevelPropagator:
    """Closed-form exp(K t) for K = -i H_eff on dim 2.

    K = mu I + N with traceless N and N^2 = (mu^2 - det K) I, so
    exp(K t) = e^{mu t} [cosh(Delta t) I + sinh(Delta t)/Delta * N].
    All exponents have non-positive real part once the e^{mu t} factor is
    folded in, so the evaluation never overflows; Delta -> 0 (the defective
    point) is handled by the power series of sinh(z)/z.

    The coarse squared-norm profile of the most recent interval state is
    cached: renewal models collapse to the same post-jump state (up to a
    global phase, which drops out of the profile coefficients), so the scan
    reduces to a binary search over precomputed values.
    """

    def __init__(self, model: lindblad.LindbladModel):
        k = -1j * model.effective_hamiltonian()
        self.mu = complex(0.5 * np.trace(k))
        self.n_op = k - self.mu * np.eye(2)
        self.delta = cmath.sqrt(self.mu * self.mu - complex(np.linalg.det(k)))
        self.mu_re = self.mu.real
        self.cache: _CoarseProfile | None = None

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        z = self.delta * t
        if abs(z) < _SERIES_CUT:
            ex = cmath.exp(self.mu * t)
            z2 = z * z
            a = ex * (1.0 + z2 / 2.0 + z2 * z2 / 24.0)
            b = ex * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
        else:
            ep = cmath.exp((self.mu + self.delta) * t)
            em = cmath.exp((self.mu - self.delta) * t)
            a = 0.5 * (ep + em)
            b = (ep - em) / (2.0 * self.delta)
        return a * psi + b * (self.n_op @ psi)

    def interval(self, psi: np.ndarray) -> "_TwoLevelInterval":
        npsi = self.n_op @ psi
        return _TwoLevelInterval(
            mu_re=self.mu_re,
            delta=self.delta,
            c1=np.vdot(psi, psi).real,
            c2=np.vdot(npsi, npsi).real,
            c3=complex(np.vdot(psi, npsi)),
        )


@dataclass
class _TwoLevelInterval:
    """Squared-norm profile of one no-jump interval, phase-invariant."""

    mu_re: float
    delta: complex
    c1: float
    c2: float
    c3: complex

    def close_to(self, other: "_TwoLevelInterval", tol: float = 1e-12) -> bool:
        return (abs(self.c1 - other.c1) <= tol
                and abs(self.c2 - other.c2) <= tol * max(1.0, abs(other.c2))
                and abs(self.c3 - other.c3) <= tol * max(1.0, abs(other.c3)))

    def norms(self, ts: np.ndarray) -> np.ndarray:
        z = self.delta * ts
        small = np.abs(z) < _SERIES_CUT
        a = np.empty(ts.shape, dtype=complex)
        b = np.empty(ts.shape, dtype=complex)
        if small.any():
            tt = ts[small]
            ex = np.exp(self.mu_re * tt)
            z2 = z[small] * z[small]
            a[small] = ex * (1.0 + z2 / 2.0 + z2 * z2 / 24.0)
            b[small] = ex * tt * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
        big = ~small
        if big.any():
            tt = ts[big]
            ep = np.exp((self.mu_re + self.delta) * tt)
            em = np.exp((self.mu_re - self.delta) * tt)
            a[big] = 0.5 * (ep + em)
            b[big] = (ep - em) / (2.0 * self.delta)
        return ((a * a.conj()).real * self.c1
                + (b * b.conj()).real * self.c2
                + 2.0 * (a.conj() * b * self.c3).real)

    def norm(self, t: float) -> float:
        z = self.delta * t
        if abs(z) < _SERIES_CUT:
            ex = math.exp(self.mu_re * t)
            z2 = z * z
            a = ex * (1.0 + z2 / 2.0 + z2 * z2 / 24.0)
            b = ex * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
        else:
            ep = cmath.exp((self.mu_re + self.delta) * t)
            em = cmath.exp((self.mu_re - self.delta) * t)
            a = 0.5 * (ep + em)
            b = (ep - em) / (2.0 * self.delta)
        return ((a * a.conjugate()).real * self.c1
                + (b * b.conjugate()).real * self.c2
                + 2.0 * (a.conjugate() * b * self.c3).real)

    def bisect(self, lo: float, hi: float, r: float, tol: float) -> float:
        # tight loop: locals bound once, exponentials stable by construction
        cexp = cmath.exp
        mu_re, delta, c1, c2, c3 = self.mu_re, self.delta, self.c1, self.c2, self.c3
        zp, zm = mu_re + delta, mu_re - delta
        abs_delta = abs(delta)
        while hi - lo > tol:
            t = 0.5 * (lo + hi)
            if abs_delta * t < _SERIES_CUT:
                ex = math.exp(mu_re * t)
                z2 = delta * delta * t * t
                a = ex * (1.0 + z2 / 2.0 + z2 * z2 / 24.0)
                b = ex * t * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
            else:
                ep, em = cexp(zp * t), cexp(zm * t)
                a = 0.5 * (ep + em)
                b = (ep - em) / (2.0 * delta)
            val = ((a * a.conjugate()).real * c1
                   + (b * b.conjugate()).real * c2
                   + 2.0 * (a.conjugate() * b * c3).real)
            if val < r:
                hi = t
            else:
                lo = t
        return 0.5 * (lo + hi)


class _CoarseProfile:
    """Monotone coarse-grid survival values, grown lazily and reused.

    norms[j] is the squared norm at offset (j + 1) * step from the interval
    start; neg_norms is its negation for searchsorted on a descending array.
    """

    _CHUNK0 = 256
    _CHUNK_MAX = 16384

    def __init__(self, iv: _TwoLevelInterval, step: float):
        self.iv = iv
        self.step = step
        self.norms = np.empty(0)
        self.neg_norms = np.empty(0)
        self.tail = iv.norm(0.0)
        self._chunk = self._CHUNK0

    def _extend(self, k_target: int) -> None:
        while self.norms.size < k_target:
            count = min(max(self._chunk, 1), k_target - self.norms.size)
            start = self.norms.size
            offs = (start + np.arange(1, count + 1)) * self.step
            vals = self.iv.norms(offs)
            if vals[0] > self.tail + _NORM_INCREASE_TOL or \
                    np.any(vals[1:] > vals[:-1] + _NORM_INCREASE_TOL):
                raise PropagatorError("state norm increased during no-jump evolution")
            self.norms = np.concatenate((self.norms, vals))
            self.neg_norms = np.concatenate((self.neg_norms, -vals))
            self.tail = float(vals[-1])
            self._chunk = min(self._chunk * 4, self._CHUNK_MAX)

    def find_crossing(self, r: float, horizon: float, bisect_tol: float) -> float | None:
        # full coarse steps inside the horizon, then the horizon endpoint
        k_in = int(horizon / self.step)
        k_have = self.norms.size
        while k_have < k_in and self.tail >= r:
            self._extend(min(k_in, k_have + self._chunk))
            k_have = self.norms.size
        limit = min(k_in, self.norms.size)
        j = int(np.searchsorted(self.neg_norms[:limit], -r, side="right"))
        if j < limit:
            lo = j * self.step
            hi = (j + 1) * self.step
        else:
            if k_in * self.step >= horizon or self.iv.norm(horizon) >= r:
                return None
            lo = k_in * self.step
            hi = horizon
        t_cross = self.iv.bisect(lo, hi, r, bisect_tol)
        return t_cross if t_cross < horizon else None


class _SteppingPropagator:
    """General-dimension no-jump propagator via the matrix exponential.

    The coarse scan advances a cached exp(K * step); bisection inside a
    bracket applies exp(K * dt) directly.
    """

    def __init__(self, model: lindblad.LindbladModel, step: float):
        self.k_op = -1j * model.effective_hamiltonian()
        self.step = step
        self.step_matrix = scipy.linalg.expm(self.k_op * step)

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return psi.copy()
        return scipy.linalg.expm(self.k_op * t) @ psi


def _pick_channel(weights: np.ndarray, rng: np.random.Generator) -> int:
    if weights.size == 1:
        return 0
    cum = np.cumsum(weights)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))


def _find_crossing_two_level(prop, psi, horizon, r, coarse_step, bisect_tol):
    iv = prop.interval(psi)
    cache = prop.cache
    if cache is None or cache.step != coarse_step or not iv.close_to(cache.iv):
        cache = _CoarseProfile(iv, coarse_step)
        prop.cache = cache
    return cache.find_crossing(r, horizon, bisect_tol)


def _find_crossing_stepping(prop, psi, horizon, r, bisect_tol):
    t_prev, n_prev = 0.0, float(np.vdot(psi, psi).real)
    psi_prev = psi
    t_now = 0.0
    while t_now < horizon:
        t_next = min(t_now + prop.step, horizon)
        psi_next = prop.step_matrix @ psi_prev if t_next - t_now == prop.step \
            else prop.propagate(psi_prev, t_next - t_now)
        n_next = float(np.vdot(psi_next, psi_next).real)
        if n_next > n_prev + _NORM_INCREASE_TOL:
            raise PropagatorError("state norm increased during no-jump evolution")
        if n_next < r:
            lo, hi = 0.0, t_next - t_prev
            base = psi_prev
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                n_mid = float(np.linalg.norm(prop.propagate(base, mid)) ** 2)
                if n_mid < r:
                    hi = mid
                else:
                    lo = mid
            t_cross = t_prev + 0.5 * (lo + hi)
            return t_cross if t_cross < horizon else None
        t_prev, n_prev, psi_prev = t_next, n_next, psi_next
        t_now = t_next
    return None


def _gamma_total(model: lindblad.LindbladModel) -> float:
    return float(np.linalg.eigvalsh(model.decay_operator()).max().real)


def _build_propagator(model: lindblad.LindbladModel, coarse_step: float):
    if model.dim == 2:
        return _TwoLevelPropagator(model)
    heff_norm = np.linalg.norm(model.effective_hamiltonian(), 2)
    step = min(coarse_step, 0.1 / heff_norm) if heff_norm > 0 else coarse_step
    return _SteppingPropagator(model, step)


def _initial_state(model: lindblad.LindbladModel, initial) -> np.ndarray:
    if initial is None:
        initial = 0
    if isinstance(initial, (int, np.integer)):
        if not (0 <= initial < model.dim):
            raise ValidationError(f"basis index {initial} outside dimension {model.dim}")
        psi = np.zeros(model.dim, dtype=complex)
        psi[initial] = 1.0
        return psi
    arr = np.asarray(initial, dtype=complex)
    if arr.ndim == 1:
        if arr.shape != (model.dim,):
            raise ValidationError(f"state length {arr.size} does not match dim {model.dim}")
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValidationError("initial state must be non-zero")
        return arr / norm
    if arr.shape == (model.dim, model.dim):
        evals, evecs = np.linalg.eigh(0.5 * (arr + arr.conj().T))
        if evals[-1] < 1.0 - 1e-10:
            raise ValidationError("initial density matrix must be pure")
        return evecs[:, -1]
    raise ValidationError(f"cannot interpret initial state of shape {arr.shape}")


def _run_trajectory(model, prop, t_max, rng, psi0, coarse_step, bisect_tol,
                    record_times=None, collect_postjump=False):
    """Engine shared by every public entry point.

    Returns (click_times, recorded_states, postjump_states); recorded_states
    are normalized conditional states at the requested absolute times.
    """
    channel_ops = [np.asarray(ch.operator, dtype=complex) for ch in model.channels]
    counted = [ch.counted for ch in model.channels]
    two_level = isinstance(prop, _TwoLevelPropagator)

    psi = psi0
    t_now = 0.0
    clicks: list[float] = []
    recorded: list[np.ndarray] = []
    postjump: list[np.ndarray] = []
    rec = np.asarray(record_times, dtype=float) if record_times is not None else np.empty(0)
    rec_i = 0

    while t_now < t_max:
        r = rng.random()
        horizon = t_max - t_now
        if two_level:
            t_cross = _find_crossing_two_level(prop, psi, horizon, r, coarse_step, bisect_tol)
        else:
            t_cross = _find_crossing_stepping(prop, psi, horizon, r, bisect_tol)
        limit = t_max if t_cross is None else t_now + t_cross
        while rec_i < rec.size and rec[rec_i] <= limit:
            state = prop.propagate(psi, rec[rec_i] - t_now)
            recorded.append(state / np.linalg.norm(state))
            rec_i += 1
        if t_cross is None:
            break
        t_jump = t_now + t_cross
        psi_c = prop.propagate(psi, t_cross)
        weights = np.array([np.linalg.norm(op @ psi_c) ** 2 for op in channel_ops])
        total = weights.sum()
        if total <= 0.0:
            raise ClockstatError(f"zero jump probability at crossing time {t_jump}")
        k = _pick_channel(weights, rng)
        psi = channel_ops[k] @ psi_c
        psi = psi / np.linalg.norm(psi)
        if counted[k]:
            clicks.append(t_jump)
        if collect_postjump:
            postjump.append(psi.copy())
        t_now = t_jump
    return clicks, recorded, postjump


def simulate_trajectory(model: lindblad.LindbladModel, t_max: float, seed: int,
                        initial=None, traj_index: int = 0, model_id: str = "",
                        coarse_step: float | None = None,
                        bisect_tol: float | None = None) -> Trajectory:
    """One quantum-jump realization; returns the counted click record.

    Deterministic given (seed, traj_index); the initial state defaults to
    the ground state, which is the post-jump renewal state of the two-level
    atom.
    """
    if not (t_max > 0):
        raise ValidationError(f"t_max must be > 0, got {t_max}")
    gamma_total = _gamma_total(model)
    if gamma_total <= 0:
        raise ValidationError("model has no dissipation; no clicks can occur")
    if coarse_step is None:
        coarse_step = COARSE_STEP_FACTOR / gamma_total
    if bisect_tol is None:
        bisect_tol = BISECT_TOL_FACTOR / gamma_total
    rng = np.random.default_rng([seed, traj_index])
    prop = _build_propagator(model, coarse_step)
    psi0 = _initial_state(model, initial)
    clicks, _, _ = _run_trajectory(model, prop, t_max, rng, psi0, coarse_step, bisect_tol)
    return Trajectory(
        click_times=np.asarray(clicks, dtype=float),
        t_max=t_max, seed=seed, traj_index=traj_index, model_id=model_id,
    )


def clock_readout(traj: Trajectory, rate: float, grid) -> ClockSeries:
    """Clock readout tau(t) = (number of clicks <= t) / rate on a grid."""
    if not (rate > 0):
        raise ValidationError(f"rate must be > 0, got {rate}")
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid.min() < 0 or grid.max() > traj.t_max):
        raise ValueError("grid must lie within [0, t_max]")
    counts = np.searchsorted(traj.click_times, grid, side="right")
    return ClockSeries(grid=grid, tau=counts / rate)


def _max_workers() -> int:
    raw = os.environ.get("CLOCKSTAT_THREADS", "")
    try:
        return max(int(raw), 1)
    except ValueError:
        return 1


def _traj_payload(args):
    model, t_max, seed, index, initial = args
    traj = simulate_trajectory(model, t_max, seed, initial=initial, traj_index=index)
    return index, traj


def trajectory_ensemble(model: lindblad.LindbladModel, n_traj: int, t_max: float,
                        seed: int, initial=None) -> list[Trajectory]:
    """Independent reproducible trajectories, optionally run in parallel.

    CLOCKSTAT_THREADS > 1 distributes trajectories over worker processes;
    results are keyed by index, so the output is identical either way.
    """
    if n_traj < 1:
        raise ValidationError(f"need at least one trajectory, got {n_traj}")
    payloads = [(model, t_max, seed, i, initial) for i in range(n_traj)]
    workers = min(_max_workers(), n_traj)
    out: list[Trajectory | None] = [None] * n_traj
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, traj in pool.map(_traj_payload, payloads,
                                        chunksize=max(1, n_traj // (4 * workers))):
                out[index] = traj
    else:
        for payload in payloads:
            index, traj = _traj_payload(payload)
            out[index] = traj
    return out  # type: ignore[return-value]


def ensemble_statistics_from(trajectories: list[Trajectory], grid, rate: float) -> EnsembleStats:
    """Sample mean and unbiased std of tau and N for existing trajectories."""
    if len(trajectories) < 2:
        raise ValidationError(f"ensemble statistics need >= 2 trajectories, got {len(trajectories)}")
    if not (rate > 0):
        raise ValidationError(f"rate must be > 0, got {rate}")
    grid = np.asarray(grid, dtype=float)
    if grid.size < 1 or np.any(np.diff(grid) < 0) or grid.min() < 0:
        raise ValidationError("grid must be ascending and non-negative")
    counts = np.vstack([
        np.searchsorted(traj.click_times, grid, side="right") for traj in trajectories
    ]).astype(float)
    taus = counts / rate
    return EnsembleStats(
        grid=grid,
        mean_tau=taus.mean(axis=0),
        std_tau=taus.std(axis=0, ddof=1),
        mean_n=counts.mean(axis=0),
        std_n=counts.std(axis=0, ddof=1),
        n_traj=len(trajectories),
    )


def ensemble_statistics(model: lindblad.LindbladModel, n_traj: int, grid,
                        seed: int, initial=None) -> EnsembleStats:
    """Sample mean and unbiased std of tau and N across a fresh ensemble."""
    if n_traj < 2:
        raise ValidationError(f"ensemble statistics need n_traj >= 2, got {n_traj}")
    grid = np.asarray(grid, dtype=float)
    rate = ldp.counting_cumulants(model).rate
    t_max = float(grid.max())
    trajectories = trajectory_ensemble(model, n_traj, t_max, seed, initial)
    return ensemble_statistics_from(trajectories, grid, rate)


def _states_payload(args):
    model, times, seed, index, initial, coarse_step, bisect_tol = args
    rng = np.random.default_rng([seed, index])
    prop = _build_propagator(model, coarse_step)
    psi0 = _initial_state(model, initial)
    _, states, _ = _run_trajectory(model, prop, float(times[-1]), rng, psi0,
                                   coarse_step, bisect_tol, record_times=times)
    return index, np.asarray(states)


def ensemble_conditional_states(model: lindblad.LindbladModel, times, n_traj: int,
                                seed: int, initial=None) -> np.ndarray:
    """Ensemble-averaged conditional projectors at the requested times.

    Returns an array of shape (len(times), dim, dim): the average of
    |psi_c(t)><psi_c(t)| over n_traj independent trajectories, which should
    reproduce the unconditioned master-equation state up to sampling error.
    """
    times = np.sort(np.asarray(times, dtype=float))
    if times.size < 1 or times[0] < 0 or times[-1] <= 0:
        raise ValidationError("need positive recording times")
    if n_traj < 1:
        raise ValidationError(f"need at least one trajectory, got {n_traj}")
    gamma_total = _gamma_total(model)
    coarse_step = COARSE_STEP_FACTOR / gamma_total
    bisect_tol = BISECT_TOL_FACTOR / gamma_total
    payloads = [(model, times, seed, i, initial, coarse_step, bisect_tol)
                for i in range(n_traj)]
    accum = np.zeros((times.size, model.dim, model.dim), dtype=complex)
    workers = min(_max_workers(), n_traj)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for _, states in pool.map(_states_payload, payloads,
                                      chunksize=max(1, n_traj // (4 * workers))):
                accum += np.einsum("ti,tj->tij", states, states.conj())
    else:
        for payload in payloads:
            _, states = _states_payload(payload)
            accum += np.einsum("ti,tj->tij", states, states.conj())
    return accum / n_traj
