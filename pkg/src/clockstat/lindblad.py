"""Markovian model description and GKSL superoperator assembly.

Vectorization is column-stacking throughout, vec(X) = X.flatten(order="F"),
for which vec(A X B) = (B^T kron A) vec(X).  The generator acting on
vectorized density matrices is

    L = -i (I kron H  -  H^T kron I)
        + sum_k [ cbar_k kron c_k
                  - (I kron c_k^dag c_k + (c_k^dag c_k)^T kron I) / 2 ]

where cbar is the complex conjugate (not the adjoint) of the jump operator.
The biased generator multiplies the recycling term cbar_k kron c_k of every
*counted* channel by exp(-s) and leaves uncounted channels untouched.

The driven two-level atom uses basis order (|g>, |e>), so sigma_minus is
|g><e| and the drive Hamiltonian is  H = omega * (sigma_plus + sigma_minus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import SteadyStateError, DegeneracyError, ValidationError

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(m, dtype=complex).flatten(order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of vectorize; the length must be a perfect square."""
    v = np.asarray(v, dtype=complex)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ValidationError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((d, d), order="F")


@dataclass(frozen=True)
class JumpChannel:
    """A single decay channel; the rate is absorbed into the operator."""

    operator: np.ndarray
    counted: bool = True


@dataclass(frozen=True)
class TwoLevelParams:
    """Drive amplitude, decay rate, and detection efficiency of the atom."""

    omega: float
    gamma: float
    eta: float = 1.0

    def __post_init__(self):
        if not (self.omega >= 0):
            raise ValidationError(f"omega must be >= 0, got {self.omega}")
        if not (self.gamma > 0):
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if not (0 < self.eta <= 1):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus jump channels on a dim-dimensional Hilbert space."""

    dim: int
    hamiltonian: np.ndarray
    channels: tuple[JumpChannel, ...]
    hermiticity_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        h = linalg.as_complex_matrix(self.hamiltonian)
        if h.shape != (self.dim, self.dim):
            raise ValidationError(f"hamiltonian shape {h.shape} does not match dim {self.dim}")
        hnorm = np.linalg.norm(h)
        if np.linalg.norm(h - h.conj().T) > self.hermiticity_tol * max(hnorm, 1e-300) and hnorm > 0:
            raise ValidationError("hamiltonian is not Hermitian within tolerance")
        if len(self.channels) < 1:
            raise ValidationError("model needs at least one jump channel")
        for ch in self.channels:
            op = linalg.as_complex_matrix(ch.operator)
            if op.shape != (self.dim, self.dim):
                raise ValidationError(f"channel operator shape {op.shape} does not match dim {self.dim}")

    @property
    def counted_channels(self) -> tuple[JumpChannel, ...]:
        return tuple(ch for ch in self.channels if ch.counted)

    def decay_operator(self) -> np.ndarray:
        """Total decay operator sum_k c_k^dag c_k (all channels)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for ch in self.channels:
            out += ch.operator.conj().T @ ch.operator
        return out

    def effective_hamiltonian(self) -> np.ndarray:
        """Non-Hermitian no-jump generator H - (i/2) sum_k c_k^dag c_k."""
        return np.asarray(self.hamiltonian, dtype=complex) - 0.5j * self.decay_operator()


def build_two_level_model(params: TwoLevelParams) -> LindbladModel:
    """Resonantly driven two-level atom decaying with rate gamma.

    The counted channel is sqrt(eta * gamma) * sigma_minus; for eta < 1 an
    uncounted channel sqrt((1 - eta) * gamma) * sigma_minus models the
    undetected fraction of the emission.
    """
    h = params.omega * (SIGMA_PLUS + SIGMA_MINUS)
    channels = [JumpChannel(math.sqrt(params.eta * params.gamma) * SIGMA_MINUS, counted=True)]
    if params.eta < 1:
        channels.append(
            JumpChannel(math.sqrt((1.0 - params.eta) * params.gamma) * SIGMA_MINUS, counted=False)
        )
    return LindbladModel(dim=2, hamiltonian=h, channels=tuple(channels))


def _generator(model: LindbladModel, s: float) -> np.ndarray:
    d = model.dim
    ident = np.eye(d)
    h = np.asarray(model.hamiltonian, dtype=complex)
    gen = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    for ch in model.channels:
        c = np.asarray(ch.operator, dtype=complex)
        cdc = c.conj().T @ c
        weight = np.exp(-s) if ch.counted else 1.0
        gen += weight * np.kron(c.conj(), c)
        gen -= 0.5 * (np.kron(ident, cdc) + np.kron(cdc.T, ident))
    return gen


def liouvillian(model: LindbladModel) -> np.ndarray:
    """GKSL generator as a dim^2 x dim^2 matrix on vectorized density matrices."""
    return _generator(model, 0.0)


def biased_liouvillian(model: LindbladModel, s: float) -> np.ndarray:
    """Tilted generator: counted recycling terms carry a factor exp(-s).

    s = 0 reproduces liouvillian() bit-for-bit; s = +inf drops the counted
    recycling terms entirely, leaving the no-jump generator of the counted
    record.
    """
    return _generator(model, s)


def steady_state(model: LindbladModel, gap_tol: float = 1e-9, residual_tol: float = 1e-10) -> np.ndarray:
    """Unique stationary density matrix of the GKSL generator.

    The right null vector of the Liouvillian is devectorized, Hermitian
    symmetrized, and trace normalized.  A second eigenvalue within gap_tol
    of zero raises SteadyStateError.
    """
    gen = liouvillian(model)
    try:
        lam, right, _ = linalg.max_real_eigenpair(gen, gap_tol=gap_tol)
    except DegeneracyError as exc:
        raise SteadyStateError(f"steady state is not unique: {exc}") from exc
    rho = devectorize(right)
    trace = np.trace(rho)
    if abs(trace) < 1e-12:
        raise SteadyStateError("null vector of the generator is traceless; no steady state")
    rho = rho / trace
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    resid = np.linalg.norm(gen @ vectorize(rho))
    if resid > residual_tol:
        raise SteadyStateError(f"steady-state residual {resid:.3e} exceeds {residual_tol:.1e}")
    return rho


def counted_click_rate(model: LindbladModel, rho: np.ndarray) -> float:
    """Stationary click rate sum_k Tr(c_k^dag c_k rho) over counted channels."""
    rho = linalg.as_complex_matrix(rho)
    if rho.shape != (model.dim, model.dim):
        raise ValidationError(f"state shape {rho.shape} does not match model dim {model.dim}")
    rate = 0.0
    for ch in model.counted_channels:
        c = ch.operator
        rate += np.trace(c.conj().T @ c @ rho).real
    return rate


def validate_density_matrix(rho: np.ndarray, herm_tol: float = 1e-10,
                            trace_tol: float = 1e-10, eig_tol: float = 1e-10) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity; returns rho unchanged."""
    rho = linalg.as_complex_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValidationError("density matrix must be square")
    if np.linalg.norm(rho - rho.conj().T) > herm_tol:
        raise ValidationError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ValidationError(f"density matrix trace {np.trace(rho).real} is not 1")
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if evals.min() < -eig_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {evals.min():.3e}")
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the difference of two Hermitian matrices."""
    diff = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum()


def _matrix_from_pairs(pairs, dim: int, what: str) -> np.ndarray:
    flat = np.asarray(pairs, dtype=float)
    if flat.shape != (dim * dim, 2):
        raise ValidationError(
            f"{what} must be a list of {dim * dim} [re, im] pairs in row-major order, got shape {flat.shape}"
        )
    return (flat[:, 0] + 1j * flat[:, 1]).reshape(dim, dim)


def _matrix_to_pairs(m: np.ndarray) -> list:
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def model_from_json(doc: dict) -> LindbladModel:
    """Build a model from its JSON document.

    Either the shorthand {"tla": {"omega": x, "gamma": y, "eta": z}} or the
    explicit form {"dim": d, "hamiltonian": [[re, im], ...],
    "channels": [{"operator": [[re, im], ...], "counted": bool}, ...]} with
    matrices given as flat row-major lists of [re, im] pairs.
    """
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")
    if "tla" in doc:
        tla = doc["tla"]
        try:
            params = TwoLevelParams(
                omega=float(tla["omega"]),
                gamma=float(tla["gamma"]),
                eta=float(tla.get("eta", 1.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad tla shorthand: {exc}") from exc
        return build_two_level_model(params)
    try:
        dim = int(doc["dim"])
        h = _matrix_from_pairs(doc["hamiltonian"], dim, "hamiltonian")
        channels = tuple(
            JumpChannel(
                operator=_matrix_from_pairs(ch["operator"], dim, "channel operator"),
                counted=bool(ch.get("counted", True)),
            )
            for ch in doc["channels"]
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad model document: {exc}") from exc
    return LindbladModel(dim=dim, hamiltonian=h, channels=channels)


def model_to_json(model: LindbladModel) -> dict:
    """Explicit JSON form of a model (inverse of model_from_json)."""
    return {
        "dim": model.dim,
        "hamiltonian": _matrix_to_pairs(model.hamiltonian),
        "channels": [
            {"operator": _matrix_to_pairs(ch.operator), "counted": ch.counted}
            for ch in model.channels
        ],
    }
