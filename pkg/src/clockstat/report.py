"""Figure rendering for the CLI report path (file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 150


def save_theta_figure(path: str, rows: np.ndarray, omega: float, gamma: float) -> None:
    """theta(s): spectral curve, closed-form markers, |difference| below."""
    s, th_spec, th_cf, diff = rows.T
    fig, (ax, axd) = plt.subplots(
        2, 1, figsize=(6.0, 5.0), sharex=True, height_ratios=[3, 1]
    )
    ax.plot(s, th_spec, "-", color="tab:blue", label="spectral")
    ax.plot(s, th_cf, "o", ms=3, mfc="none", color="tab:red", label="closed form")
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.set_ylabel(r"$\theta(s)$")
    ax.set_title(rf"scaled CGF, $\Omega={omega:g}$, $\gamma={gamma:g}$")
    ax.legend(frameon=False)
    axd.semilogy(s, np.maximum(diff, 1e-18), "-", color="0.4")
    axd.set_xlabel("s")
    axd.set_ylabel("|difference|")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_sweep_figure(path: str, omegas: np.ndarray, gammas: np.ndarray,
                      rows: list[dict], minima: list[dict]) -> None:
    """delta-tau landscape over (omega, gamma) with the located minima."""
    dtau = np.full((omegas.size, gammas.size), np.nan)
    for r in rows:
        i = int(np.argmin(np.abs(omegas - r["omega"])))
        j = int(np.argmin(np.abs(gammas - r["gamma"])))
        dtau[i, j] = r["delta_tau"]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(omegas, gammas, np.log10(dtau.T), shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}\,\delta\tau$")
    if minima:
        mo = [m["omega"] for m in minima]
        mg = [m["gamma_min"] for m in minima]
        ax.plot(mo, mg, "r.-", lw=1.2, ms=5, label=r"$\gamma$ minimizing $\delta\tau$")
        ax.legend(frameon=False, loc="upper left")
    ax.set_xlabel(r"$\Omega$")
    ax.set_ylabel(r"$\gamma$")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_trajectories_figure(path: str, grid: np.ndarray, tau_matrix: np.ndarray,
                             label: str) -> None:
    """Fan chart of the clock readouts against the reference diagonal."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for tau in tau_matrix:
        ax.plot(grid, tau, color="tab:red", lw=0.6, alpha=0.5)
    ax.plot(grid, grid, "k--", lw=1.0, label=r"$\tau = t$")
    ax.set_xlabel("reference time t")
    ax.set_ylabel(r"clock readout $\tau(t)$")
    ax.set_title(f"{tau_matrix.shape[0]} runs, {label}")
    ax.legend(frameon=False, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_wtd_figure(path: str, gammas: np.ndarray, ts: np.ndarray,
                    w_grid: np.ndarray, threshold: float, omega: float) -> None:
    """Waiting-time density heatmap with the peak-census threshold contour."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(ts, gammas, w_grid, shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="w(t)")
    if w_grid.max() > threshold and gammas.size > 1:
        ax.contour(ts, gammas, w_grid, levels=[threshold], colors="white", linewidths=0.8)
    ax.set_xlabel("waiting time t")
    ax.set_ylabel(r"$\gamma$")
    ax.set_title(rf"waiting-time density, $\Omega={omega:g}$")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_crosscheck_figure(path: str, report, profile) -> None:
    """Histogram of simulated intervals against the analytic density."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    samples = report.samples
    t_hi = profile.t_cut
    if samples is not None and len(samples):
        ax.hist(samples, bins=120, density=True, color="tab:blue", alpha=0.5,
                label=f"simulated intervals (n={report.n_samples})")
        t_hi = min(t_hi, float(np.quantile(samples, 0.999)) * 1.3)
    ts = np.linspace(0.0, t_hi, 600)
    ax.plot(ts, profile.pdf(ts), "r-", lw=1.2, label="analytic density")
    ax.set_xlabel("inter-click interval")
    ax.set_ylabel("density")
    ax.set_title(f"KS = {report.statistic:.2e} (critical {report.critical_value:.2e})")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
