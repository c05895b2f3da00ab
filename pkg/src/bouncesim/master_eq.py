"""Unconditioned two-qubit evolution in the polaron frame.

Displacing the resonators by their classical qubit-state-conditioned
amplitudes leaves a qubit-only master equation whose measurement back-action
enters through time-dependent coefficients built from the field solutions:

    drho/dt = sum_{ijkl} A_{ij,kl}(t) P_ij rho P_kl  +  L_d rho

with P_ij = |ij><ij| and

    A_{ij,kl}(t) = 2i chi_1 (1 - delta_ik) (-1)^i alpha^k alpha^{i*}
                 + 2i chi_2 (1 - delta_jl) (-1)^j beta^{kl} beta^{ij*}.

The sign exponent in the chip-2 term is (-1)^j, acting on the *second* qubit
bit; this choice (rather than a literal copy of the chip-1 exponent) is the
unique one that keeps drho/dt Hermitian and reduces to the single-chip
measurement-induced dephasing integral when the other chip is turned off,
both of which are asserted in the test suite.

Since the generator only multiplies each density-matrix element by A_{ij,kl},
populations are untouched by measurement; relaxation and pure dephasing enter
through standard Lindblad dissipators L_d = sum_i gammaphi_i D[sigma_z^i]
+ gamma1_i D[sigma_-^i].
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from . import compensation, fields
from .params import PulseSequence, SystemParams, TimeGrid, smoothed_square

__all__ = [
    "PLUS_PLUS",
    "COHERENCE_PAIRS",
    "PolaronCoefficients",
    "polaron_coefficients",
    "lindblad_superoperator",
    "evolve_me",
    "DephasingDataset",
    "dephasing_sweep",
    "fit_eta_and_scale",
    "FitResult",
    "validate_density_matrix",
]

#: basis order {|00>, |01>, |10>, |11>}; index a = 2*i + j
BASIS_LABELS = ["00", "01", "10", "11"]

#: the six independent off-diagonal elements (upper triangle, basis indices)
COHERENCE_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

#: |++><++|, every matrix element 1/4
PLUS_PLUS = np.full((4, 4), 0.25, dtype=complex)

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
_EYE2 = np.eye(2, dtype=complex)


def validate_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-8,
    eig_tol: float = 1e-7,
) -> np.ndarray:
    """Check a 4x4 density matrix (Hermitian, unit trace, near-PSD)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} is not 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has a significant negative eigenvalue")
    return rho


@dataclass(frozen=True)
class PolaronCoefficients:
    """Measurement back-action coefficients A_{ij,kl}(t).

    ``values`` has shape (n, 4, 4); ``values[t, a, b]`` multiplies the
    density-matrix element rho_ab, with a = 2*i + j and b = 2*k + l.  The
    diagonal (a == b) vanishes identically, so the generator never moves
    population.
    """

    grid: TimeGrid
    values: np.ndarray


def polaron_coefficients(
    sol: fields.FieldSolution, p: SystemParams
) -> PolaronCoefficients:
    """Build A_{ij,kl}(t) from a field solution."""
    n = sol.grid.n_samples
    a = np.zeros((n, 4, 4), dtype=complex)
    signs = np.array([1.0, -1.0])
    for i in (0, 1):
        for j in (0, 1):
            row = 2 * i + j
            for k in (0, 1):
                for l in (0, 1):
                    col = 2 * k + l
                    term = np.zeros(n, dtype=complex)
                    if i != k:
                        term += (
                            2j * p.chip1.chi * signs[i]
                            * sol.alpha[k] * np.conj(sol.alpha[i])
                        )
                    if j != l:
                        term += (
                            2j * p.chip2.chi * signs[j]
                            * sol.beta[k, l] * np.conj(sol.beta[i, j])
                        )
                    a[:, row, col] = term
    return PolaronCoefficients(grid=sol.grid, values=a)


def _dissipator_superop(op: np.ndarray) -> np.ndarray:
    """16x16 superoperator of D[op] acting on vec(rho), row-major."""
    eye = np.eye(4, dtype=complex)
    ada = op.conj().T @ op
    return (
        np.kron(op, op.conj())
        - 0.5 * np.kron(ada, eye)
        - 0.5 * np.kron(eye, ada.T)
    )


def lindblad_superoperator(p: SystemParams) -> np.ndarray:
    """Constant 16x16 decoherence generator for vec(rho) (row-major)."""
    sm1 = np.kron(_SIGMA_MINUS, _EYE2)
    sm2 = np.kron(_EYE2, _SIGMA_MINUS)
    sz1 = np.kron(_SIGMA_Z, _EYE2)
    sz2 = np.kron(_EYE2, _SIGMA_Z)
    return (
        p.gamma1_q1 * _dissipator_superop(sm1)
        + p.gamma1_q2 * _dissipator_superop(sm2)
        + p.gammaphi_q1 * _dissipator_superop(sz1)
        + p.gammaphi_q2 * _dissipator_superop(sz2)
    )


def _midpoint_coeffs(a: np.ndarray) -> np.ndarray:
    """Quadratic interpolation of the coefficient series at half steps.

    ``a`` has the time axis first; returns an array with one fewer sample,
    entry k approximating a(t_k + dt/2) to O(dt^3).
    """
    mid = 0.375 * a[:-1] + 0.75 * a[1:]
    mid[:-1] -= 0.125 * a[2:]
    mid[-1] = -0.125 * a[-3] + 0.75 * a[-2] + 0.375 * a[-1]
    return mid


def _rk4_evolve(
    rho0: np.ndarray,
    a: np.ndarray,
    a_mid: np.ndarray,
    lind: np.ndarray,
    dt: float,
    store_all: bool = True,
    diffusion=None,
):
    """Shared fixed-step RK4 core for the (batched) master equation.

    ``rho0`` has shape (..., 4, 4); ``a`` either (n, 4, 4) shared across the
    batch or (n, ..., 4, 4).  ``diffusion(k, rho) -> rho`` is an optional
    per-step stochastic update applied after each deterministic step (used by
    the trajectory solver).  Returns (rho_t or rho_final, max_trace_drift).
    """
    n = a.shape[0]
    lind_t = lind.T.copy()

    def rhs(rho, a_t):
        flat = rho.reshape(rho.shape[:-2] + (16,))
        out = (flat @ lind_t).reshape(rho.shape)
        return a_t * rho + out

    rho = np.array(rho0, dtype=complex)
    batch_shape = rho.shape[:-2]
    if store_all:
        rho_t = np.empty((n,) + batch_shape + (4, 4), dtype=complex)
        rho_t[0] = rho
    max_drift = 0.0
    for k in range(n - 1):
        k1 = rhs(rho, a[k])
        k2 = rhs(rho + 0.5 * dt * k1, a_mid[k])
        k3 = rhs(rho + 0.5 * dt * k2, a_mid[k])
        k4 = rhs(rho + dt * k3, a[k + 1])
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        # crush accumulated round-off asymmetry
        rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
        if diffusion is not None:
            rho = diffusion(k, rho)
        tr = np.einsum("...ii->...", rho).real
        drift = float(np.abs(tr - 1.0).max())
        max_drift = max(max_drift, drift)
        if store_all:
            rho_t[k + 1] = rho
    return (rho_t if store_all else rho), max_drift


def evolve_me(
    rho0: np.ndarray,
    coeffs: PolaronCoefficients,
    p: SystemParams,
    grid: TimeGrid | None = None,
    store_all: bool = True,
    trace_tol: float = 1e-6,
):
    """Propagate the unconditioned master equation with fixed-step RK4.

    Parameters
    ----------
    rho0 : ndarray, shape (..., 4, 4)
        Initial state(s); leading axes are batch axes.
    coeffs : PolaronCoefficients
        Back-action coefficients sampled on the evolution grid; half-step
        stage values are obtained by local quadratic interpolation.
    store_all : bool
        If True return the full series with time axis first, shape
        (n, ..., 4, 4); otherwise only the final state.

    Raises
    ------
    RuntimeError
        If the trace drifts by more than ``trace_tol`` anywhere along the
        evolution (step-size instability).
    """
    if grid is None:
        grid = coeffs.grid
    if rho0.shape[-2:] == (4, 4) and rho0.ndim == 2:
        validate_density_matrix(rho0)
    a = coeffs.values
    if a.shape[0] != grid.n_samples:
        raise ValueError("coefficient series does not match the grid")
    lind = lindblad_superoperator(p)
    out, drift = _rk4_evolve(
        rho0, a, _midpoint_coeffs(a), lind, grid.dt, store_all=store_all
    )
    if drift > trace_tol:
        raise RuntimeError(
            f"trace drift {drift:.2e} exceeds {trace_tol:.0e}; "
            "reduce the grid dt"
        )
    return out


# --------------------------------------------------------------------------
# dephasing sweeps and the loss / amplitude-scale fit

@dataclass(frozen=True)
class DephasingDataset:
    """Final-state summary of a measurement-amplitude sweep.

    ``coherences[k, m]`` is the final value of the m-th independent
    off-diagonal element (order :data:`COHERENCE_PAIRS`) at the k-th
    amplitude; ``populations[k]`` holds the four diagonal entries.
    """

    amplitudes: np.ndarray
    coherences: np.ndarray
    populations: np.ndarray
    rho_final: np.ndarray


def _unit_pulse(
    grid: TimeGrid, plateau: float, rise: float, delay: float
) -> np.ndarray:
    return smoothed_square(1.0, plateau, rise, grid, delay=delay)


def dephasing_sweep(
    amplitudes,
    p: SystemParams,
    mode: str,
    grid: TimeGrid,
    plateau: float = 300e-9,
    rise: float = 20e-9,
    delay: float = 0.0,
    rho0: np.ndarray | None = None,
) -> DephasingDataset:
    """Evolve the unconditioned state for each drive amplitude.

    ``mode`` selects the compensation: ``'none'``, ``'odd'`` or ``'even'``.
    The drive envelope is amplitude * amp_scale * (smoothed square); because
    the fields are linear in the drive, the back-action coefficients for all
    amplitudes are the unit-amplitude coefficients scaled by amplitude^2, so
    the whole sweep runs as one batched evolution.
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    if rho0 is None:
        rho0 = PLUS_PLUS
    unit = _unit_pulse(grid, plateau, rise, delay) * p.amp_scale
    pulses = PulseSequence(
        grid=grid, eps_s=unit, eps_w=np.zeros_like(unit),
        amplitude=1.0, plateau=plateau, rise=rise,
    )
    if mode != "none":
        pair = {"odd": compensation.ODD_PAIR, "even": compensation.EVEN_PAIR}[mode]
        eps_w = compensation.synthesize_compensation(
            pulses.eps_s, p, pair, grid=grid
        )
        pulses = pulses.with_weak(eps_w)
    sol = fields.solve_fields_fourier(pulses, p)
    a_unit = polaron_coefficients(sol, p).values
    a_batch = a_unit[:, None, :, :] * (amplitudes**2)[None, :, None, None]
    lind = lindblad_superoperator(p)
    rho0_batch = np.broadcast_to(
        rho0, (amplitudes.size, 4, 4)
    ).astype(complex)
    rho_final, drift = _rk4_evolve(
        rho0_batch, a_batch, _midpoint_coeffs(a_batch), lind, grid.dt,
        store_all=False,
    )
    if drift > 1e-6:
        raise RuntimeError(f"trace drift {drift:.2e} in sweep; reduce dt")
    rows = [pq[0] for pq in COHERENCE_PAIRS]
    cols = [pq[1] for pq in COHERENCE_PAIRS]
    return DephasingDataset(
        amplitudes=amplitudes,
        coherences=rho_final[:, rows, cols],
        populations=rho_final[:, np.arange(4), np.arange(4)].real,
        rho_final=rho_final,
    )


@dataclass(frozen=True)
class FitResult:
    params: SystemParams
    eta_l: float
    amp_scale: float
    residuals: np.ndarray
    cost: float


def fit_eta_and_scale(
    dataset: DephasingDataset,
    p: SystemParams,
    mode: str,
    grid: TimeGrid,
    plateau: float = 300e-9,
    rise: float = 20e-9,
    delay: float = 0.0,
    rho0: np.ndarray | None = None,
    x0: tuple[float, float] | None = None,
) -> FitResult:
    """Least-squares fit of the link transmission and drive-amplitude scale.

    Fits (eta_l, amp_scale) to the stacked real and imaginary parts of all
    six independent coherences across the amplitude sweep, holding every
    other system parameter fixed.  The dataset should cover several
    amplitudes (five or more for a well-conditioned fit).
    """
    if dataset.amplitudes.size < 2:
        raise ValueError("degenerate dataset: need more than one amplitude")
    if x0 is None:
        x0 = (p.eta_l, p.amp_scale)

    target = np.concatenate(
        [dataset.coherences.real.ravel(), dataset.coherences.imag.ravel()]
    )

    def residuals(x):
        eta_l, scale = x
        trial = replace(p, eta_l=float(eta_l), amp_scale=float(scale))
        model = dephasing_sweep(
            dataset.amplitudes, trial, mode, grid,
            plateau=plateau, rise=rise, delay=delay, rho0=rho0,
        )
        pred = np.concatenate(
            [model.coherences.real.ravel(), model.coherences.imag.ravel()]
        )
        return pred - target

    res = least_squares(
        residuals, x0, bounds=([0.0, 1e-12], [1.0, np.inf]), xtol=1e-12,
    )
    fitted = replace(p, eta_l=float(res.x[0]), amp_scale=float(res.x[1]))
    return FitResult(
        params=fitted,
        eta_l=float(res.x[0]),
        amp_scale=float(res.x[1]),
        residuals=res.fun,
        cost=float(res.cost),
    )
