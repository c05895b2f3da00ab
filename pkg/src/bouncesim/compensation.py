"""Weak-port compensation-pulse synthesis and parameter tune-up.

Because the cascaded system is linear, the monitored output for qubit state
(i, j) is

    y^{ij}(w) = sqrt(eta_l) e^{i phi} H_1R^i(w) H_2R^j(w) eps_s(w)
                + sqrt(kappa_w2) H_2^j(w) eps_w(w).

Requiring y^{kl} = y^{mn} for a chosen state pair gives a closed-form filter
relating the weak-port drive to the strong-port drive,

    eps_w(w) = Hcomp(w) eps_s(w),
    Hcomp(w) = sqrt(eta_l) e^{i phi}
               (H_1R^k H_2R^l - H_1R^m H_2R^n)
               / (sqrt(kappa_w2) (H_2^n - H_2^l)),

which exists whenever the pair differs in the second-qubit bit (otherwise the
denominator vanishes identically).  Matching the odd pair (01, 10) turns the
cascaded reflection into a half-parity measurement; matching (00, 11) gives
the even analog.

When the true system parameters are uncertain, the synthesized pulse is only
approximately right, and the residual mismatch of the *true* outputs is a
scalar cost that can be minimized over the uncertain parameters with a
derivative-free simplex search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import fields
from .params import PulseSequence, SystemParams, get_param, set_param

__all__ = [
    "StatePair",
    "ODD_PAIR",
    "EVEN_PAIR",
    "comp_transfer",
    "synthesize_compensation",
    "matching_cost",
    "optimize_params",
    "OptimizeResult",
    "check_full_parity",
]

#: the six unordered pairs of two-qubit computational states
ALL_PAIRS = tuple(itertools.combinations([(0, 0), (0, 1), (1, 0), (1, 1)], 2))


@dataclass(frozen=True)
class StatePair:
    """An unordered pair of two-qubit basis states to be made indistinguishable.

    ``a = (k, l)`` and ``b = (m, n)`` are (first-qubit, second-qubit) bit
    tuples.  Pairs must differ, and only pairs differing in the second-qubit
    bit can be compensated through the chip-2 weak port.
    """

    a: tuple[int, int]
    b: tuple[int, int]

    def __post_init__(self):
        for state in (self.a, self.b):
            if tuple(state) not in [(0, 0), (0, 1), (1, 0), (1, 1)]:
                raise ValueError(f"invalid state label {state}")
        if tuple(self.a) == tuple(self.b):
            raise ValueError("state pair must consist of two distinct states")

    @property
    def others(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """The five other unordered state pairs."""
        this = {tuple(self.a), tuple(self.b)}
        return [pq for pq in ALL_PAIRS if set(pq) != this]


ODD_PAIR = StatePair(a=(0, 1), b=(1, 0))
EVEN_PAIR = StatePair(a=(0, 0), b=(1, 1))


def comp_transfer(omega, p: SystemParams, pair: StatePair):
    """Closed-form compensation filter Hcomp(omega) for one state pair.

    Raises
    ------
    ValueError
        If chip 2 has no weak port, or the pair shares its second-qubit bit
        (the denominator H_2^n - H_2^l then vanishes identically).
    """
    k, l = pair.a
    m, n = pair.b
    if p.chip2.kappa_w <= 0:
        raise ValueError("no weak port: chip2.kappa_w must be > 0")
    if l == n:
        raise ValueError(
            "denominator identically zero: pair not compensatable through "
            "the chip-2 weak port (second-qubit bits are equal)"
        )
    h1r_k = fields.transfer_reflected(omega, p.chip1, fields.qubit_sign(k))
    h1r_m = fields.transfer_reflected(omega, p.chip1, fields.qubit_sign(m))
    h2r_l = fields.transfer_reflected(omega, p.chip2, fields.qubit_sign(l))
    h2r_n = fields.transfer_reflected(omega, p.chip2, fields.qubit_sign(n))
    h2_l = fields.transfer_into(omega, p.chip2, fields.qubit_sign(l))
    h2_n = fields.transfer_into(omega, p.chip2, fields.qubit_sign(n))
    numer = np.sqrt(p.eta_l) * np.exp(1j * p.phi) * (
        h1r_k * h2r_l - h1r_m * h2r_n
    )
    denom = np.sqrt(p.chip2.kappa_w) * (h2_n - h2_l)
    return numer / denom


def synthesize_compensation(
    eps_s: np.ndarray,
    p: SystemParams,
    pair: StatePair,
    grid=None,
    pulses: PulseSequence | None = None,
    pad_factor: int = fields.PAD_FACTOR,
) -> np.ndarray:
    """Shape the weak-port drive that equalizes the outputs of ``pair``.

    Accepts either an envelope plus ``grid`` or a full ``pulses`` sequence
    (whose strong-port envelope is used).  Returns the weak-port envelope on
    the same grid; the filter is applied in the Fourier domain on a
    zero-padded grid.
    """
    if pulses is not None:
        eps_s = pulses.eps_s
        grid = pulses.grid
    if grid is None:
        raise ValueError("either grid or pulses must be given")
    eps_s = np.asarray(eps_s, dtype=complex)
    n = grid.n_samples
    n_pad = pad_factor * n
    omega = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=grid.dt)
    hcomp = comp_transfer(omega, p, pair)
    eps_w = np.fft.ifft(hcomp * np.fft.fft(eps_s, n_pad))[:n]
    return eps_w


def matching_cost(sol: fields.FieldSolution, pair: StatePair) -> float:
    """Normalized transient mismatch of the target pair.

    Int |y^a - y^b| dt divided by the summed integrated differences of the
    other five unordered state pairs.  Zero iff the target outputs are
    perfectly matched.  The integrand uses the plain modulus, matching how
    transient differences are monitored.
    """
    dt = sol.grid.dt

    def integ(pq):
        (i, j), (k, l) = pq
        return float(
            np.trapezoid(np.abs(sol.y[i, j] - sol.y[k, l]), dx=dt)
        )

    target = integ((tuple(pair.a), tuple(pair.b)))
    rest = sum(integ(pq) for pq in pair.others)
    if rest == 0.0:
        # no output at all: define the cost as zero for zero drive
        return 0.0
    return target / rest


@dataclass(frozen=True)
class OptimizeResult:
    params: SystemParams
    cost: float
    n_evaluations: int
    converged: bool


def optimize_params(
    initial: SystemParams,
    uncertain: dict[str, tuple[float, float]],
    pulses: PulseSequence,
    pair: StatePair,
    budget: int,
    truth: SystemParams | None = None,
    noise_std: float = 0.0,
    seed: int = 0,
) -> OptimizeResult:
    """Tune uncertain parameters by minimizing the transient-matching cost.

    Mimics the experimental tune-up loop: for a candidate parameter vector
    the compensation pulse is synthesized *from the candidate model*, but the
    resulting drive is propagated through the *true* system (``truth``), whose
    output mismatch is scored with :func:`matching_cost`.  A Nelder-Mead
    simplex (adaptive coefficients) searches the uncertain parameters within
    their bounds.

    Parameters
    ----------
    uncertain : dict
        Maps dotted parameter names (e.g. ``'eta_l'``, ``'phi'``,
        ``'chip2.kappa_w'``) to (lower, upper) search bounds.  Must be
        nonempty.
    budget : int
        Maximum number of cost evaluations.
    truth : SystemParams, optional
        The actual system the candidate drive is propagated through; defaults
        to ``initial`` (pure self-consistency test).
    noise_std : float, optional
        Standard deviation of Gaussian noise added to the simulated output
        transients before scoring, as a fraction of the peak output.  This is
        a plain measurement-noise knob, not a calibrated detection model.

    Returns
    -------
    OptimizeResult
        Best parameters found, their cost, the number of evaluations, and a
        convergence flag (False when the budget ran out first).
    """
    if not uncertain:
        raise ValueError("uncertain parameter set must be nonempty")
    if truth is None:
        truth = initial
    names = sorted(uncertain)
    bounds = [uncertain[name] for name in names]
    x0 = np.array([get_param(initial, name) for name in names], dtype=float)
    rng = np.random.default_rng(seed)

    def apply(x) -> SystemParams:
        p = initial
        for name, value in zip(names, x):
            p = set_param(p, name, float(value))
        return p

    def cost(x) -> float:
        candidate = apply(x)
        try:
            eps_w = synthesize_compensation(
                pulses.eps_s, candidate, pair, grid=pulses.grid
            )
        except ValueError:
            return np.inf
        sol = fields.solve_fields_fourier(pulses.with_weak(eps_w), truth)
        if noise_std > 0.0:
            peak = np.abs(sol.y).max()
            noisy = sol.y + noise_std * peak * (
                rng.standard_normal(sol.y.shape)
                + 1j * rng.standard_normal(sol.y.shape)
            )
            sol = fields.FieldSolution(
                grid=sol.grid, alpha=sol.alpha, z=sol.z, beta=sol.beta, y=noisy
            )
        return matching_cost(sol, pair)

    res = minimize(
        cost,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "maxfev": budget,
            "adaptive": True,
            "xatol": 1e-8,
            "fatol": 1e-12,
        },
    )
    return OptimizeResult(
        params=apply(res.x),
        cost=float(res.fun),
        n_evaluations=int(res.nfev),
        converged=bool(res.success),
    )


def check_full_parity(p: SystemParams, rtol: float = 1e-3) -> None:
    """Reject requests to match both state pairs with one compensation drive.

    Two drives give enough freedom to match one pair only; matching both
    simultaneously requires the special symmetry 2|chi| = kappa_bar on both
    chips.  Raises ``ValueError`` unless that symmetry holds.
    """
    for label, chip in (("chip1", p.chip1), ("chip2", p.chip2)):
        if abs(2 * abs(chip.chi) - chip.kappa_bar) > rtol * chip.kappa_bar:
            raise ValueError(
                "full-parity matching (odd and even pairs simultaneously) "
                f"needs 2|chi| = kappa_bar on both chips; {label} has "
                f"2|chi|/kappa_bar = {2 * abs(chip.chi) / chip.kappa_bar:.3f}"
            )
