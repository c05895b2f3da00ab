"""Single-shot homodyne trajectories, outcome integration, and post-selection.

A continuous homodyne measurement of the cascaded output with quantum
efficiency eta_m adds a stochastic term to the polaron-frame master equation
(Ito form):

    d rho = L(rho) dt
            + sqrt(eta_m) [M rho + rho M^dag - Tr(M rho + rho M^dag) rho] dW

with the state-dependent measurement operator, diagonal in the computational
basis,

    M(t) = e^{i theta} ( -sqrt(kappa_s1 eta_l) Pi_1 + sqrt(kappa_s2) Pi_2 ),
    Pi_1 = sum_ij P_ij alpha^i(t),   Pi_2 = sum_ij P_ij beta^{ij}(t),

and the measured voltage record V(t) = sqrt(eta_m) Re<M> + xi(t), where
xi(t) dt = dW is white noise.  Each step advances the deterministic generator
with the same fixed-step RK4 used for the unconditioned evolution, then adds
the Euler-Maruyama stochastic increment and renormalizes the trace (the
printed nonlinear form keeps the trace only to O(dt^2)).

Records are condensed to one complex outcome per run by weighted integration,
classified into parity subspaces with a two-class Gaussian-mixture
discriminant, and post-selected by keeping the runs with the highest
target-subspace probability.

Trajectories are vectorized across a batch; identical seeds reproduce
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.mixture import GaussianMixture

from . import fields, master_eq
from .params import SystemParams, TimeGrid

__all__ = [
    "measurement_weights",
    "optimal_readout_angle",
    "Trajectory",
    "SmeEnsemble",
    "evolve_sme",
    "sme_ensemble",
    "integration_weights",
    "integrate_record",
    "GaussianMixtureClassifier",
    "train_classifier",
    "postselect",
    "conditioned_state",
]


def measurement_weights(
    sol: fields.FieldSolution, p: SystemParams, theta: float
) -> np.ndarray:
    """Diagonal entries m_a(t) of the measurement operator, shape (n, 4).

    Column a = 2*i + j holds e^{i theta} (-sqrt(kappa_s1 eta_l) alpha^i(t)
    + sqrt(kappa_s2) beta^{ij}(t)).  Zero whenever the fields are zero.
    """
    n = sol.grid.n_samples
    m = np.empty((n, 4), dtype=complex)
    c1 = -np.sqrt(p.chip1.kappa_s * p.eta_l)
    c2 = np.sqrt(p.chip2.kappa_s)
    for i in (0, 1):
        for j in (0, 1):
            m[:, 2 * i + j] = c1 * sol.alpha[i] + c2 * sol.beta[i, j]
    return np.exp(1j * theta) * m


def optimal_readout_angle(sol: fields.FieldSolution) -> float:
    """Readout quadrature maximizing Int |Re(e^{i theta}(y00 - y11))|^2 dt.

    Writing d = y00 - y11, the objective is (1/2) Int |d|^2
    + (1/2) Re(e^{2 i theta} Int d^2), maximized in closed form at
    2 theta = -arg Int d^2 dt.
    """
    d = sol.y[0, 0] - sol.y[1, 1]
    s = np.trapezoid(d * d, dx=sol.grid.dt)
    if s == 0:
        return 0.0
    return float(-0.5 * np.angle(s))


def _resolve_theta(sol, p: SystemParams, theta):
    if theta is not None:
        return float(theta)
    if p.theta is not None:
        return float(p.theta)
    return optimal_readout_angle(sol)


@dataclass
class Trajectory:
    """One stochastic run: conditioned state series plus measurement record."""

    rho_t: np.ndarray
    record: np.ndarray
    seed: int
    outcome: complex | None = None
    kept: bool | None = None


@dataclass(frozen=True)
class SmeEnsemble:
    """Final conditioned states and records of a batch of trajectories."""

    rho_final: np.ndarray
    records: np.ndarray
    seed: int
    theta: float


def _run_sme(
    rho0: np.ndarray,
    sol: fields.FieldSolution,
    p: SystemParams,
    grid: TimeGrid,
    seed: int,
    n_traj: int,
    theta,
    store_all: bool,
    norm_tol: float = 1e-3,
):
    theta = _resolve_theta(sol, p, theta)
    a = master_eq.polaron_coefficients(sol, p).values
    a_mid = master_eq._midpoint_coeffs(a)
    lind_t = master_eq.lindblad_superoperator(p).T.copy()
    m = measurement_weights(sol, p, theta)
    n = grid.n_samples
    dt = grid.dt
    sqdt = np.sqrt(dt)
    sq_eta = np.sqrt(p.eta_m)
    rng = np.random.default_rng(seed)

    rho = np.broadcast_to(rho0, (n_traj, 4, 4)).astype(complex)
    records = np.empty((n_traj, n))
    if store_all:
        rho_t = np.empty((n, n_traj, 4, 4), dtype=complex)
        rho_t[0] = rho

    def rhs(r, a_t):
        flat = r.reshape(n_traj, 16)
        return a_t * r + (flat @ lind_t).reshape(n_traj, 4, 4)

    diag = np.arange(4)
    for k in range(n - 1):
        dw = rng.standard_normal(n_traj) * sqdt
        m_k = m[k]
        exp_m = rho[:, diag, diag] @ m_k
        records[:, k] = 2.0 * sq_eta * exp_m.real + dw / dt
        # Ito diffusion evaluated at the pre-step state
        s = m_k[:, None] + np.conj(m_k)[None, :]
        inno = s * rho - (2.0 * exp_m.real)[:, None, None] * rho
        # deterministic RK4 substep
        k1 = rhs(rho, a[k])
        k2 = rhs(rho + 0.5 * dt * k1, a_mid[k])
        k3 = rhs(rho + 0.5 * dt * k2, a_mid[k])
        k4 = rhs(rho + dt * k3, a[k + 1])
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if p.eta_m > 0.0:
            rho = rho + sq_eta * inno * dw[:, None, None]
        rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
        tr = np.einsum("nii->n", rho).real
        if np.abs(tr - 1.0).max() > norm_tol:
            raise RuntimeError(
                "norm drift per step exceeds tolerance; reduce the grid dt"
            )
        rho = rho / tr[:, None, None]
        if store_all:
            rho_t[k + 1] = rho
    dw = rng.standard_normal(n_traj) * sqdt
    exp_m = rho[:, diag, diag] @ m[n - 1]
    records[:, n - 1] = 2.0 * sq_eta * exp_m.real + dw / dt
    return (rho_t if store_all else rho), records, theta


def evolve_sme(
    rho0: np.ndarray,
    sol: fields.FieldSolution,
    p: SystemParams,
    grid: TimeGrid | None = None,
    seed: int = 0,
    theta: float | None = None,
) -> Trajectory:
    """Simulate a single homodyne trajectory; deterministic for a fixed seed.

    With eta_m = 0 the stochastic term vanishes and the returned state series
    equals the unconditioned master-equation solution, while the record is
    pure white noise.
    """
    master_eq.validate_density_matrix(rho0)
    if grid is None:
        grid = sol.grid
    rho_t, records, _ = _run_sme(
        rho0, sol, p, grid, seed, n_traj=1, theta=theta, store_all=True
    )
    return Trajectory(rho_t=rho_t[:, 0], record=records[0], seed=seed)


def sme_ensemble(
    rho0: np.ndarray,
    sol: fields.FieldSolution,
    p: SystemParams,
    n_traj: int,
    seed: int = 0,
    grid: TimeGrid | None = None,
    theta: float | None = None,
) -> SmeEnsemble:
    """Simulate ``n_traj`` independent trajectories in one vectorized batch.

    Only final states and records are retained (the full state series of a
    large ensemble would not fit in memory).
    """
    master_eq.validate_density_matrix(rho0)
    if grid is None:
        grid = sol.grid
    rho_final, records, theta_used = _run_sme(
        rho0, sol, p, grid, seed, n_traj=n_traj, theta=theta, store_all=False
    )
    return SmeEnsemble(
        rho_final=rho_final, records=records, seed=seed, theta=theta_used
    )


def integration_weights(
    sol: fields.FieldSolution, theta: float = 0.0
) -> np.ndarray:
    """Matched-filter weight envelope for condensing a record to one point.

    The mean of the four parity-distinguishing transient differences
    (01-00, 10-00, 01-11, 10-11), rotated into the readout quadrature frame.
    Invariant under a global phase applied to the outputs together with the
    opposite shift of theta.
    """
    y = sol.y
    w = 0.25 * (
        (y[0, 1] - y[0, 0]) + (y[1, 0] - y[0, 0])
        + (y[0, 1] - y[1, 1]) + (y[1, 0] - y[1, 1])
    )
    return np.exp(1j * theta) * w


def integrate_record(record, weights: np.ndarray, dt: float) -> complex:
    """Weighted time integral of a voltage record, one complex number.

    ``record`` may be a single record, a (N, n) stack, or a
    :class:`Trajectory` (whose record is used).
    """
    if isinstance(record, Trajectory):
        record = record.record
    record = np.asarray(record)
    out = record @ (np.asarray(weights) * dt)
    return complex(out) if out.ndim == 0 else out


class GaussianMixtureClassifier:
    """Two-class discriminant on the complex outcome plane.

    Each parity class is modeled by a Gaussian mixture with up to
    ``max_components`` full-covariance components (two captures the
    relaxation tail of the even class); posteriors come from Bayes' rule
    with empirical class priors.
    """

    def __init__(self, max_components: int = 2, seed: int = 0):
        self.max_components = max_components
        self.seed = seed
        self.assignment_fidelity: float | None = None
        self._models = {}
        self._log_priors = {}

    @staticmethod
    def _features(outcomes) -> np.ndarray:
        z = np.asarray(outcomes, dtype=complex).ravel()
        return np.column_stack([z.real, z.imag])

    def fit(self, outcomes, labels_odd) -> "GaussianMixtureClassifier":
        x = self._features(outcomes)
        labels_odd = np.asarray(labels_odd, dtype=bool)
        if labels_odd.all() or not labels_odd.any():
            raise ValueError("need calibration points from both parity classes")
        for cls, mask in ((True, labels_odd), (False, ~labels_odd)):
            n_comp = min(self.max_components, mask.sum())
            gm = GaussianMixture(
                n_components=n_comp,
                covariance_type="full",
                random_state=self.seed,
                reg_covar=1e-6,
                n_init=1,
            )
            gm.fit(x[mask])
            self._models[cls] = gm
            self._log_priors[cls] = np.log(mask.mean())
        return self

    def p_odd(self, outcomes) -> np.ndarray:
        """Posterior probability of the odd subspace for each outcome."""
        x = self._features(outcomes)
        log_odd = self._models[True].score_samples(x) + self._log_priors[True]
        log_even = (
            self._models[False].score_samples(x) + self._log_priors[False]
        )
        # stable logistic of the log-odds
        return 1.0 / (1.0 + np.exp(np.clip(log_even - log_odd, -500, 500)))


def train_classifier(
    outcomes,
    labels_odd,
    seed: int = 0,
    heldout_fraction: float = 0.1,
    max_components: int = 2,
) -> GaussianMixtureClassifier:
    """Fit the parity classifier and score it on a held-out split.

    Shuffles deterministically by seed, trains on (1 - heldout_fraction) of
    the labeled calibration outcomes, and stores the held-out assignment
    fidelity on the classifier.  The returned classifier is refit on the full
    dataset so downstream selection uses all calibration information.
    """
    outcomes = np.asarray(outcomes, dtype=complex).ravel()
    labels_odd = np.asarray(labels_odd, dtype=bool)
    if outcomes.size != labels_odd.size:
        raise ValueError("outcomes and labels differ in length")
    rng = np.random.default_rng(seed)
    order = rng.permutation(outcomes.size)
    n_test = max(1, int(round(heldout_fraction * outcomes.size)))
    test, train = order[:n_test], order[n_test:]
    clf = GaussianMixtureClassifier(max_components=max_components, seed=seed)
    clf.fit(outcomes[train], labels_odd[train])
    predicted = clf.p_odd(outcomes[test]) > 0.5
    fidelity = float(np.mean(predicted == labels_odd[test]))
    clf = GaussianMixtureClassifier(max_components=max_components, seed=seed)
    clf.fit(outcomes, labels_odd)
    clf.assignment_fidelity = fidelity
    return clf


def postselect(
    outcomes,
    classifier: GaussianMixtureClassifier,
    fraction: float,
    target: str = "odd",
) -> np.ndarray:
    """Indices of the ceil(fraction * N) runs most likely in the target parity.

    Ties are broken toward lower outcome index, making the kept set a pure
    (deterministic) rank statistic of the classifier posterior.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if target not in ("odd", "even"):
        raise ValueError(f"target must be 'odd' or 'even', got {target!r}")
    p = classifier.p_odd(outcomes)
    if target == "even":
        p = 1.0 - p
    n_keep = int(np.ceil(fraction * p.size))
    order = np.argsort(-p, kind="stable")
    return np.sort(order[:n_keep])


def conditioned_state(rho_final: np.ndarray, kept) -> np.ndarray:
    """Normalized average of final trajectory states over a kept index set."""
    kept = np.asarray(kept)
    if kept.dtype == bool:
        sel = rho_final[kept]
    else:
        sel = rho_final[kept]
    if sel.shape[0] == 0:
        raise ValueError("kept set is empty")
    rho = sel.mean(axis=0)
    return rho / np.trace(rho).real
