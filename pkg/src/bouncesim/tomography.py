"""Joint-readout quantum state tomography with SPAM correction.

The tomography experiment applies an overcomplete cardinal set of 36
two-qubit pre-rotations, then a joint dispersive measurement whose outcomes
are counted in two bins (one dominated by |00>-like outcomes, one by
|11>-like).  For a joint readout each bin operator is diagonal,
Mhat^n = sum_k a^n_k P_k, so the calibration coefficients a^n_k are read
directly from the measured bin fractions of the four computational input
states.  The 36 x 2 = 72 measured expectation values then form an
overdetermined linear system for the 15 unknowns of rho, solved by linear
inversion followed by maximum-likelihood refinement over a Cholesky-style
factorized parameterization (rho = L L^dag / Tr L L^dag), which is positive
semidefinite with unit trace by construction.

Residual thermal excitation makes the calibration inputs mixed rather than
pure, which skews the inferred a^n_k and artificially boosts the purity of
reconstructed states.  Given known excitation fractions the skew is undone
by replacing the pure projectors with the corresponding mixed inputs when
interpreting the calibration data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .master_eq import validate_density_matrix

__all__ = [
    "ResidualExcitation",
    "cardinal_rotations",
    "mixed_preparation",
    "default_bin_coefficients",
    "TomographyDataset",
    "simulate_tomography",
    "calibrate",
    "reconstruct",
    "bootstrap_errors",
]

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_I = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class ResidualExcitation:
    """Per-qubit residual excitation probabilities of the preparation."""

    p_e_q1: float = 0.0
    p_e_q2: float = 0.0

    def __post_init__(self):
        for name in ("p_e_q1", "p_e_q2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 0.5:
                raise ValueError(f"{name} must be in [0, 0.5], got {v}")


def _rot(axis: np.ndarray, angle: float) -> np.ndarray:
    return np.cos(angle / 2) * _I - 1j * np.sin(angle / 2) * axis


#: the six cardinal single-qubit rotations, in canonical order
_CARDINAL_1Q = [
    _I,
    _rot(_X, np.pi),
    _rot(_X, np.pi / 2),
    _rot(_X, -np.pi / 2),
    _rot(_Y, np.pi / 2),
    _rot(_Y, -np.pi / 2),
]


def cardinal_rotations() -> list[np.ndarray]:
    """All 36 tensor products of {I, X, X90, X-90, Y90, Y-90} on both qubits.

    Ordered with the first-qubit rotation as the major index.
    """
    return [np.kron(r1, r2) for r1 in _CARDINAL_1Q for r2 in _CARDINAL_1Q]


def mixed_preparation(i: int, j: int, re: ResidualExcitation) -> np.ndarray:
    """Mixed computational-state preparation under residual excitation.

    Each qubit's prepared bit is flipped with its residual-excitation
    probability, so the target projector P_ij becomes a diagonal mixture of
    all four computational projectors.
    """
    rho = np.zeros((4, 4), dtype=complex)
    for e1, w1 in ((0, 1 - re.p_e_q1), (1, re.p_e_q1)):
        for e2, w2 in ((0, 1 - re.p_e_q2), (1, re.p_e_q2)):
            idx = 2 * (i ^ e1) + (j ^ e2)
            rho[idx, idx] += w1 * w2
    return rho


def default_bin_coefficients() -> np.ndarray:
    """Plausible bin coefficients a^n_k for a two-bin joint readout.

    Row 0 is the |00>-keyed bin, row 1 the |11>-keyed bin; columns follow the
    computational basis.  The rows sum to less than one per state (some
    outcomes land in neither bin) and carry a two-qubit-correlated component,
    as a nonlinearly bordered bin in the outcome plane does.
    """
    return np.array(
        [
            [0.90, 0.45, 0.40, 0.08],
            [0.05, 0.35, 0.40, 0.85],
        ]
    )


@dataclass(frozen=True)
class TomographyDataset:
    """Measured (or simulated) bin expectation values.

    ``expectations[i, n]`` is the bin-n fraction after rotation i (cardinal
    ordering); ``calibration[k, n]`` the bin-n fraction for computational
    input state k.  ``shots`` is the per-rotation shot count, or ``None`` for
    the infinite-shot (analytic) limit.
    """

    expectations: np.ndarray
    calibration: np.ndarray
    shots: int | None

    def __post_init__(self):
        if self.expectations.shape != (36, 2):
            raise ValueError("expectations must have shape (36, 2)")
        if self.calibration.shape != (4, 2):
            raise ValueError("calibration must have shape (4, 2)")


def _sample_fractions(probs_state, a, shots, rng):
    """Bin fractions from multinomial sampling of (state, bin) outcomes."""
    # joint outcome probabilities over (state k, bin 0 / bin 1 / unbinned)
    p = np.empty((4, 3))
    p[:, 0] = probs_state * a[0]
    p[:, 1] = probs_state * a[1]
    p[:, 2] = probs_state * (1.0 - a[0] - a[1])
    counts = rng.multinomial(shots, p.ravel()).reshape(4, 3)
    return counts[:, :2].sum(axis=0) / shots


def simulate_tomography(
    rho: np.ndarray,
    a: np.ndarray | None = None,
    shots: int | None = None,
    re: ResidualExcitation | None = None,
    seed: int = 0,
) -> TomographyDataset:
    """Simulate the full tomography run for a known underlying state.

    Parameters
    ----------
    rho : ndarray
        The state being characterized (validated before use).
    a : ndarray, shape (2, 4), optional
        True detector bin coefficients; defaults to
        :func:`default_bin_coefficients`.
    shots : int, optional
        Per-rotation (and per-calibration-state) shot count; ``None``
        computes exact expectation values.
    re : ResidualExcitation, optional
        Residual excitation applied to the *calibration* inputs, to study
        the SPAM skew it induces.
    """
    rho = validate_density_matrix(rho)
    if a is None:
        a = default_bin_coefficients()
    a = np.asarray(a, dtype=float)
    if re is None:
        re = ResidualExcitation()
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)

    expectations = np.empty((36, 2))
    for i, r in enumerate(cardinal_rotations()):
        probs = np.clip(np.diag(r @ rho @ r.conj().T).real, 0.0, None)
        probs = probs / probs.sum()
        if shots is None:
            expectations[i] = a @ probs
        else:
            expectations[i] = _sample_fractions(probs, a, shots, rng)

    calibration = np.empty((4, 2))
    for k in range(4):
        prep = mixed_preparation(k // 2, k % 2, re)
        probs = np.diag(prep).real
        if shots is None:
            calibration[k] = a @ probs
        else:
            calibration[k] = _sample_fractions(probs, a, shots, rng)
    return TomographyDataset(
        expectations=expectations, calibration=calibration, shots=shots
    )


def calibrate(calibration: np.ndarray) -> np.ndarray:
    """Bin coefficients a^n_k from calibration-segment bin fractions.

    For pure computational inputs the measured fraction *is* the
    coefficient: a^n_k = Tr(Mhat^n P_k).
    """
    calibration = np.asarray(calibration, dtype=float)
    return calibration.T.copy()


# normalized two-qubit Pauli basis: Tr(B_a B_b) = delta_ab, B_0 = I/2
_PAULI_BASIS = np.array(
    [0.5 * np.kron(p1, p2) for p1 in (_I, _X, _Y, _Z) for p2 in (_I, _X, _Y, _Z)]
)


def _bin_operators(a_coeffs: np.ndarray) -> np.ndarray:
    """Rotated bin operators O_{i,n} = R_i^dag Mhat^n R_i, shape (72, 4, 4)."""
    rotations = cardinal_rotations()
    ops = np.empty((72, 4, 4), dtype=complex)
    for i, r in enumerate(rotations):
        for n in range(2):
            ops[2 * i + n] = r.conj().T @ np.diag(a_coeffs[n]) @ r
    return ops


def _linear_invert(ops: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Least-squares Hermitian estimate with unit trace (not yet PSD)."""
    design = np.einsum("rij,aji->ra", ops, _PAULI_BASIS).real
    rhs = values - 0.5 * design[:, 0]
    x, *_ = np.linalg.lstsq(design[:, 1:], rhs, rcond=None)
    coeffs = np.concatenate([[0.5], x])
    return np.einsum("a,aij->ij", coeffs, _PAULI_BASIS)


def _project_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 1e-9, None)
    rho = (v * w) @ v.conj().T
    return rho / np.trace(rho).real


def _mle_refine(
    ops: np.ndarray, values: np.ndarray, rho_seed: np.ndarray
) -> np.ndarray:
    """Least-squares MLE over rho = L L^dag / Tr(L L^dag), L lower-triangular."""
    tril = np.tril_indices(4)
    diag_mask = tril[0] == tril[1]

    def unpack(x):
        l = np.zeros((4, 4), dtype=complex)
        l[tril] = x[:10] + 1j * np.where(diag_mask, 0.0, x[10:])
        rho = l @ l.conj().T
        return rho / np.trace(rho).real

    def loss(x):
        rho = unpack(x)
        pred = np.einsum("rij,ji->r", ops, rho).real
        return float(np.sum((pred - values) ** 2))

    l0 = np.linalg.cholesky(rho_seed + 1e-10 * np.eye(4))
    # rotate columns so the diagonal is real (gauge freedom of L)
    l0 = l0 * np.exp(-1j * np.angle(np.diag(l0)))[None, :]
    x0 = np.concatenate([l0[tril].real, l0[tril].imag])
    res = minimize(loss, x0, method="L-BFGS-B", options={"maxiter": 2000})
    return unpack(res.x)


def reconstruct(
    dataset: TomographyDataset,
    correction: ResidualExcitation | None = None,
    refine: bool = True,
) -> np.ndarray:
    """Estimate the density matrix from a tomography dataset.

    A linear-inversion least-squares solution seeds a maximum-likelihood
    refinement constrained to physical (PSD, unit-trace) states.  If
    ``correction`` is given, the calibration inputs are interpreted as the
    corresponding residual-excitation mixtures instead of pure projectors,
    undoing the SPAM skew.
    """
    a_meas = calibrate(dataset.calibration)
    if correction is not None:
        # measured fractions c^n_k = sum_j diag(Ptilde_k)_j a^n_j
        t = np.array(
            [
                np.diag(mixed_preparation(k // 2, k % 2, correction)).real
                for k in range(4)
            ]
        )
        a_coeffs = np.linalg.solve(t, a_meas.T).T
    else:
        a_coeffs = a_meas
    ops = _bin_operators(a_coeffs)
    values = dataset.expectations.reshape(72)
    rank = np.linalg.matrix_rank(
        np.einsum("rij,aji->ra", ops, _PAULI_BASIS).real
    )
    if rank < 16:
        raise ValueError(
            f"rank-deficient design matrix (rank {rank} < 16): bin "
            "coefficients do not resolve all two-qubit components"
        )
    rho_lin = _linear_invert(ops, values)
    rho = _project_psd(rho_lin)
    if refine:
        rho = _mle_refine(ops, values, rho)
    return rho


def bootstrap_errors(
    dataset: TomographyDataset,
    n_resamples: int,
    seed: int = 0,
    correction: ResidualExcitation | None = None,
    parity: str = "odd",
) -> dict:
    """Coin-toss (multinomial) bootstrap errors of the entanglement measures.

    Resamples the per-rotation and calibration bin counts from their
    measured fractions, reconstructs each resample, and reports the standard
    deviation of concurrence, Bell fidelity, and logarithmic negativity.
    """
    from . import measures

    if n_resamples < 1:
        raise ValueError("n_resamples must be >= 1")
    if dataset.shots is None:
        return {"concurrence": 0.0, "bell_fidelity": 0.0, "log_negativity": 0.0}
    rng = np.random.default_rng(seed)
    shots = dataset.shots

    def resample_fracs(fracs):
        out = np.empty_like(fracs)
        for r in range(fracs.shape[0]):
            p = np.array([fracs[r, 0], fracs[r, 1], 1 - fracs[r].sum()])
            p = np.clip(p, 0.0, None)
            counts = rng.multinomial(shots, p / p.sum())
            out[r] = counts[:2] / shots
        return out

    stats = []
    for _ in range(n_resamples):
        ds = TomographyDataset(
            expectations=resample_fracs(dataset.expectations),
            calibration=resample_fracs(dataset.calibration),
            shots=shots,
        )
        rho = reconstruct(ds, correction=correction)
        fb, _ = measures.bell_fidelity(rho, parity)
        stats.append(
            [measures.concurrence(rho), fb, measures.log_negativity(rho)]
        )
    std = np.std(np.array(stats), axis=0, ddof=1) if n_resamples > 1 else (
        np.zeros(3)
    )
    return {
        "concurrence": float(std[0]),
        "bell_fidelity": float(std[1]),
        "log_negativity": float(std[2]),
    }
