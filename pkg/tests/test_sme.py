import dataclasses

import numpy as np
import pytest

import bouncesim as bs
from bouncesim import compensation, fields, master_eq, sme
from bouncesim.master_eq import PLUS_PLUS
from conftest import trace_distance


@pytest.fixture(scope="module")
def setup():
    return bs.load_config(bs.default_config())


@pytest.fixture(scope="module")
def solution(setup):
    p, grid, pulses = setup
    eps_w = compensation.synthesize_compensation(
        pulses.eps_s, p, compensation.ODD_PAIR, grid=grid
    )
    return fields.solve_fields_fourier(pulses.with_weak(eps_w), p)


@pytest.fixture(scope="module")
def small_ensemble(solution, setup):
    p = setup[0]
    return sme.sme_ensemble(PLUS_PLUS, solution, p, 400, seed=11)


def test_seeded_determinism(solution, setup):
    p = setup[0]
    a = sme.sme_ensemble(PLUS_PLUS, solution, p, 50, seed=5)
    b = sme.sme_ensemble(PLUS_PLUS, solution, p, 50, seed=5)
    c = sme.sme_ensemble(PLUS_PLUS, solution, p, 50, seed=6)
    assert np.array_equal(a.rho_final, b.rho_final)
    assert np.array_equal(a.records, b.records)
    assert not np.array_equal(a.records, c.records)


def test_zero_efficiency_reduces_to_me(solution, setup):
    p = dataclasses.replace(setup[0], eta_m=0.0)
    traj = sme.evolve_sme(PLUS_PLUS, solution, p, seed=9)
    coeffs = master_eq.polaron_coefficients(solution, p)
    rho_me = master_eq.evolve_me(PLUS_PLUS, coeffs, p, store_all=True)
    assert np.abs(traj.rho_t - rho_me).max() < 1e-12
    # the record is then pure white noise with variance 1/dt per sample
    dt = solution.grid.dt
    var = np.var(traj.record[:-1])
    assert np.isclose(var * dt, 1.0, rtol=0.1)


def test_trajectories_stay_physical(small_ensemble):
    rho = small_ensemble.rho_final
    assert np.allclose(rho, np.conj(np.swapaxes(rho, -1, -2)), atol=1e-9)
    tr = np.einsum("nii->n", rho).real
    assert np.allclose(tr, 1.0, atol=1e-9)
    eig = np.linalg.eigvalsh(rho)
    assert eig.min() > -1e-4  # Ito steps can graze zero, never badly


def test_ensemble_mean_matches_me(solution, setup, small_ensemble):
    p = setup[0]
    coeffs = master_eq.polaron_coefficients(solution, p)
    rho_me = master_eq.evolve_me(PLUS_PLUS, coeffs, p, store_all=False)
    mean = small_ensemble.rho_final.mean(axis=0)
    assert trace_distance(mean / np.trace(mean).real, rho_me) < 0.05


def test_record_mean_is_conditional_signal(solution, setup):
    # ensemble average of V(t) approaches the unconditioned signal
    # 2 sqrt(eta_m) Re<M>, since the innovation part averages to zero
    p = setup[0]
    ens = sme.sme_ensemble(PLUS_PLUS, solution, p, 3000, seed=21)
    coeffs = master_eq.polaron_coefficients(solution, p)
    rho_t = master_eq.evolve_me(PLUS_PLUS, coeffs, p, store_all=True)
    m = sme.measurement_weights(solution, p, ens.theta)
    pops = rho_t[:, np.arange(4), np.arange(4)].real
    signal = 2.0 * np.sqrt(p.eta_m) * np.einsum("na,na->n", pops, m).real
    resid = ens.records.mean(axis=0) - signal
    dt = solution.grid.dt
    noise_floor = 1.0 / np.sqrt(3000 * dt)
    assert np.abs(resid).mean() < 3.0 * noise_floor


def test_pure_noise_outcome_variance(setup):
    # zero drive: the integrated outcome is a Gaussian with variance
    # sum |w|^2 dt per real quadrature pair
    p, grid, _ = setup
    zero = np.zeros(grid.n_samples, dtype=complex)
    sol = fields.solve_fields_fourier(
        bs.PulseSequence(grid=grid, eps_s=zero, eps_w=zero), p
    )
    ens = sme.sme_ensemble(PLUS_PLUS, sol, p, 4000, seed=31, theta=0.0)
    rng_w = np.random.default_rng(0)
    w = rng_w.standard_normal(grid.n_samples) + 1j * rng_w.standard_normal(
        grid.n_samples
    )
    out = sme.integrate_record(ens.records, w, grid.dt)
    expected = np.sum(np.abs(w) ** 2) * grid.dt
    total_var = np.var(out.real) + np.var(out.imag)
    assert np.isclose(total_var, expected, rtol=0.1)
    assert abs(out.mean()) < 3.0 * np.sqrt(expected / 4000)


def test_optimal_readout_angle_halves_phase(solution):
    theta = sme.optimal_readout_angle(solution)
    dt = solution.grid.dt
    d = solution.y[0, 0] - solution.y[1, 1]
    target = np.sum(d * d) * dt
    assert np.isclose(theta, -0.5 * np.angle(target))
    # rotating all outputs by a global phase shifts theta oppositely (mod pi)
    rotated = dataclasses.replace(solution, y=solution.y * np.exp(0.4j))
    shifted = sme.optimal_readout_angle(rotated)
    delta = (shifted - (theta - 0.4) + np.pi / 2) % np.pi - np.pi / 2
    assert abs(delta) < 1e-9


def test_integration_weights_phase_covariance(solution):
    w0 = sme.integration_weights(solution, theta=0.0)
    w1 = sme.integration_weights(solution, theta=0.7)
    assert np.allclose(w1, np.exp(0.7j) * w0)


def test_integrate_record_shapes(solution):
    n = solution.grid.n_samples
    w = np.ones(n, dtype=complex)
    single = sme.integrate_record(np.ones(n), w, 0.5e-9)
    assert isinstance(single, complex)
    stacked = sme.integrate_record(np.ones((3, n)), w, 0.5e-9)
    assert stacked.shape == (3,)
    assert np.allclose(stacked, single)


def test_classifier_separates_gaussian_clusters():
    rng = np.random.default_rng(4)
    odd = 1.0 + 0.3 * (rng.standard_normal(600) + 1j * rng.standard_normal(600))
    even = -1.0 + 0.3 * (rng.standard_normal(600) + 1j * rng.standard_normal(600))
    outcomes = np.concatenate([odd, even])
    labels = np.concatenate([np.ones(600, bool), np.zeros(600, bool)])
    clf = sme.train_classifier(outcomes, labels, seed=0)
    assert clf.assignment_fidelity > 0.99
    p = clf.p_odd(np.array([1.0 + 0j, -1.0 + 0j]))
    assert p[0] > 0.99 and p[1] < 0.01


def test_classifier_needs_both_classes():
    with pytest.raises(ValueError):
        sme.GaussianMixtureClassifier().fit(
            np.ones(10, complex), np.ones(10, bool)
        )


def test_postselect_rank_statistic():
    rng = np.random.default_rng(8)
    odd = 1.0 + 0.2 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    even = -1.0 + 0.2 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    outcomes = np.concatenate([odd, even])
    labels = np.concatenate([np.ones(200, bool), np.zeros(200, bool)])
    clf = sme.train_classifier(outcomes, labels, seed=1)
    kept_25 = sme.postselect(outcomes, clf, 0.25)
    kept_50 = sme.postselect(outcomes, clf, 0.5)
    assert kept_25.size == 100 and kept_50.size == 200
    assert set(kept_25).issubset(set(kept_50))  # nested by construction
    assert np.all(kept_25 < 200)  # the kept quarter is all truly odd
    kept_even = sme.postselect(outcomes, clf, 0.25, target="even")
    assert np.all(kept_even >= 200)
    with pytest.raises(ValueError):
        sme.postselect(outcomes, clf, 0.0)
    with pytest.raises(ValueError):
        sme.postselect(outcomes, clf, 0.5, target="both")


def test_heralding_monotonicity(solution, setup, small_ensemble):
    # smaller kept fractions select cleaner odd states: concurrence of the
    # conditioned state is non-increasing in the kept fraction
    p = setup[0]
    w = sme.integration_weights(solution, theta=small_ensemble.theta)
    out = sme.integrate_record(small_ensemble.records, w, solution.grid.dt)
    cal_o, cal_l = [], []
    for k in range(4):
        basis = np.zeros((4, 4), complex)
        basis[k, k] = 1.0
        ck = sme.sme_ensemble(basis, solution, p, 250, seed=60 + k,
                              theta=small_ensemble.theta)
        cal_o.append(sme.integrate_record(ck.records, w, solution.grid.dt))
        cal_l.append(np.full(250, k in (1, 2)))
    clf = sme.train_classifier(np.concatenate(cal_o), np.concatenate(cal_l),
                               seed=2)
    cs = []
    for f in (0.2, 0.5, 1.0):
        kept = sme.postselect(out, clf, f)
        cs.append(bs.concurrence(
            sme.conditioned_state(small_ensemble.rho_final, kept)
        ))
    assert cs[0] > cs[1] > cs[2] - 1e-9


def test_conditioned_state_empty_kept(small_ensemble):
    with pytest.raises(ValueError):
        sme.conditioned_state(small_ensemble.rho_final, np.array([], int))
