import numpy as np
import pytest
from scipy.special import j0

from idlsim.channel import (C_LIGHT, ChannelSpec, ImpairmentParams,
                            correlation_for, draw_channel,
                            effective_noise_covariance, jakes_signature,
                            normalize_received, receive, sqrtm_psd, transmit,
                            trial_rng)


def test_channel_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(nt=0, nr=4)
    with pytest.raises(ValueError):
        ChannelSpec(nt=4, nr=4, model="nonsense")
    spec = ChannelSpec(nt=48, nr=32)
    assert np.isclose(spec.gamma, 1.5)
    assert np.isclose(spec.spacing, C_LIGHT / (2 * 5e9))


def test_impairment_validation():
    with pytest.raises(ValueError):
        ImpairmentParams(tau=1.5)
    with pytest.raises(ValueError):
        ImpairmentParams(eta=-0.1)
    imp = ImpairmentParams().resolved(3, 5)
    assert np.allclose(imp.phi_r, np.eye(5))
    assert np.allclose(imp.phi_t, np.eye(3))


def test_jakes_signature_oracle():
    n, fc, d = 6, 5e9, C_LIGHT / (2 * 5e9)
    phi = jakes_signature(n, fc, d)
    assert np.allclose(np.diag(phi), 1.0)
    assert np.allclose(phi, phi.T)
    for k in range(n):
        for l in range(n):
            assert np.isclose(phi[k, l], j0(2 * np.pi * fc * d * abs(k - l) / C_LIGHT))
    with pytest.raises(ValueError):
        jakes_signature(0, fc, d)
    with pytest.raises(ValueError):
        jakes_signature(4, fc, 0.0)


def test_sqrtm_psd_squares_back():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    a = a @ a.conj().T
    r = sqrtm_psd(a)
    assert np.allclose(r @ r.conj().T, a, atol=1e-10)
    # small numerically negative eigenvalues are clamped, not fatal
    phi = jakes_signature(16, 5e9, C_LIGHT / (2 * 5e9)).astype(complex)
    sqrtm_psd(phi)
    with pytest.raises(ValueError):
        sqrtm_psd(np.diag([1.0, -0.5]).astype(complex))


def test_correlation_for_models():
    phi_r, phi_t = correlation_for(ChannelSpec(nt=3, nr=5))
    assert np.allclose(phi_r, np.eye(5)) and np.allclose(phi_t, np.eye(3))
    phi_r, phi_t = correlation_for(ChannelSpec(nt=3, nr=5, model="jakes-correlated"))
    assert phi_r.shape == (5, 5) and not np.allclose(phi_r, np.eye(5))


def test_draw_channel_gauss_markov_combination():
    spec = ChannelSpec(nt=4, nr=6)
    imp = ImpairmentParams(tau=0.3)
    real = draw_channel(spec, imp, trial_rng(0, 1))
    assert np.allclose(real.h_true,
                       np.sqrt(1 - 0.3 ** 2) * real.h_est + 0.3 * real.e)
    # perfect CSI: estimate equals truth
    real0 = draw_channel(spec, ImpairmentParams(), trial_rng(0, 1))
    assert np.allclose(real0.h_true, real0.h_est)


def test_channel_statistics_match_correlation():
    """E[vec(H) vec(H)^H] = Phi_t^T kron Phi_r for the doubly-correlated draw."""
    spec = ChannelSpec(nt=2, nr=3, model="jakes-correlated")
    phi_r, phi_t = correlation_for(spec)
    imp = ImpairmentParams(phi_r=phi_r, phi_t=phi_t)
    rng = trial_rng(42, 0)
    acc = np.zeros((6, 6), dtype=complex)
    n = 20000
    for _ in range(n):
        h = draw_channel(spec, imp, rng).h_est
        v = h.reshape(-1, order="F")
        acc += np.outer(v, v.conj())
    acc /= n
    ref = np.kron(phi_t.T, phi_r)
    assert np.linalg.norm(acc - ref) / np.linalg.norm(ref) < 0.05


def test_transmit_receive_noise_levels():
    rng = trial_rng(0, 2)
    s = np.ones(2000, dtype=complex)
    x = transmit(s, ImpairmentParams(eta=0.1), rng)
    assert np.isclose(np.var(x - s), 0.1, rtol=0.1)
    assert transmit(s, ImpairmentParams(), rng) is not None
    h = np.eye(2000, dtype=complex)
    y = receive(h, s, 0.25, rng)
    assert np.isclose(np.var(y - s), 0.25, rtol=0.1)
    assert np.allclose(receive(h, s, 0.0, rng), s)
    with pytest.raises(ValueError):
        receive(h, s, -1.0, rng)


def test_normalize_received():
    y = np.array([1.0 + 1j])
    assert np.allclose(normalize_received(y, 0.0), y)
    assert np.allclose(normalize_received(y, 0.6), y / 0.8)
    with pytest.raises(ValueError):
        normalize_received(y, 1.0)


@pytest.mark.parametrize("tau2_db,eta_db", [(-15.0, -20.0), (-10.0, -10.0)])
def test_effective_noise_covariance_monte_carlo(tau2_db, eta_db):
    """Empirical covariance of the aggregate noise after normalization must
    match the analytic Sigma_C + Sigma_U to within 5% Frobenius error."""
    nr, nt = 8, 8
    tau = np.sqrt(10 ** (tau2_db / 10))
    eta = 10 ** (eta_db / 10)
    sigma2 = 0.05
    spec = ChannelSpec(nt=nt, nr=nr)
    imp = ImpairmentParams(tau=tau, eta=eta).resolved(nt, nr)
    rng = trial_rng(7, 0)
    real = draw_channel(spec, imp, rng)
    sigma_c, sigma_u = effective_noise_covariance(real.h_est, imp, sigma2)
    sigma = sigma_c + sigma_u

    n = 100_000
    s = (rng.integers(0, 2, (n, nt)) * 2 - 1
         + 1j * (rng.integers(0, 2, (n, nt)) * 2 - 1)) / np.sqrt(2)
    w = np.sqrt(eta / 2) * (rng.standard_normal((n, nt))
                            + 1j * rng.standard_normal((n, nt)))
    e = (rng.standard_normal((n, nr, nt)) + 1j * rng.standard_normal((n, nr, nt))) / np.sqrt(2)
    noise = np.sqrt(sigma2 / 2) * (rng.standard_normal((n, nr))
                                   + 1j * rng.standard_normal((n, nr)))
    # y = H(s+w) + n with H = sqrt(1-tau^2) Hhat + tau E; after dividing by
    # sqrt(1-tau^2), the effective noise is everything except Hhat s.
    x = s + w
    hx = np.einsum("rt,nt->nr", real.h_est, x) * np.sqrt(1 - tau ** 2)
    ex = np.einsum("nrt,nt->nr", e, x) * tau
    y_bar = (hx + ex + noise) / np.sqrt(1 - tau ** 2)
    ntilde = y_bar - s @ real.h_est.T
    emp = (ntilde.T @ ntilde.conj()) / n   # entry (k,l) = E[n_k conj(n_l)]
    err = np.linalg.norm(emp - sigma) / np.linalg.norm(sigma)
    assert err <= 0.05


def test_trial_rng_deterministic_and_distinct():
    a = trial_rng(0, 1, 2, 3).standard_normal(4)
    b = trial_rng(0, 1, 2, 3).standard_normal(4)
    c = trial_rng(0, 1, 2, 4).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
