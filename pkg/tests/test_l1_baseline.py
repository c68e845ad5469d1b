import numpy as np
import pytest

from idlsim.constellation import RealLinearModel, make_qam, make_qpsk, stack_real
from idlsim.l1_baseline import (LAMBDA_GRID, L1Config, prox_sum_abs,
                                soav_detect, soav_objective)


def _prox_oracle(v, theta, levels, grid=None):
    """Dense grid search over the scalar prox objective."""
    if grid is None:
        lo = min(v, levels.min()) - 1.0
        hi = max(v, levels.max()) + 1.0
        grid = np.linspace(lo, hi, 200_001)
    grid = np.union1d(grid, levels)  # kinks are candidate minimizers
    obj = 0.5 * (grid - v) ** 2 + theta * np.abs(grid[:, None] - levels[None, :]).sum(axis=1)
    return grid[np.argmin(obj)]


@pytest.mark.parametrize("b", [2, 4])
def test_prox_matches_grid_oracle(b):
    con = make_qam(b)
    rng = np.random.default_rng(0)
    for _ in range(60):
        v = float(rng.uniform(-2, 2))
        theta = float(rng.uniform(0, 1.5))
        got = prox_sum_abs(v, theta, con.pam_levels)
        ref = _prox_oracle(v, theta, con.pam_levels)
        assert abs(got - ref) < 2e-5


def test_prox_vectorized_matches_scalar():
    con = make_qpsk()
    rng = np.random.default_rng(1)
    v = rng.uniform(-2, 2, size=50)
    out = prox_sum_abs(v, 0.3, con.pam_levels)
    for i in range(len(v)):
        assert np.isclose(out[i], prox_sum_abs(float(v[i]), 0.3, con.pam_levels))


def test_prox_properties():
    con = make_qpsk()
    lv = con.pam_levels
    # theta = 0 is the identity
    assert np.isclose(prox_sum_abs(0.37, 0.0, lv), 0.37)
    # large theta snaps everything between the levels (median effect)
    got = prox_sum_abs(0.0, 100.0, lv)
    assert lv[0] <= got <= lv[-1]
    # prox is non-expansive
    a = prox_sum_abs(0.9, 0.2, lv)
    b = prox_sum_abs(0.1, 0.2, lv)
    assert abs(a - b) <= 0.8 + 1e-12
    with pytest.raises(ValueError):
        prox_sum_abs(0.0, -0.1, lv)


def test_l1_config_validation():
    with pytest.raises(ValueError):
        L1Config(lam=-1.0)
    with pytest.raises(ValueError):
        L1Config(tol=0.0)
    assert 0.1 in LAMBDA_GRID


def test_soav_objective_decreases():
    con = make_qpsk()
    rng = np.random.default_rng(2)
    nr, nt = 8, 8
    h = rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))
    s = con.points_complex[rng.integers(0, 4, nt)]
    y = h @ s + 0.05 * (rng.standard_normal(nr) + 1j * rng.standard_normal(nr))
    yr, hr = stack_real(y, h)
    model = RealLinearModel(y=yr, h=hr, sigma2=0.005)
    s_hat = soav_detect(model, con, L1Config(lam=0.1))
    assert soav_objective(s_hat, model, con, 0.1) <= \
        soav_objective(np.zeros(2 * nt), model, con, 0.1)


def test_soav_recovers_noiseless_symbols():
    con = make_qpsk()
    rng = np.random.default_rng(3)
    nr, nt = 12, 8
    h = (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / np.sqrt(2)
    s = con.points_complex[rng.integers(0, 4, nt)]
    y = h @ s
    yr, hr, sr = stack_real(y, h, s)
    model = RealLinearModel(y=yr, h=hr, sigma2=0.0)
    s_hat = soav_detect(model, con, L1Config(lam=0.01, max_iters=20000, tol=1e-10))
    assert np.max(np.abs(s_hat - sr)) < 0.05


def test_soav_zero_channel_returns_zeros():
    con = make_qpsk()
    model = RealLinearModel(y=np.zeros(4), h=np.zeros((4, 4)), sigma2=0.1)
    assert np.allclose(soav_detect(model, con, L1Config()), 0.0)


def test_soav_deterministic():
    con = make_qpsk()
    rng = np.random.default_rng(4)
    h = rng.standard_normal((8, 10))
    y = rng.standard_normal(8)
    model = RealLinearModel(y=y, h=h, sigma2=0.1)
    a = soav_detect(model, con, L1Config(lam=0.1))
    b = soav_detect(model, con, L1Config(lam=0.1))
    assert np.array_equal(a, b)
