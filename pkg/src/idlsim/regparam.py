"""Auto-tuning of the regularization weight via a generalized eigenvalue problem.

Each detector variant reduces to a weighted least-squares data term
s^T M s - 2 g^T s + const; from (M, g) and the pivot quantities (b, B) we
assemble the symmetric pencil (Q, P) whose largest finite real generalized
eigenvalue (of P x = lambda Q x) is the optimal regularization weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import ImpairmentParams, effective_noise_covariance, normalize_received
from .constellation import RealLinearModel, stack_matrix, stack_vector
from .l0core import QtState

TOL_IM = 1e-8
TOL_INF = 1e-10
TOL_KKT = 1e-6


class NoAdmissibleLambda(Exception):
    """No finite real positive generalized eigenvalue survived filtering."""


@dataclass
class WeightedLS:
    """Quadratic data term s^T M s - 2 g^T s + (y_quad - delta) shared by the
    closed-form update, the pencil, and the KKT constraint check."""

    m_mat: np.ndarray   # (2Nt, 2Nt) symmetric
    g_vec: np.ndarray   # (2Nt,)
    y_quad: float       # weighted y^T y
    delta: float        # search-ball radius (defaults to sigma2)

    @property
    def c_scal(self) -> float:
        return self.y_quad - self.delta


@dataclass
class PencilPair:
    q_mat: np.ndarray
    p_mat: np.ndarray
    variant: str
    wls: WeightedLS
    b_vec: np.ndarray
    b_diag: np.ndarray


@dataclass
class LambdaSolution:
    lambda_opt: float
    mu_opt: float
    kkt_residual: float
    eigvec: np.ndarray | None = None


def weighted_plain(model: RealLinearModel, delta: float | None = None) -> WeightedLS:
    """Search-ball default: delta = E||y - H s||^2 at the true symbols, i.e.
    the total noise energy Nr * sigma2 (complex per-entry convention)."""
    h, y = model.h, model.y
    nr = h.shape[0] // 2
    d = nr * model.sigma2 if delta is None else delta
    return WeightedLS(m_mat=h.T @ h, g_vec=h.T @ y, y_quad=float(y @ y), delta=d)


def weighted_noise(model: RealLinearModel, sigma2: float, delta: float | None = None) -> WeightedLS:
    """Ridge-augmented data term; the ball default grows by the expected ridge
    contribution sigma2 * E||s||^2 = sigma2 * Nt."""
    h, y = model.h, model.y
    nr = h.shape[0] // 2
    nt = h.shape[1] // 2
    d = (nr + nt) * sigma2 if delta is None else delta
    m = h.T @ h
    m[np.diag_indices_from(m)] += sigma2
    return WeightedLS(m_mat=m, g_vec=h.T @ y, y_quad=float(y @ y), delta=d)


def weighted_robust(y_bar, h_est, imp: ImpairmentParams, sigma2: float,
                    delta: float | None = None) -> WeightedLS:
    """Mahalanobis-weighted data term for imperfect CSI / hardware distortion.

    y_bar and h_est are complex (already tau-normalized y); the whitening
    weight is (Sigma_C + I)^-1 in the real-stacked domain, with a
    sigma2/(1-tau^2) ridge on the quadratic block.
    """
    sigma_c, _ = effective_noise_covariance(h_est, imp, sigma2)
    hr = stack_matrix(h_est)
    yr = stack_vector(y_bar)
    w = stack_matrix(sigma_c)
    w[np.diag_indices_from(w)] += 1.0
    cho = scipy.linalg.cho_factor(w, lower=True)
    wh = scipy.linalg.cho_solve(cho, hr)    # (Sigma_C + I)^-1 H
    wy = scipy.linalg.cho_solve(cho, yr)
    ridge = sigma2 / (1.0 - imp.tau ** 2)
    m = hr.T @ wh
    m[np.diag_indices_from(m)] += ridge
    if delta is None:
        # expected whitened residual energy at the true symbols plus the
        # expected ridge contribution ridge * E||s||^2
        nr, nt = h_est.shape
        imp_res = imp.resolved(nt, nr)
        sigma_tot = sigma_c + (sigma2 / (1.0 - imp_res.tau ** 2)) * np.eye(nr)
        w_inv_tot = np.linalg.solve(sigma_c + np.eye(nr), sigma_tot)
        delta = float(np.trace(w_inv_tot).real) + ridge * nt
    return WeightedLS(m_mat=m, g_vec=hr.T @ wy, y_quad=float(yr @ wy), delta=delta)


def assemble_pencil(wls: WeightedLS, qt: QtState, variant: str) -> PencilPair:
    """Block layout:

        Q = [[y'y - delta, -g^T,  b^T ],      P = [[0,  0, -g^T],
             [-g,           M,   -B  ],            [0,  0,  M  ],
             [ b,          -B,    0  ]]           [-g,  M,  0  ]]
    """
    m, g = wls.m_mat, wls.g_vec
    n = len(g)
    dim = 2 * n + 1
    q = np.zeros((dim, dim))
    p = np.zeros((dim, dim))
    q[0, 0] = wls.c_scal
    q[0, 1:n + 1] = -g
    q[1:n + 1, 0] = -g
    q[0, n + 1:] = qt.b_vec
    q[n + 1:, 0] = qt.b_vec
    q[1:n + 1, 1:n + 1] = m
    idx = np.arange(n)
    q[1 + idx, n + 1 + idx] = -qt.b_diag
    q[n + 1 + idx, 1 + idx] = -qt.b_diag
    p[0, n + 1:] = -g
    p[n + 1:, 0] = -g
    p[1:n + 1, n + 1:] = m
    p[n + 1:, 1:n + 1] = m
    return PencilPair(q_mat=q, p_mat=p, variant=variant, wls=wls,
                      b_vec=qt.b_vec.copy(), b_diag=qt.b_diag.copy())


def build_pencil_plain(model: RealLinearModel, qt: QtState, sigma2: float,
                       delta: float | None = None) -> PencilPair:
    return assemble_pencil(weighted_plain(model, delta), qt, "idls")


def build_pencil_noise(model: RealLinearModel, qt: QtState, sigma2: float,
                       delta: float | None = None) -> PencilPair:
    return assemble_pencil(weighted_noise(model, sigma2, delta), qt, "idls-noise")


def build_pencil_robust(y_bar, h_est, qt: QtState, imp: ImpairmentParams, sigma2: float,
                        delta: float | None = None) -> PencilPair:
    return assemble_pencil(weighted_robust(y_bar, h_est, imp, sigma2, delta), qt, "idls-robust")


def kkt_residual(wls: WeightedLS, s_bar: np.ndarray) -> float:
    """Signed constraint value k(s) = s^T M s - 2 g^T s + y'y - delta."""
    s_bar = np.asarray(s_bar, dtype=float)
    return float(s_bar @ (wls.m_mat @ s_bar) - 2.0 * wls.g_vec @ s_bar + wls.c_scal)


def reconstruct_sbar(wls: WeightedLS, b_vec: np.ndarray, b_diag: np.ndarray,
                     mu: float) -> np.ndarray:
    """Stationary point (B + mu M)^-1 (b + mu g) for a candidate multiplier."""
    a = mu * wls.m_mat
    a[np.diag_indices_from(a)] += b_diag
    # candidates with tiny mu give nearly singular systems; they are filtered
    # by the complementarity check, so a warning-free solve is fine here
    try:
        return np.linalg.solve(a, b_vec + mu * wls.g_vec)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(a, b_vec + mu * wls.g_vec, rcond=None)[0]


def largest_real_eig(p_mat: np.ndarray, q_mat: np.ndarray) -> float:
    """Largest finite, real, strictly positive generalized eigenvalue of
    P x = lambda Q x; raises when none survives the filters."""
    ab = scipy.linalg.eig(p_mat, q_mat, right=False, homogeneous_eigvals=True)
    alpha, beta = ab[0], ab[1]
    beta_scale = np.max(np.abs(beta))
    if beta_scale == 0.0:
        raise NoAdmissibleLambda("pencil is entirely singular")
    finite = np.abs(beta) > TOL_INF * beta_scale
    lam = np.full(alpha.shape, np.nan + 0j)
    lam[finite] = alpha[finite] / beta[finite]
    real_ok = finite & (np.abs(lam.imag) <= TOL_IM * (1.0 + np.abs(lam.real)))
    pos_ok = real_ok & (lam.real > 0.0)
    if not np.any(pos_ok):
        raise NoAdmissibleLambda("no finite real positive eigenvalue")
    return float(np.max(lam.real[pos_ok]))


def max_finite_real_geneig(pencil: PencilPair) -> LambdaSolution:
    """Largest admissible eigenvalue of the pencil, with a KKT check on the
    reconstructed stationary point."""
    lambda_opt = largest_real_eig(pencil.p_mat, pencil.q_mat)
    mu_opt = 1.0 / lambda_opt
    s_bar = reconstruct_sbar(pencil.wls, pencil.b_vec, pencil.b_diag, mu_opt)
    res = abs(kkt_residual(pencil.wls, s_bar))
    # Complementarity must hold simultaneously: an "eigenvalue" whose
    # reconstructed stationary point misses the ball boundary is a numerical
    # artifact of an inactive constraint, not an admissible multiplier.
    if res > TOL_KKT * max(abs(pencil.wls.y_quad), 1.0):
        raise NoAdmissibleLambda("constraint inactive at reconstructed point")
    return LambdaSolution(lambda_opt=lambda_opt, mu_opt=mu_opt, kkt_residual=res)
