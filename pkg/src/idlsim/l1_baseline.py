"""SOAV-style l1-regularized baseline detector (proximal gradient)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, RealLinearModel

# coarse offline grid for the baseline's penalty weight
LAMBDA_GRID = (0.01, 0.05, 0.1, 0.5, 1.0, 5.0)


@dataclass
class L1Config:
    lam: float = 0.1
    max_iters: int = 2000
    step_rule: str = "fixed"  # fixed 1/L
    tol: float = 1e-7

    def __post_init__(self):
        if self.lam < 0 or self.tol <= 0:
            raise ValueError("need lam >= 0 and tol > 0")


def prox_sum_abs(v, theta: float, pam_levels: np.ndarray):
    """argmin_u 0.5 (u - v)^2 + theta * sum_i |u - p_i|, exact.

    Piecewise-linear penalty: the optimum is either an interior stationary
    point of one of the K+1 linear pieces or one of the K breakpoints;
    all candidates are evaluated and the smallest-u minimizer returned.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    p = np.asarray(pam_levels, dtype=float)
    k = len(p)
    lo = np.concatenate(([-np.inf], p))
    hi = np.concatenate((p, [np.inf]))
    slopes = 2.0 * np.arange(k + 1) - k  # sum of signs in each piece
    interior = v[None, :] - theta * slopes[:, None]          # (k+1, n)
    interior = np.clip(interior, lo[:, None], hi[:, None])   # clipped -> breakpoint
    cand = np.vstack([interior, np.broadcast_to(p[:, None], (k, v.size))])
    obj = 0.5 * (cand - v[None, :]) ** 2 \
        + theta * np.abs(cand[:, None, :] - p[None, :, None]).sum(axis=1)
    # deterministic tie-break: smallest candidate value among minima
    order = np.argsort(cand, axis=0, kind="stable")
    cand_sorted = np.take_along_axis(cand, order, axis=0)
    obj_sorted = np.take_along_axis(obj, order, axis=0)
    best = np.argmin(obj_sorted, axis=0)
    out = cand_sorted[best, np.arange(v.size)]
    return out if out.size > 1 else float(out[0])


def _spectral_bound(h: np.ndarray, iters: int = 60) -> float:
    """Largest eigenvalue of H^T H via power iteration (deterministic start)."""
    g = h.T @ h
    x = np.ones(g.shape[0]) / np.sqrt(g.shape[0])
    lam = 1.0
    for _ in range(iters):
        x = g @ x
        lam = np.linalg.norm(x)
        if lam == 0.0:
            return 0.0
        x /= lam
    return float(lam)


def soav_objective(s: np.ndarray, model: RealLinearModel, con: Constellation,
                   lam: float) -> float:
    resid = model.y - model.h @ s
    pen = np.abs(s[None, :] - con.pam_levels[:, None]).sum()
    return float(resid @ resid + lam * pen)


def soav_detect(model: RealLinearModel, con: Constellation, cfg: L1Config) -> np.ndarray:
    """Proximal-gradient solve of min_s lam * sum_i ||s - p_i 1||_1 + ||y - H s||^2."""
    h, y = model.h, model.y
    big_l = 2.0 * _spectral_bound(h) * (1.0 + 1e-12)
    if big_l == 0.0:
        return np.zeros(h.shape[1])
    hty = h.T @ y
    gram = h.T @ h
    s = np.zeros(h.shape[1])
    theta = cfg.lam / big_l
    for _ in range(cfg.max_iters):
        grad = 2.0 * (gram @ s - hty)
        s_new = prox_sum_abs(s - grad / big_l, theta, con.pam_levels)
        if np.linalg.norm(s_new - s) < cfg.tol * (1.0 + np.linalg.norm(s)):
            s = s_new
            break
        s = s_new
    return np.asarray(s)
