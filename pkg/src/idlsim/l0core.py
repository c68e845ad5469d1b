"""Smooth l0 surrogate and the quadratic-transform pivot quantities b, B."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation


@dataclass
class QtState:
    """Per-iteration pivot state of the quadratic transform.

    beta[i, j] = sqrt(alpha) / ((s_j - p_i)^2 + alpha); b_vec and b_diag are
    the constellation-pull vector and the (diagonal) curvature it induces.
    B is diagonal by construction, so only its diagonal is stored.
    """

    beta: np.ndarray      # (|P|, 2Nt)
    b_vec: np.ndarray     # (2Nt,)
    b_diag: np.ndarray    # (2Nt,), strictly positive
    alpha: float


def l0_smooth(x: np.ndarray, alpha: float) -> float:
    """sum_i |x_i|^2 / (|x_i|^2 + alpha); tends to ||x||_0 as alpha -> 0."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    ax2 = np.abs(np.asarray(x)) ** 2
    return float(np.sum(ax2 / (ax2 + alpha)))


def update_pivots(s: np.ndarray, con: Constellation, alpha: float) -> QtState:
    """Recompute beta, b and diag(B) at the pivot point s (real-stacked)."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    s = np.asarray(s, dtype=float)
    diff = s[None, :] - con.pam_levels[:, None]     # (|P|, 2Nt)
    beta = np.sqrt(alpha) / (diff ** 2 + alpha)
    beta2 = beta ** 2
    b_vec = con.pam_levels @ beta2
    b_diag = beta2.sum(axis=0)
    return QtState(beta=beta, b_vec=b_vec, b_diag=b_diag, alpha=alpha)


def smooth_penalty(s: np.ndarray, con: Constellation, alpha: float) -> float:
    """sum over PAM levels p_i of l0_smooth(s - p_i 1, alpha)."""
    s = np.asarray(s, dtype=float)
    d2 = (s[None, :] - con.pam_levels[:, None]) ** 2
    return float(np.sum(d2 / (d2 + alpha)))


def surrogate_value(x: np.ndarray, pivot_x: np.ndarray, alpha: float) -> float:
    """QT majorizer of l0_smooth at the pivot: tight there, >= elsewhere."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    x = np.asarray(x, dtype=float)
    pivot_x = np.asarray(pivot_x, dtype=float)
    beta = np.sqrt(alpha) / (np.abs(pivot_x) ** 2 + alpha)
    terms = 2.0 * beta * np.sqrt(alpha) - beta ** 2 * (np.abs(x) ** 2 + alpha)
    return float(len(x) - np.sum(terms))
