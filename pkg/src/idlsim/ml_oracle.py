"""Exhaustive maximum-likelihood detection for small instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation


@dataclass(frozen=True)
class OracleLimits:
    max_candidates: int = 2 ** 20


class EnumerationTooLarge(Exception):
    pass


def candidate_indices(n_points: int, nt: int) -> np.ndarray:
    """All |C|^Nt index vectors in lexicographic order."""
    grids = np.meshgrid(*([np.arange(n_points)] * nt), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, nt)


def ml_detect(y_complex: np.ndarray, h_complex: np.ndarray, con: Constellation,
              limits: OracleLimits = OracleLimits()):
    """Globally optimal constellation vector for min ||y - H s||^2 over C^Nt.

    Ties break toward the lexicographically smallest symbol-index vector.
    Returns (symbols, index_vector, residual).
    """
    nt = h_complex.shape[1]
    m = len(con.points_complex)
    total = m ** nt
    if total > limits.max_candidates:
        raise EnumerationTooLarge(f"{total} candidates exceed cap {limits.max_candidates}")
    idx = candidate_indices(m, nt)
    best_res = np.inf
    best_row = None
    chunk = 1 << 16
    for start in range(0, total, chunk):
        rows = idx[start:start + chunk]
        cands = con.points_complex[rows]                    # (chunk, nt)
        resid = np.abs(y_complex[None, :] - cands @ h_complex.T) ** 2
        resid = resid.sum(axis=1)
        j = int(np.argmin(resid))  # first occurrence = lexicographic tie-break
        if resid[j] < best_res:
            best_res = float(resid[j])
            best_row = rows[j].copy()
    return con.points_complex[best_row], best_row, best_res
